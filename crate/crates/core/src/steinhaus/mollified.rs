//! The Dirichlet polynomials of the mollifier, for any completely
//! multiplicative unit-modulus evaluator (a character or a Steinhaus sample):
//!
//! D_{m,l} = Σ_{y_{m-1} < p ≤ y_m} λ(p)ε(p)/p^{1/2+il/log y} + (λ(p²)-1)ε(p)²/(2p^{1+2il/log y}),
//! R_{m,l} = (Σ_{j ≤ J_m} (k-1)^j/j! · (Re D_{m,l})^j)²,
//! Err_{m,l} = exp(2(k-1) Re D_{m,l}) - R_{m,l}.
//!
//! Here λ(p) = α_p + β_p and λ(p²) - 1 = α_p² + β_p².

use num_complex::Complex64;

use crate::characters::Multiplicative;
use crate::error::{Error, Result};
use crate::hecke::HeckeTable;
use crate::mollifier::MollifierSchedule;
use crate::primes::PrimeList;

/// Per-prime coefficients of D at s = 1/2 + it over a fixed prime set:
/// D(ε) = Σ_p c1_p ε(p) + c2_p ε(p)².
#[derive(Debug, Clone, PartialEq)]
pub struct DCoefficients {
    pub primes: Vec<u64>,
    pub c1: Vec<Complex64>,
    pub c2: Vec<Complex64>,
}

impl DCoefficients {
    pub fn new(table: &HeckeTable, primes: &[u64], t: f64) -> Result<Self> {
        if let Some(&p) = primes.last() {
            if p as usize > table.limit() {
                return Err(Error::precondition(format!("prime {p} beyond the coefficient table")));
            }
        }
        let s = Complex64::new(0.5, t);
        let (c1, c2) = primes
            .iter()
            .map(|&p| {
                let ps = Complex64::new(p as f64, 0.0).powc(-s);
                (table.lambda(p) * ps, (table.lambda_prime_square(p) - 1.0) / 2.0 * ps * ps)
            })
            .unzip();
        Ok(DCoefficients { primes: primes.to_vec(), c1, c2 })
    }

    /// The coefficients of D_{m,l}.
    pub fn for_block(table: &HeckeTable, list: &PrimeList, s: &MollifierSchedule, m: usize, l: i64) -> Result<Self> {
        s.check_l(l)?;
        let (lo, hi) = s.interval(m)?;
        if (list.bound() as f64) < hi.floor() {
            return Err(Error::precondition(format!("prime list to {} does not reach y_{m} = {hi:.1}", list.bound())));
        }
        Self::new(table, list.in_interval(lo, hi), l as f64 / s.log_y)
    }

    /// D at phases aligned with `primes`.
    pub fn eval_phases(&self, phases: &[Complex64]) -> Complex64 {
        debug_assert_eq!(phases.len(), self.primes.len());
        self.c1.iter().zip(&self.c2).zip(phases).map(|((&a, &b), &z)| a * z + b * z * z).sum()
    }

    pub fn eval<E: Multiplicative + ?Sized>(&self, ev: &E) -> Complex64 {
        self.primes
            .iter()
            .zip(self.c1.iter().zip(&self.c2))
            .map(|(&p, (&a, &b))| {
                let z = ev.at_prime(p);
                a * z + b * z * z
            })
            .sum()
    }

    /// Σ_p (2/√p + 1/p): the triangle-inequality bound on |D|.
    pub fn trivial_bound(&self) -> f64 {
        self.primes.iter().map(|&p| 2.0 / (p as f64).sqrt() + 1.0 / p as f64).sum()
    }
}

/// Σ_{p ∈ primes} λ(p)ε(p)p^{-1/2-it} + (λ(p²)-1)ε(p)²p^{-1-2it}/2.
pub fn dirichlet_d<E: Multiplicative + ?Sized>(ev: &E, table: &HeckeTable, primes: &[u64], t: f64) -> Result<Complex64> {
    Ok(DCoefficients::new(table, primes, t)?.eval(ev))
}

pub fn d_ml<E: Multiplicative + ?Sized>(
    ev: &E,
    table: &HeckeTable,
    list: &PrimeList,
    s: &MollifierSchedule,
    m: usize,
    l: i64,
) -> Result<Complex64> {
    Ok(DCoefficients::for_block(table, list, s, m, l)?.eval(ev))
}

/// Σ_{j ≤ n} r^j / j!.
pub fn truncated_exp(r: f64, n: u32) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=n {
        term *= r / j as f64;
        sum += term;
    }
    sum
}

/// Σ_{j > n} r^j / j! without cancellation when |r| ≤ n + 1.
pub fn exp_tail(r: f64, n: u32) -> f64 {
    if r.abs() > n as f64 + 1.0 {
        return r.exp() - truncated_exp(r, n);
    }
    // Terms decrease in modulus from j = n + 1 on.
    let mut term = (1..=n + 1).fold(1.0, |t, j| t * r / j as f64);
    let mut sum = 0.0f64;
    let mut j = n + 1;
    while term != 0.0 && term.abs() > 1e-17 * sum.abs() {
        sum += term;
        j += 1;
        term *= r / j as f64;
    }
    sum
}

/// R from D: (Σ_{j ≤ J} ((k-1) Re D)^j / j!)².
pub fn r_from_d(d: Complex64, k: f64, j: u32) -> f64 {
    truncated_exp((k - 1.0) * d.re, j).powi(2)
}

/// Err from D: e^{2u} - S_J(u)² = (e^u - S)(e^u + S), u = (k-1) Re D.
pub fn err_from_d(d: Complex64, k: f64, j: u32) -> f64 {
    let u = (k - 1.0) * d.re;
    exp_tail(u, j) * (u.exp() + truncated_exp(u, j))
}

/// Σ_{max(j₁,j₂) > J} v^{j₁+j₂}/(j₁! j₂!) with v = (k-1)|D|: a bound on |Err|.
pub fn err_tail_bound(d: Complex64, k: f64, j: u32) -> f64 {
    let v = (k - 1.0) * d.norm();
    exp_tail(v, j) * (v.exp() + truncated_exp(v, j))
}

pub fn r_ml<E: Multiplicative + ?Sized>(
    ev: &E,
    table: &HeckeTable,
    list: &PrimeList,
    s: &MollifierSchedule,
    m: usize,
    l: i64,
) -> Result<f64> {
    Ok(r_from_d(d_ml(ev, table, list, s, m, l)?, s.k, s.j(m)))
}

pub fn err_ml<E: Multiplicative + ?Sized>(
    ev: &E,
    table: &HeckeTable,
    list: &PrimeList,
    s: &MollifierSchedule,
    m: usize,
    l: i64,
) -> Result<f64> {
    Ok(err_from_d(d_ml(ev, table, list, s, m, l)?, s.k, s.j(m)))
}

/// R = Σ_{|l| ≤ (log y)/2} ∏_m R_{m,l}, l over the integers.
pub fn r_total<E: Multiplicative + ?Sized>(ev: &E, table: &HeckeTable, list: &PrimeList, s: &MollifierSchedule) -> Result<f64> {
    let mut total = 0.0;
    for l in s.shifts() {
        let mut prod = 1.0;
        for m in 1..=s.m_count {
            prod *= r_ml(ev, table, list, s, m, l)?;
        }
        total += prod;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{CharacterIndex, Trivial};
    use crate::primes::sieve;
    use crate::steinhaus::sample;
    use std::sync::OnceLock;

    fn table() -> &'static HeckeTable {
        static T: OnceLock<HeckeTable> = OnceLock::new();
        T.get_or_init(|| HeckeTable::build(5000).unwrap())
    }

    #[test]
    fn hand_evaluation_on_one_prime() {
        let list = sieve(100).unwrap();
        let s = MollifierSchedule::from_parts(10.0, 2.0, &[2.0, 3.0], &[2, 2]).unwrap();
        let d = d_ml(&Trivial, table(), &list, &s, 2, 0).unwrap();
        let want = table().lambda(3) / 3f64.sqrt() + (table().lambda(9) - 1.0) / 6.0;
        assert!((d.re - want).abs() < 1e-15 && d.im.abs() < 1e-15);
        // (1, 1] is empty.
        let e = MollifierSchedule::from_parts(10.0, 2.0, &[1.5, 1.9], &[2, 2]).unwrap();
        assert_eq!(d_ml(&Trivial, table(), &list, &e, 2, 0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn triangle_bound_and_range_checks() {
        let list = sieve(5000).unwrap();
        let s = MollifierSchedule::from_parts(100.0, 2.0, &[30.0, 3000.0], &[3, 3]).unwrap();
        let idx = CharacterIndex::new(10_007).unwrap();
        let co = DCoefficients::for_block(table(), &list, &s, 2, 1).unwrap();
        for a in [1u64, 17, 5000] {
            assert!(co.eval(&idx.character(a)).norm() <= co.trivial_bound());
        }
        assert!(d_ml(&Trivial, table(), &list, &s, 3, 0).is_err());
        assert!(d_ml(&Trivial, table(), &list, &s, 1, 5).is_err());
    }

    #[test]
    fn truncations() {
        assert_eq!(r_from_d(Complex64::new(0.0, 0.3), 3.0, 5), 1.0);
        for r in [-1.0, -0.3, 0.2, 1.0] {
            let d = Complex64::new(r, 0.7);
            assert!((r_from_d(d, 2.5, 40) - (2.0 * 1.5 * r).exp()).abs() < 1e-10);
            let s: f64 = (0..=4).map(|j| r.powi(j) / (1..=j).product::<i32>().max(1) as f64).sum();
            assert!((r_from_d(d, 2.0, 4) - s * s).abs() < 1e-14);
        }
        assert!(exp_tail(0.5, 3) > 0.0 && (exp_tail(0.5, 3) - (0.5f64.exp() - truncated_exp(0.5, 3))).abs() < 1e-15);
        assert_eq!(err_from_d(Complex64::new(0.0, 0.0), 2.0, 3), 0.0);
    }

    #[test]
    fn err_within_tail_bound() {
        let list = sieve(2000).unwrap();
        let s = MollifierSchedule::from_parts(100.0, 3.0, &[5.0, 500.0], &[3, 4]).unwrap();
        for draw in 0..200 {
            let f = sample(&list, 500.0, 21, draw).unwrap();
            for m in 1..=2 {
                let d = d_ml(&f, table(), &list, &s, m, 0).unwrap();
                let err = err_ml(&f, table(), &list, &s, m, 0).unwrap();
                let direct = (2.0 * (s.k - 1.0) * d.re).exp() - r_ml(&f, table(), &list, &s, m, 0).unwrap();
                assert!((err - direct).abs() < 1e-12 * (1.0 + direct.abs()));
                assert!(err.abs() <= err_tail_bound(d, s.k, s.j(m)) * (1.0 + 1e-12));
            }
            let deep = MollifierSchedule::from_parts(100.0, 2.0, &[5.0, 500.0], &[40, 40]).unwrap();
            let d = d_ml(&f, table(), &list, &deep, 2, 0).unwrap();
            if d.norm() <= 1.0 {
                assert!(err_ml(&f, table(), &list, &deep, 2, 0).unwrap().abs() < 1e-8);
            }
        }
    }

    #[test]
    fn total_is_nonnegative() {
        let list = sieve(3000).unwrap();
        let s = MollifierSchedule::from_parts(100.0, 2.0, &[10.0, 200.0, 2500.0], &[3, 2, 2]).unwrap();
        assert_eq!(s.shifts(), vec![-3, -2, -1, 0, 1, 2, 3]);
        for draw in 0..20 {
            let f = sample(&list, 2500.0, 1, draw).unwrap();
            assert!(r_total(&f, table(), &list, &s).unwrap() >= 0.0);
        }
    }
}
