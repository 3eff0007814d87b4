//! Steinhaus random multiplicative functions: f(p) independent and uniform
//! on the unit circle, extended completely multiplicatively.
//!
//! Phases come from ChaCha8 used as a counter-based generator. The key is
//! derived from the seed, the stream is the draw number and the word position
//! is fixed by the rank of p among the primes, so f(p) for a given
//! (seed, draw, p) never depends on which other primes were requested or in
//! what order samples were produced.

pub mod lemmas;
pub mod mollified;
pub mod transfer;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::Multiplicative;
use crate::error::{Error, Result};
use crate::hecke::{factor_exponents, HeckeTable};
use crate::numeric::MeanEstimate;
use crate::primes::{FactorTable, PrimeList};

pub use lemmas::{
    euler_battery_cases, euler_product_battery, euler_product_mc, even_moment_battery, even_moment_check, expected_euler_product,
    parseval_check, EulerBatteryRow, EulerCase, EulerExpectation, EvenMomentCase, EvenMomentReport, ParsevalReport,
};
pub use mollified::{
    d_ml, dirichlet_d, err_ml, err_tail_bound, exp_tail, r_from_d, r_ml, r_total, truncated_exp, DCoefficients,
};
pub use transfer::{orthogonality_transfer_check, LaurentPoly, TransferReport};

/// Deterministic phase source keyed by (seed, draw, rank of p).
#[derive(Debug, Clone)]
pub struct PhaseSource {
    seed: u64,
}

impl PhaseSource {
    pub fn new(seed: u64) -> Self {
        PhaseSource { seed }
    }

    /// Phases of the primes with ranks first_rank, first_rank + 1, … (rank 0
    /// is the prime 2), for one draw.
    pub fn phases(&self, draw: u64, first_rank: usize, count: usize) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(draw);
        rng.set_word_pos(2 * first_rank as u128);
        (0..count).map(|_| unit_phase(rng.next_u64())).collect()
    }
}

#[inline]
fn unit_phase(bits: u64) -> Complex64 {
    let u = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let (s, c) = (TAU * u).sin_cos();
    Complex64::new(c, s)
}

/// Rank of the first prime > lo in the list.
fn rank_above(list: &PrimeList, lo: f64) -> usize {
    list.primes().partition_point(|&p| (p as f64) <= lo)
}

/// One realisation of f on the primes of an interval (lo, hi].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinhausSample {
    pub seed: u64,
    pub draw: u64,
    /// The realisation covers primes in (lo, y].
    pub lo: f64,
    pub y: f64,
    primes: Vec<u64>,
    phases: Vec<Complex64>,
}

/// f(p) for all primes p ≤ y.
pub fn sample(list: &PrimeList, y: f64, seed: u64, draw: u64) -> Result<SteinhausSample> {
    sample_range(list, 1.0, y, seed, draw)
}

/// f(p) for the primes in (lo, hi]; the values agree with [`sample`] on the
/// overlap.
pub fn sample_range(list: &PrimeList, lo: f64, hi: f64, seed: u64, draw: u64) -> Result<SteinhausSample> {
    if (list.bound() as f64) < hi.floor() {
        return Err(Error::precondition(format!("prime list to {} does not reach y = {hi}", list.bound())));
    }
    let primes = list.in_interval(lo, hi).to_vec();
    let phases = PhaseSource::new(seed).phases(draw, rank_above(list, lo), primes.len());
    Ok(SteinhausSample { seed, draw, lo, y: hi, primes, phases })
}

impl SteinhausSample {
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    pub fn phase(&self, p: u64) -> Option<Complex64> {
        self.primes.binary_search(&p).ok().map(|i| self.phases[i])
    }

    /// Keep f(p) for p ≤ cut and redraw the primes above it: one draw from the
    /// conditional law given (f(p))_{p ≤ cut}.
    pub fn resample_above(&self, list: &PrimeList, cut: f64, draw: u64) -> SteinhausSample {
        let keep = self.primes.partition_point(|&p| (p as f64) <= cut);
        let fresh = PhaseSource::new(self.seed ^ RESAMPLE_SALT).phases(
            draw,
            rank_above(list, cut.max(self.lo)),
            self.primes.len() - keep,
        );
        let mut phases = self.phases[..keep].to_vec();
        phases.extend(fresh);
        SteinhausSample { phases, draw, ..self.clone() }
    }
}

/// Separates inner (conditional) draws from the outer stream.
const RESAMPLE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

impl Multiplicative for SteinhausSample {
    /// Panics if p is not covered by the sample.
    fn at_prime(&self, p: u64) -> Complex64 {
        self.phase(p).unwrap_or_else(|| panic!("prime {p} outside Steinhaus sample (lo = {}, y = {})", self.lo, self.y))
    }
}

/// f(n) = ∏ f(p)^a over p^a ‖ n.
pub fn f_value(s: &SteinhausSample, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::domain("f(0) is undefined"));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for (p, a) in factor_exponents(n) {
        let fp = s.phase(p).ok_or_else(|| Error::domain(format!("prime factor {p} of {n} exceeds y = {}", s.y)))?;
        acc *= fp.powu(a);
    }
    Ok(acc)
}

/// Which n ≤ x enter a partial sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SumVariant {
    Full,
    /// P⁺(n) ≤ y (n = 1 included).
    Smooth { y: f64 },
    /// P⁻(n) > y (n = 1 included).
    Rough { y: f64 },
}

impl SumVariant {
    fn admits(&self, smallest: u64, largest: u64) -> bool {
        match *self {
            SumVariant::Full => true,
            SumVariant::Smooth { y } => (largest as f64) <= y,
            SumVariant::Rough { y } => (smallest as f64) > y,
        }
    }
}

/// f(n) for 1 ≤ n ≤ x (index n), `None` where a prime factor is missing
/// from the sample.
fn f_values(s: &SteinhausSample, factors: &FactorTable, x: usize) -> Vec<Option<Complex64>> {
    let mut out = vec![None; x + 1];
    if x >= 1 {
        out[1] = Some(Complex64::new(1.0, 0.0));
    }
    for n in 2..=x {
        let p = factors.smallest_prime_factor(n as u64);
        out[n] = match (s.phase(p), out[n / p as usize]) {
            (Some(fp), Some(rest)) => Some(fp * rest),
            _ => None,
        };
    }
    out
}

fn check_sizes(table: &HeckeTable, factors: &FactorTable, x: u64) -> Result<()> {
    if x == 0 {
        return Err(Error::domain("x must be ≥ 1"));
    }
    if x as usize > table.limit() || x as usize > factors.limit() {
        return Err(Error::precondition(format!("x = {x} exceeds the coefficient or factor table")));
    }
    Ok(())
}

/// Σ_{n ≤ x} f(n)λ(n) over the n admitted by `variant`.
pub fn twisted_partial_sum(
    s: &SteinhausSample,
    table: &HeckeTable,
    factors: &FactorTable,
    x: u64,
    variant: SumVariant,
) -> Result<Complex64> {
    check_sizes(table, factors, x)?;
    let f = f_values(s, factors, x as usize);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..=x {
        let (lo, hi) = if n == 1 {
            (u64::MAX, 1)
        } else {
            (factors.smallest_prime_factor(n), factors.largest_prime_factor(n))
        };
        if !variant.admits(lo, hi) {
            continue;
        }
        let fn_ = f[n as usize].ok_or_else(|| {
            Error::domain(format!("n = {n} has a prime factor above y = {}; restrict the variant or raise y", s.y))
        })?;
        acc += fn_ * table.lambda(n);
    }
    Ok(acc)
}

/// c_r = Σ_{m ≤ x/r, P⁺(m) ≤ y} f(m)λ(m) for every rough r ≤ x, as
/// (r, c_r) pairs.
pub fn smooth_cofactors(
    s: &SteinhausSample,
    table: &HeckeTable,
    factors: &FactorTable,
    x: u64,
    y: f64,
) -> Result<Vec<(u64, Complex64)>> {
    check_sizes(table, factors, x)?;
    let f = f_values(s, factors, x as usize);
    // Prefix sums of the smooth terms.
    let mut prefix = vec![Complex64::new(0.0, 0.0); x as usize + 1];
    for m in 1..=x as usize {
        let smooth = m == 1 || (factors.largest_prime_factor(m as u64) as f64) <= y;
        let term = if smooth {
            f[m].ok_or_else(|| Error::domain(format!("smooth m = {m} not covered by the sample")))? * table.lambda(m as u64)
        } else {
            Complex64::new(0.0, 0.0)
        };
        prefix[m] = prefix[m - 1] + term;
    }
    Ok((1..=x)
        .filter(|&r| r == 1 || (factors.smallest_prime_factor(r) as f64) > y)
        .map(|r| (r, prefix[(x / r) as usize]))
        .collect())
}

/// Σ_{n ≤ x} f(n)λ(n) regrouped as Σ_{P⁻(r) > y} f(r)λ(r) c_r.
pub fn split_partial_sum(
    s: &SteinhausSample,
    table: &HeckeTable,
    factors: &FactorTable,
    x: u64,
    y: f64,
) -> Result<Complex64> {
    let cof = smooth_cofactors(s, table, factors, x, y)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (r, c) in cof {
        let fr = if r == 1 { Complex64::new(1.0, 0.0) } else { f_value(s, r)? };
        acc += fr * table.lambda(r) * c;
    }
    Ok(acc)
}

/// E^{(y)} |Σ_{n ≤ x} f(n)λ(n)|² = Σ_{P⁻(r) > y} |λ(r) c_r|², exact given the
/// phases p ≤ y.
pub fn conditional_second_moment(
    s: &SteinhausSample,
    table: &HeckeTable,
    factors: &FactorTable,
    x: u64,
    y: f64,
) -> Result<f64> {
    Ok(smooth_cofactors(s, table, factors, x, y)?
        .iter()
        .map(|&(r, c)| (table.lambda(r) * c.norm()).powi(2))
        .sum())
}

/// F_y(s) = ∏_{p ≤ y} |1 - α_p f(p) p^{-s}|^{-1} |1 - β_p f(p) p^{-s}|^{-1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomEulerProduct {
    pub s: Complex64,
    pub y: f64,
    pub value: f64,
    pub log_value: f64,
}

/// Local factors closer to singular than this are rejected.
const SINGULAR_TOL: f64 = 1e-12;

pub fn euler_product_f(s: &SteinhausSample, table: &HeckeTable, point: Complex64, y: f64) -> Result<RandomEulerProduct> {
    if point.re < 0.5 {
        return Err(Error::domain(format!("Re s = {} must be ≥ 1/2", point.re)));
    }
    let mut log_value = 0.0;
    for (&p, &fp) in s.primes.iter().zip(&s.phases).take_while(|(&p, _)| p as f64 <= y) {
        let z = fp * Complex64::new(p as f64, 0.0).powc(-point);
        let sp = table.satake(p)?;
        let (u, v) = ((1.0 - sp.alpha * z).norm(), (1.0 - sp.beta * z).norm());
        if u < SINGULAR_TOL || v < SINGULAR_TOL {
            return Err(Error::Singular { prime: p });
        }
        log_value -= u.ln() + v.ln();
    }
    if y.floor() > s.y {
        return Err(Error::domain(format!("sample covers primes ≤ {} only, F requested to {y}", s.y)));
    }
    Ok(RandomEulerProduct { s: point, y, value: log_value.exp(), log_value })
}

/// log F_y(s) against its two-term expansion Σ_p Re(λ(p)z + (λ(p²)-1)z²/2),
/// z = f(p)p^{-s}, and the envelope Σ_p (2/3)|z|³/(1 - |z|) on the difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionCheck {
    pub log_f: f64,
    pub two_term: f64,
    pub difference: f64,
    pub envelope: f64,
}

pub fn euler_expansion_check(s: &SteinhausSample, table: &HeckeTable, point: Complex64, y: f64) -> Result<ExpansionCheck> {
    let f = euler_product_f(s, table, point, y)?;
    let primes = &s.primes[..s.primes.partition_point(|&p| p as f64 <= y)];
    let mut two_term = 0.0;
    let mut envelope = 0.0;
    for &p in primes {
        let z = s.at_prime(p) * Complex64::new(p as f64, 0.0).powc(-point);
        two_term += (table.lambda(p) * z + (table.lambda_prime_square(p) - 1.0) * z * z / 2.0).re;
        let r = z.norm();
        envelope += 2.0 / 3.0 * r.powi(3) / (1.0 - r);
    }
    Ok(ExpansionCheck { log_f: f.log_value, two_term, difference: f.log_value - two_term, envelope })
}

/// E = E E^{(y)} on a toy system: Q(f) = |Σ_{n ≤ x, P⁺(n) ≤ y_top} f(n)λ(n)|²,
/// conditioned on the primes ≤ `cut`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TowerReport {
    /// Plain Monte Carlo of E Q.
    pub plain: MeanEstimate,
    /// Outer average of inner Monte Carlo estimates of E^{(cut)} Q.
    pub nested: MeanEstimate,
    /// Outer average of the exact conditional expectations.
    pub conditional_exact: MeanEstimate,
    /// Σ λ(n)² over the admitted n: the exact E Q.
    pub exact: f64,
    /// |plain - nested| in combined standard errors.
    pub z_plain_nested: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn tower_check(
    table: &HeckeTable,
    factors: &FactorTable,
    list: &PrimeList,
    x: u64,
    y_top: f64,
    cut: f64,
    outer: usize,
    inner: usize,
    seed: u64,
) -> Result<TowerReport> {
    check_sizes(table, factors, x)?;
    let variant = SumVariant::Smooth { y: y_top };
    let q = |s: &SteinhausSample| twisted_partial_sum(s, table, factors, x, variant).map(|v| v.norm_sqr());
    let plain: Vec<f64> = (0..outer as u64)
        .into_par_iter()
        .map(|d| q(&sample(list, y_top, seed, d)?))
        .collect::<Result<_>>()?;
    let rows: Vec<(f64, f64)> = (0..outer as u64)
        .into_par_iter()
        .map(|d| {
            // The outer stream is disjoint from the plain one.
            let base = sample(list, y_top, seed.wrapping_add(1), d)?;
            let mut acc = 0.0;
            for i in 0..inner as u64 {
                acc += q(&base.resample_above(list, cut, d * inner as u64 + i))?;
            }
            let exact = conditional_on_smooth(&base, table, factors, x, y_top, cut);
            Ok((acc / inner as f64, exact))
        })
        .collect::<Result<_>>()?;
    let plain = MeanEstimate::from_values(&plain);
    let nested = MeanEstimate::from_values(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let conditional_exact = MeanEstimate::from_values(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let exact = (1..=x)
        .filter(|&n| n == 1 || factors.largest_prime_factor(n) as f64 <= y_top)
        .map(|n| table.lambda(n).powi(2))
        .sum();
    let combined = (plain.std_error.powi(2) + nested.std_error.powi(2)).sqrt();
    Ok(TowerReport {
        plain,
        nested,
        conditional_exact,
        exact,
        z_plain_nested: (plain.mean - nested.mean).abs() / combined,
    })
}

/// E^{(cut)} of |Σ_{n ≤ x, P⁺(n) ≤ y_top} f(n)λ(n)|²: split n = r·m with
/// m cut-smooth and r built from primes in (cut, y_top]; orthogonality in r.
fn conditional_on_smooth(s: &SteinhausSample, table: &HeckeTable, factors: &FactorTable, x: u64, y_top: f64, cut: f64) -> f64 {
    let f = f_values(s, factors, x as usize);
    let mut prefix = vec![Complex64::new(0.0, 0.0); x as usize + 1];
    for m in 1..=x as usize {
        let smooth = m == 1 || factors.largest_prime_factor(m as u64) as f64 <= cut;
        let term = if smooth { f[m].expect("covered") * table.lambda(m as u64) } else { Complex64::new(0.0, 0.0) };
        prefix[m] = prefix[m - 1] + term;
    }
    (1..=x)
        .filter(|&r| {
            r == 1 || {
                let (lo, hi) = (factors.smallest_prime_factor(r) as f64, factors.largest_prime_factor(r) as f64);
                lo > cut && hi <= y_top
            }
        })
        .map(|r| (table.lambda(r) * prefix[(x / r) as usize].norm()).powi(2))
        .sum()
}

/// Monte Carlo of E f(n) conj f(m) for each pair.
pub fn correlation_check(list: &PrimeList, pairs: &[(u64, u64)], samples: usize, seed: u64) -> Result<Vec<Complex64>> {
    let y = pairs.iter().flat_map(|&(a, b)| [a, b]).flat_map(factor_exponents).map(|(p, _)| p).max().unwrap_or(2) as f64;
    let draws: Vec<SteinhausSample> =
        (0..samples as u64).into_par_iter().map(|d| sample(list, y, seed, d)).collect::<Result<_>>()?;
    pairs
        .iter()
        .map(|&(a, b)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in &draws {
                acc += f_value(s, a)? * f_value(s, b)?.conj();
            }
            Ok(acc / samples as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve;
    use std::sync::OnceLock;

    fn table() -> &'static HeckeTable {
        static T: OnceLock<HeckeTable> = OnceLock::new();
        T.get_or_init(|| HeckeTable::build(2000).unwrap())
    }

    fn list() -> PrimeList {
        sieve(2000).unwrap()
    }

    #[test]
    fn deterministic_and_order_free() {
        let l = list();
        let a = sample(&l, 100.0, 7, 3).unwrap();
        let b = sample(&l, 100.0, 7, 3).unwrap();
        assert_eq!(a, b);
        let part = sample_range(&l, 40.0, 100.0, 7, 3).unwrap();
        for &p in part.primes() {
            assert_eq!(part.phase(p), a.phase(p));
        }
        assert_ne!(sample(&l, 100.0, 8, 3).unwrap().phase(2), a.phase(2));
        assert!(a.phases().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn phases_are_centred() {
        let l = list();
        let n = 100_000;
        let src = PhaseSource::new(11);
        let (mut m1, mut m2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for d in 0..n {
            let z = src.phases(d, 0, 1)[0];
            m1 += z;
            m2 += z * z;
        }
        let bound = 3.0 / (n as f64).sqrt();
        assert!((m1 / n as f64).norm() < bound && (m2 / n as f64).norm() < bound);
        assert!(l.len() > 0);
    }

    #[test]
    fn complete_multiplicativity() {
        let l = list();
        let s = sample(&l, 50.0, 1, 0).unwrap();
        assert_eq!(f_value(&s, 1).unwrap(), Complex64::new(1.0, 0.0));
        let f12 = f_value(&s, 12).unwrap();
        let want = s.at_prime(2).powu(2) * s.at_prime(3);
        assert!((f12 - want).norm() < 1e-15);
        for n in (1..=200u64).step_by(7) {
            if factor_exponents(n).iter().all(|&(p, _)| p <= 50) {
                assert!((f_value(&s, n).unwrap().norm() - 1.0).abs() < 1e-12);
            }
        }
        assert!(f_value(&s, 53).is_err());
    }

    #[test]
    fn partial_sums_and_regrouping() {
        let l = list();
        let factors = FactorTable::new(2000).unwrap();
        for d in 0..20 {
            let s = sample(&l, 50.0, 5, d).unwrap();
            let one = twisted_partial_sum(&s, table(), &factors, 1, SumVariant::Full).unwrap();
            assert_eq!(one, Complex64::new(1.0, 0.0));
            let full = twisted_partial_sum(&s, table(), &factors, 50, SumVariant::Full).unwrap();
            let split = split_partial_sum(&s, table(), &factors, 50, 7.0).unwrap();
            assert!((full - split).norm() < 1e-12, "{full} vs {split}");
        }
        let s = sample(&l, 7.0, 5, 0).unwrap();
        assert!(twisted_partial_sum(&s, table(), &factors, 50, SumVariant::Full).is_err());
        assert!(twisted_partial_sum(&s, table(), &factors, 50, SumVariant::Smooth { y: 7.0 }).is_ok());
    }

    #[test]
    fn second_moment_is_diagonal() {
        let l = list();
        let factors = FactorTable::new(2000).unwrap();
        let x = 30;
        let vals: Vec<f64> = (0..10_000)
            .map(|d| twisted_partial_sum(&sample(&l, 30.0, 17, d).unwrap(), table(), &factors, x, SumVariant::Full).unwrap().norm_sqr())
            .collect();
        let est = MeanEstimate::from_values(&vals);
        let diag: f64 = (1..=x).map(|n| table().lambda(n).powi(2)).sum();
        assert!(est.z_score(diag) < 5.0, "{est:?} vs {diag}");
    }

    #[test]
    fn off_diagonal_correlations_vanish() {
        let l = list();
        let n = 20_000;
        let pairs: Vec<(u64, u64)> = (0..100u64).map(|i| (2 + i % 23, 3 + (i * 7) % 29)).filter(|(a, b)| a != b).collect();
        let corr = correlation_check(&l, &pairs, n, 3).unwrap();
        let bound = 3.0 / (n as f64).sqrt();
        assert!(corr.iter().all(|c| c.norm() < 1.5 * bound), "{:?}", corr.iter().map(|c| c.norm()).fold(0.0, f64::max));
        let diag = correlation_check(&l, &[(6, 6)], 10, 3).unwrap();
        assert!((diag[0] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn euler_product_basics() {
        let l = list();
        let s = sample(&l, 100.0, 2, 0).unwrap();
        let empty = euler_product_f(&s, table(), Complex64::new(0.5, 0.0), 1.5).unwrap();
        assert_eq!(empty.value, 1.0);
        assert!(euler_product_f(&s, table(), Complex64::new(0.4, 0.0), 10.0).is_err());
        // f(2) = 1 through a hand-made sample.
        let mut one = sample(&l, 2.0, 0, 0).unwrap();
        one.phases[0] = Complex64::new(1.0, 0.0);
        let v = euler_product_f(&one, table(), Complex64::new(1.0, 0.0), 2.0).unwrap().value;
        let want = 1.0 / (1.0 - table().lambda(2) / 2.0 + 0.25).abs();
        assert!((v - want).abs() < 1e-14 * want);
    }

    #[test]
    fn two_term_expansion_within_envelope() {
        let l = list();
        for d in 0..50 {
            let s = sample(&l, 1000.0, 9, d).unwrap();
            for beta in [0.0, 0.1, 0.5] {
                let c = euler_expansion_check(&s, table(), Complex64::new(0.5 + beta, 3.0), 1000.0).unwrap();
                assert!(c.difference.abs() <= c.envelope, "{c:?}");
            }
        }
    }

    #[test]
    fn tower_rule() {
        let l = list();
        let factors = FactorTable::new(2000).unwrap();
        let r = tower_check(table(), &factors, &l, 40, 3.0, 2.0, 2000, 20, 4).unwrap();
        assert!(r.z_plain_nested < 3.0, "{r:?}");
        assert!(r.conditional_exact.z_score(r.exact) < 4.0, "{r:?}");
        assert!(r.plain.z_score(r.exact) < 4.0, "{r:?}");
    }
}
