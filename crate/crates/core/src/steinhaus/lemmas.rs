//! Oracles for the three mean-value statements about Steinhaus f:
//! the random Euler product expectation, the even-moment bound and the
//! Parseval identity for Dirichlet series.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hecke::{factor_exponents, HeckeTable};
use crate::numeric::{pairwise_sum, MeanEstimate};
use crate::primes::PrimeList;
use crate::quadrature::{gauss_kronrod, periodic_mean};

use super::PhaseSource;

/// Parameters of E ∏_{z ≤ p ≤ y} |1 - α_p f(p)/p^{s₁}|^{-2a} |1 - β_p f(p)/p^{s₁}|^{-2a}
/// × |1 - α_p f(p)/p^{s₂}|^{-2b} |1 - β_p f(p)/p^{s₂}|^{-2b}, s_i = 1/2 + σ_i + it_i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerCase {
    pub a: f64,
    pub b: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub t1: f64,
    pub t2: f64,
    pub z: f64,
    pub y: f64,
}

impl EulerCase {
    fn validate(&self) -> Result<()> {
        let need = 100.0 * (1.0 + (self.a * self.a).max(self.b * self.b));
        if !(self.a >= 0.0 && self.b >= 0.0 && self.sigma1 >= 0.0 && self.sigma2 >= 0.0) {
            return Err(Error::domain("exponents and shifts must be non-negative"));
        }
        if self.z < need {
            return Err(Error::precondition(format!("z = {} is below 100(1 + max(a², b²)) = {need}", self.z)));
        }
        if self.z >= self.y {
            return Err(Error::precondition(format!("need z < y, got z = {}, y = {}", self.z, self.y)));
        }
        Ok(())
    }

    /// Main-term exponent Σ_p [a²λ²/p^{1+2σ₁} + b²λ²/p^{1+2σ₂} + 2abλ² cos((t₂-t₁) log p)/p^{1+σ₁+σ₂}].
    fn main_term(&self, table: &HeckeTable, primes: &[u64]) -> f64 {
        let terms: Vec<f64> = primes
            .iter()
            .map(|&p| {
                let (pf, l2) = (p as f64, table.lambda(p).powi(2));
                let lp = pf.ln();
                self.a * self.a * l2 / pf.powf(1.0 + 2.0 * self.sigma1)
                    + self.b * self.b * l2 / pf.powf(1.0 + 2.0 * self.sigma2)
                    + 2.0 * self.a * self.b * l2 * ((self.t2 - self.t1) * lp).cos() / pf.powf(1.0 + self.sigma1 + self.sigma2)
            })
            .collect();
        pairwise_sum(&terms)
    }
}

/// The local factor at p as a function of f(p) = e^{iθ}.
#[derive(Debug, Clone, Copy)]
struct LocalFactor {
    lambda: f64,
    w1: Complex64,
    w2: Complex64,
    a: f64,
    b: f64,
}

impl LocalFactor {
    fn new(c: &EulerCase, table: &HeckeTable, p: u64) -> Self {
        let pf = Complex64::new(p as f64, 0.0);
        LocalFactor {
            lambda: table.lambda(p),
            w1: pf.powc(-Complex64::new(0.5 + c.sigma1, c.t1)),
            w2: pf.powc(-Complex64::new(0.5 + c.sigma2, c.t2)),
            a: c.a,
            b: c.b,
        }
    }

    /// (1 - αu)(1 - βu) = 1 - λu + u², so each pair of moduli is one quadratic.
    #[inline]
    fn log_value(&self, phase: Complex64) -> f64 {
        let quad = |w: Complex64| {
            let u = phase * w;
            (1.0 - self.lambda * u + u * u).norm_sqr()
        };
        let mut v = 0.0;
        if self.a != 0.0 {
            v -= self.a * quad(self.w1).ln();
        }
        if self.b != 0.0 {
            v -= self.b * quad(self.w2).ln();
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerExpectation {
    pub case: EulerCase,
    /// Main-term exponent over z ≤ p ≤ y, the range of the product.
    pub closed_form_log: f64,
    /// The main-term exponent from the small primes p < z, which the lemma's
    /// Σ_{p ≤ y} also contains; reported separately.
    pub small_prime_log: f64,
    /// log of ∏_p (1/2π)∫ local factor dθ: the exact expectation.
    pub quadrature_log: f64,
    /// Largest per-prime quadrature error estimate, relative.
    pub quadrature_error: f64,
    pub primes: usize,
    /// |closed_form_log - quadrature_log| · √z.
    pub scaled_gap: f64,
}

pub fn expected_euler_product(table: &HeckeTable, list: &PrimeList, case: EulerCase) -> Result<EulerExpectation> {
    case.validate()?;
    if (list.bound() as f64) < case.y.floor() || (table.limit() as f64) < case.y.floor() {
        return Err(Error::precondition(format!("tables do not reach y = {}", case.y)));
    }
    let primes: Vec<u64> = list.up_to(case.y).iter().copied().filter(|&p| p as f64 >= case.z).collect();
    let small: Vec<u64> = list.up_to(case.y).iter().copied().filter(|&p| (p as f64) < case.z).collect();
    let closed_form_log = case.main_term(table, &primes);
    let small_prime_log = case.main_term(table, &small);
    let per_prime: Vec<(f64, f64)> = primes
        .iter()
        .map(|&p| {
            let lf = LocalFactor::new(&case, table, p);
            let q = periodic_mean(|t| lf.log_value(Complex64::from_polar(1.0, t)).exp(), 1e-15, 1 << 14)?;
            Ok((q.value.ln(), q.error_estimate / q.value))
        })
        .collect::<Result<_>>()?;
    let quadrature_log = pairwise_sum(&per_prime.iter().map(|v| v.0).collect::<Vec<_>>());
    let quadrature_error = per_prime.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(EulerExpectation {
        case,
        closed_form_log,
        small_prime_log,
        quadrature_log,
        quadrature_error,
        primes: primes.len(),
        scaled_gap: (closed_form_log - quadrature_log).abs() * case.z.sqrt(),
    })
}

/// Monte Carlo of the product over `samples` independent draws.
pub fn euler_product_mc(table: &HeckeTable, list: &PrimeList, case: EulerCase, samples: usize, seed: u64) -> Result<MeanEstimate> {
    case.validate()?;
    let primes: Vec<u64> = list.up_to(case.y).iter().copied().filter(|&p| p as f64 >= case.z).collect();
    let first_rank = list.primes().partition_point(|&p| (p as f64) < case.z);
    let factors: Vec<LocalFactor> = primes.iter().map(|&p| LocalFactor::new(&case, table, p)).collect();
    let src = PhaseSource::new(seed);
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|d| {
            let phases = src.phases(d, first_rank, factors.len());
            factors.iter().zip(&phases).map(|(lf, &ph)| lf.log_value(ph)).sum::<f64>().exp()
        })
        .collect();
    Ok(MeanEstimate::from_values(&values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerBatteryRow {
    pub expectation: EulerExpectation,
    pub monte_carlo: MeanEstimate,
    /// |MC - exp(quadrature_log)| in standard errors.
    pub mc_z: f64,
    /// |closed_form_log - quadrature_log| ≤ 50/√z.
    pub closed_form_ok: bool,
    pub mc_ok: bool,
}

/// The fixed ten-case battery: a, b ∈ {0, 1, 2}, σ ∈ {0, 0.1}, t₂ - t₁ ∈ {0, 0.5}.
/// z = 200 unless max(a, b) = 2, where the precondition forces z ≥ 500.
pub fn euler_battery_cases(y: f64) -> Vec<EulerCase> {
    let raw: [(f64, f64, f64, f64, f64); 10] = [
        (1.0, 0.0, 0.0, 0.0, 0.0),
        (1.0, 0.0, 0.1, 0.0, 0.0),
        (0.0, 1.0, 0.0, 0.1, 0.0),
        (1.0, 1.0, 0.0, 0.0, 0.0),
        (1.0, 1.0, 0.0, 0.0, 0.5),
        (1.0, 1.0, 0.1, 0.1, 0.5),
        (2.0, 0.0, 0.1, 0.0, 0.0),
        (0.0, 2.0, 0.0, 0.0, 0.0),
        (2.0, 1.0, 0.0, 0.1, 0.5),
        (2.0, 2.0, 0.1, 0.1, 0.0),
    ];
    raw.iter()
        .map(|&(a, b, sigma1, sigma2, dt)| EulerCase {
            a,
            b,
            sigma1,
            sigma2,
            t1: 0.0,
            t2: dt,
            z: if a.max(b) > 1.0 { 500.0 } else { 200.0 },
            y,
        })
        .collect()
}

pub fn euler_product_battery(
    table: &HeckeTable,
    list: &PrimeList,
    cases: &[EulerCase],
    samples: usize,
    seed: u64,
) -> Result<Vec<EulerBatteryRow>> {
    cases
        .iter()
        .enumerate()
        .map(|(i, &case)| {
            let expectation = expected_euler_product(table, list, case)?;
            let monte_carlo = euler_product_mc(table, list, case, samples, seed.wrapping_add(i as u64))?;
            let mc_z = monte_carlo.z_score(expectation.quadrature_log.exp());
            Ok(EulerBatteryRow {
                expectation,
                monte_carlo,
                mc_z,
                closed_form_ok: expectation.scaled_gap <= 50.0,
                mc_ok: mc_z <= 3.0,
            })
        })
        .collect()
}

/// Input of the even-moment bound E|Σ c_n f(n)|² |Σ_{p ∈ P} a_p f(p)/√p + a_{p²} f(p)²/p|^{2j}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvenMomentCase {
    /// (n, c_n).
    pub c: Vec<(u64, Complex64)>,
    /// (p, a_p, a_{p²}) for p ∈ P.
    pub a: Vec<(u64, Complex64, Complex64)>,
    pub j: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvenMomentReport {
    pub j: u32,
    /// The expectation by exact expansion: Σ_m |C_m|² where Σ c_n f(n) · B^j = Σ C_m f(m).
    pub exact: f64,
    pub monte_carlo: MeanEstimate,
    /// (Σ d̃(n)|c_n|²) · j! · (Σ_p 2|a_p|²/p + 6|a_{p²}|²/p²)^j.
    pub bound: f64,
    pub ratio_exact: f64,
    pub ratio_mc: f64,
    pub ratio_mc_std_error: f64,
}

impl EvenMomentCase {
    fn validate(&self) -> Result<()> {
        if self.c.iter().any(|&(n, _)| n == 0) {
            return Err(Error::domain("c_n indices start at 1"));
        }
        if self.a.iter().any(|&(p, _, _)| !crate::primes::is_prime_trial(p)) {
            return Err(Error::domain("P must consist of primes"));
        }
        Ok(())
    }

    fn d_tilde(&self, n: u64) -> f64 {
        factor_exponents(n)
            .iter()
            .filter(|(p, _)| self.a.iter().any(|&(q, _, _)| q == *p))
            .map(|&(_, e)| (e + 1) as f64)
            .product()
    }

    pub fn bound(&self) -> f64 {
        let left: f64 = self.c.iter().map(|&(n, c)| self.d_tilde(n) * c.norm_sqr()).sum();
        let base: f64 = self
            .a
            .iter()
            .map(|&(p, ap, ap2)| {
                let p = p as f64;
                2.0 * ap.norm_sqr() / p + 6.0 * ap2.norm_sqr() / (p * p)
            })
            .sum();
        let fact: f64 = (1..=self.j).map(|i| i as f64).product();
        left * fact * base.powi(self.j as i32)
    }

    /// Exact E via orthogonality: expand A·B^j over integers (f completely
    /// multiplicative) and sum |coefficient|².
    pub fn exact(&self) -> f64 {
        let mut poly: HashMap<u128, Complex64> = HashMap::new();
        for &(n, c) in &self.c {
            *poly.entry(n as u128).or_default() += c;
        }
        let b: Vec<(u128, Complex64)> = self
            .a
            .iter()
            .flat_map(|&(p, ap, ap2)| {
                let pf = p as f64;
                [(p as u128, ap / pf.sqrt()), ((p * p) as u128, ap2 / pf)]
            })
            .collect();
        for _ in 0..self.j {
            let mut next: HashMap<u128, Complex64> = HashMap::with_capacity(poly.len() * b.len());
            for (&m, &cm) in &poly {
                for &(d, cd) in &b {
                    *next.entry(m * d).or_default() += cm * cd;
                }
            }
            poly = next;
        }
        let mut keys: Vec<u128> = poly.keys().copied().collect();
        keys.sort_unstable();
        pairwise_sum(&keys.iter().map(|k| poly[k].norm_sqr()).collect::<Vec<_>>())
    }
}

pub fn even_moment_check(list: &PrimeList, case: &EvenMomentCase, samples: usize, seed: u64) -> Result<EvenMomentReport> {
    case.validate()?;
    let y = case
        .c
        .iter()
        .flat_map(|&(n, _)| factor_exponents(n))
        .map(|(p, _)| p)
        .chain(case.a.iter().map(|&(p, _, _)| p))
        .max()
        .unwrap_or(2);
    let c_factored: Vec<(Vec<(u64, u32)>, Complex64)> = case.c.iter().map(|&(n, c)| (factor_exponents(n), c)).collect();
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|d| {
            let s = super::sample(list, y as f64, seed, d)?;
            let a_sum: Complex64 = c_factored
                .iter()
                .map(|(fac, c)| fac.iter().fold(*c, |acc, &(p, e)| acc * s.phase(p).expect("covered").powu(e)))
                .sum();
            let b_sum: Complex64 = case
                .a
                .iter()
                .map(|&(p, ap, ap2)| {
                    let f = s.phase(p).expect("covered");
                    let pf = p as f64;
                    ap * f / pf.sqrt() + ap2 * f * f / pf
                })
                .sum();
            Ok(a_sum.norm_sqr() * b_sum.norm_sqr().powi(case.j as i32))
        })
        .collect::<Result<_>>()?;
    let monte_carlo = MeanEstimate::from_values(&values);
    let bound = case.bound();
    Ok(EvenMomentReport {
        j: case.j,
        exact: case.exact(),
        monte_carlo,
        bound,
        ratio_exact: case.exact() / bound,
        ratio_mc: monte_carlo.mean / bound,
        ratio_mc_std_error: monte_carlo.std_error / bound,
    })
}

/// A reproducible randomized battery: per case, c_n on n ≤ 30 with a random
/// sparse support, a random prime set P ⊂ {p ≤ 30}, coefficients in the unit
/// disc, and j cycling through 0..=max_j.
pub fn even_moment_battery(cases: usize, max_j: u32, seed: u64) -> Vec<EvenMomentCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let small_primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29];
    let disc = |rng: &mut ChaCha8Rng| {
        let r = rng.gen::<f64>().sqrt();
        Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
    };
    (0..cases)
        .map(|i| {
            let mut c: Vec<(u64, Complex64)> = Vec::new();
            for n in 1..=30u64 {
                if rng.gen_bool(0.4) {
                    c.push((n, disc(&mut rng)));
                }
            }
            let c = if c.is_empty() { vec![(1, Complex64::new(1.0, 0.0))] } else { c };
            let size = rng.gen_range(1..=5);
            let mut ps: Vec<u64> = small_primes.to_vec();
            for idx in (1..ps.len()).rev() {
                ps.swap(idx, rng.gen_range(0..=idx));
            }
            let mut chosen: Vec<u64> = ps[..size].to_vec();
            chosen.sort_unstable();
            let a = chosen.into_iter().map(|p| (p, disc(&mut rng), disc(&mut rng))).collect();
            EvenMomentCase { c, a, j: (i as u32) % (max_j + 1) }
        })
        .collect()
}

/// Both sides of ∫₁^∞ |Σ_{n ≤ x} a_n|² x^{-1-2σ} dx = (1/2π)∫ |F(σ+it)|²/|σ+it|² dt
/// for finitely supported a.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParsevalReport {
    pub sigma: f64,
    /// The full left side, exact (piecewise-constant partial sums).
    pub lhs: f64,
    /// The left side cut at x_max.
    pub lhs_truncated: f64,
    /// Adaptive quadrature over |t| ≤ t_max.
    pub rhs_core: f64,
    pub rhs_quadrature_error: f64,
    /// Mean-value estimate of |t| > t_max: Σ|a_n|²n^{-2σ}/(π t_max).
    pub rhs_tail_estimate: f64,
    /// Rigorous bound on |t| > t_max: (Σ|a_n|n^{-σ})²/(π t_max).
    pub rhs_tail_bound: f64,
    pub rhs: f64,
    pub relative_difference: f64,
}

pub fn parseval_check(coeffs: &[(u64, Complex64)], sigma: f64, x_max: f64, t_max: f64) -> Result<ParsevalReport> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("σ = {sigma} must be positive")));
    }
    if coeffs.iter().any(|&(n, _)| n == 0) || coeffs.is_empty() {
        return Err(Error::domain("coefficients must be supported on n ≥ 1 and non-empty"));
    }
    if !(x_max >= 1.0 && t_max > 0.0) {
        return Err(Error::domain("need x_max ≥ 1 and t_max > 0"));
    }
    let mut terms: Vec<(u64, Complex64)> = coeffs.to_vec();
    terms.sort_by_key(|t| t.0);
    // Partial sums jump at each n; between jumps ∫ x^{-1-2σ} = (u^{-2σ} - v^{-2σ})/(2σ).
    let piece = |u: f64, v: f64| (u.powf(-2.0 * sigma) - v.powf(-2.0 * sigma)) / (2.0 * sigma);
    let mut lhs = 0.0;
    let mut lhs_truncated = 0.0;
    let mut partial = Complex64::new(0.0, 0.0);
    for (i, &(n, a)) in terms.iter().enumerate() {
        partial += a;
        let start = n as f64;
        let end = terms.get(i + 1).map_or(f64::INFINITY, |t| t.0 as f64);
        if i + 1 < terms.len() && terms[i + 1].0 == n {
            continue;
        }
        let w = partial.norm_sqr();
        lhs += w * if end.is_finite() { piece(start, end) } else { start.powf(-2.0 * sigma) / (2.0 * sigma) };
        if start < x_max {
            lhs_truncated += w * piece(start, end.min(x_max));
        }
    }

    let logs: Vec<(f64, Complex64)> =
        terms.iter().map(|&(n, a)| ((n as f64).ln(), a * (n as f64).powf(-sigma))).collect();
    let integrand = |t: f64| {
        let f: Complex64 = logs.iter().map(|&(l, c)| c * Complex64::from_polar(1.0, -t * l)).sum();
        f.norm_sqr() / (sigma * sigma + t * t) / (2.0 * PI)
    };
    let max_log = logs.iter().map(|v| v.0).fold(0.0, f64::max);
    let panels = ((2.0 * t_max * (max_log + 1.0) / PI).ceil() as usize).clamp(8, 1 << 16);
    let core = gauss_kronrod(integrand, -t_max, t_max, panels, 1e-12, 1e-11, 1 << 20)?;
    let mean_square: f64 = logs.iter().map(|v| v.1.norm_sqr()).sum();
    let abs_sum: f64 = logs.iter().map(|v| v.1.norm()).sum();
    let rhs_tail_estimate = mean_square / (PI * t_max);
    let rhs = core.value + rhs_tail_estimate;
    Ok(ParsevalReport {
        sigma,
        lhs,
        lhs_truncated,
        rhs_core: core.value,
        rhs_quadrature_error: core.error_estimate,
        rhs_tail_estimate,
        rhs_tail_bound: abs_sum * abs_sum / (PI * t_max),
        rhs,
        relative_difference: (lhs - rhs).abs() / lhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve;
    use std::sync::OnceLock;

    fn table() -> &'static HeckeTable {
        static T: OnceLock<HeckeTable> = OnceLock::new();
        T.get_or_init(|| HeckeTable::build(10_000).unwrap())
    }

    fn list() -> &'static PrimeList {
        static L: OnceLock<PrimeList> = OnceLock::new();
        L.get_or_init(|| sieve(10_000).unwrap())
    }

    fn case(a: f64, b: f64, sigma: f64, dt: f64, z: f64, y: f64) -> EulerCase {
        EulerCase { a, b, sigma1: sigma, sigma2: sigma, t1: 0.0, t2: dt, z, y }
    }

    #[test]
    fn empty_exponents() {
        let r = expected_euler_product(table(), list(), case(0.0, 0.0, 0.0, 0.0, 200.0, 1000.0)).unwrap();
        assert_eq!(r.closed_form_log, 0.0);
        assert!(r.quadrature_log.abs() < 1e-15);
    }

    #[test]
    fn precondition() {
        assert!(expected_euler_product(table(), list(), case(2.0, 0.0, 0.0, 0.0, 200.0, 1000.0)).is_err());
        assert!(expected_euler_product(table(), list(), case(1.0, 0.0, 0.0, 0.0, 2000.0, 1000.0)).is_err());
    }

    #[test]
    fn closed_form_tracks_quadrature() {
        let r = expected_euler_product(table(), list(), case(1.0, 0.0, 0.1, 0.0, 200.0, 10_000.0)).unwrap();
        assert!(r.scaled_gap < 50.0, "{r:?}");
        assert!(r.quadrature_error < 1e-12);
        assert!(r.small_prime_log > 0.0);
    }

    #[test]
    fn monte_carlo_tracks_quadrature() {
        let c = case(1.0, 1.0, 0.0, 0.5, 200.0, 2000.0);
        let r = expected_euler_product(table(), list(), c).unwrap();
        let mc = euler_product_mc(table(), list(), c, 20_000, 3).unwrap();
        assert!(mc.z_score(r.quadrature_log.exp()) < 3.5, "{mc:?} vs {}", r.quadrature_log.exp());
    }

    #[test]
    fn even_moment_zero_j_is_orthogonality() {
        let c = EvenMomentCase {
            c: vec![(1, Complex64::new(1.0, 0.0)), (6, Complex64::new(0.0, 2.0)), (9, Complex64::new(-1.0, 1.0))],
            a: vec![(3, Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0))],
            j: 0,
        };
        assert!((c.exact() - 7.0).abs() < 1e-12);
        // d̃(6) = 2, d̃(9) = 3 with P = {3}.
        assert!((c.bound() - (1.0 + 2.0 * 4.0 + 3.0 * 2.0)).abs() < 1e-12);
        let r = even_moment_check(list(), &c, 20_000, 1).unwrap();
        assert!(r.monte_carlo.z_score(7.0) < 4.0, "{r:?}");
        assert!(r.ratio_mc <= 1.0 + 4.0 * r.ratio_mc_std_error);
    }

    #[test]
    fn even_moment_pure_prime_sum() {
        // c = δ₁, |P| = 2: exact expansion against Monte Carlo, j! growth.
        let a = vec![(2, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)), (3, Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.0))];
        let mut prev = 0.0;
        for j in 0..=4 {
            let c = EvenMomentCase { c: vec![(1, Complex64::new(1.0, 0.0))], a: a.clone(), j };
            let r = even_moment_check(list(), &c, 40_000, 5).unwrap();
            assert!(r.monte_carlo.z_score(r.exact) < 4.0, "j = {j}: {r:?}");
            assert!(r.ratio_exact <= 1.0);
            if j > 0 {
                assert!(r.exact > prev * 0.5);
            }
            prev = r.exact;
        }
    }

    #[test]
    fn exact_expansion_by_brute_force() {
        // E over a finite torus of phases is exact for low-degree polynomials.
        let c = EvenMomentCase {
            c: vec![(1, Complex64::new(0.5, 0.0)), (2, Complex64::new(1.0, -1.0))],
            a: vec![(2, Complex64::new(0.7, 0.2), Complex64::new(-0.4, 0.0)), (3, Complex64::new(0.1, 0.9), Complex64::new(0.0, 0.6))],
            j: 2,
        };
        let grid = 16;
        let mut acc = 0.0;
        for i in 0..grid {
            for k in 0..grid {
                let f2 = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / grid as f64);
                let f3 = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / grid as f64);
                let a_sum = c.c[0].1 + c.c[1].1 * f2;
                let b_sum: Complex64 = [(2.0, f2, c.a[0]), (3.0, f3, c.a[1])]
                    .iter()
                    .map(|&(p, f, (_, ap, ap2))| ap * f / f64::sqrt(p) + ap2 * f * f / p)
                    .sum();
                acc += a_sum.norm_sqr() * b_sum.norm_sqr().powi(2);
            }
        }
        let brute = acc / (grid * grid) as f64;
        assert!((brute - c.exact()).abs() < 1e-12 * brute);
    }

    #[test]
    fn battery_is_reproducible() {
        let a = even_moment_battery(8, 3, 42);
        assert_eq!(a, even_moment_battery(8, 3, 42));
        assert!(a.iter().all(|c| c.j <= 3 && !c.a.is_empty()));
    }

    #[test]
    fn parseval_delta_and_telescoping() {
        let one = [(1u64, Complex64::new(1.0, 0.0))];
        let r = parseval_check(&one, 0.5, 10.0, 2000.0).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15);
        assert!(r.relative_difference < 1e-3, "{r:?}");
        let tele = [(1u64, Complex64::new(1.0, 0.0)), (2, Complex64::new(-1.0, 0.0))];
        let sigma = 0.3;
        let r = parseval_check(&tele, sigma, 10.0, 1000.0).unwrap();
        let want = (1.0 - 2f64.powf(-2.0 * sigma)) / (2.0 * sigma);
        assert!((r.lhs - want).abs() < 1e-15);
        assert!(r.relative_difference < 0.01, "{r:?}");
        assert!(parseval_check(&one, 0.0, 10.0, 10.0).is_err());
    }

    #[test]
    fn parseval_hecke_coefficients() {
        let a: Vec<(u64, Complex64)> = (1..=50).map(|n| (n, Complex64::new(table().lambda(n), 0.0))).collect();
        let r = parseval_check(&a, 0.3, 50.0, 1000.0).unwrap();
        assert!(r.relative_difference < 0.01, "{r:?}");
        assert!(r.lhs_truncated < r.lhs);
    }
}
