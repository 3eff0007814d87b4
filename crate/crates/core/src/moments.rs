//! 2k-th moments of twisted Hecke sums over the non-principal characters
//! modulo a prime, and sweeps over the modulus.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::characters::{all_twisted_sums, CharacterIndex, TwistedSumVector};
use crate::error::{Error, Result};
use crate::hecke::HeckeTable;
use crate::numeric::{pairwise_sum, pow_of_square, LinearFit};

/// S_k and its normalisation for one (q, x, k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub q: u64,
    pub x: u64,
    pub k: f64,
    /// Σ_{χ ≠ χ₀} |Σ_{n ≤ x} χ(n)λ(n)|^{2k}.
    pub s_k: f64,
    /// S_k / (φ(q) x^k (log q)^{(k-1)²}).
    pub normalized: f64,
    /// |T(χ₀)|², the excluded principal term.
    pub principal_square: f64,
    /// Relative residual of (1/φ(q)) Σ_{all χ} |T(χ)|² = Σ_{n ≤ x} λ(n)².
    pub second_moment_check: f64,
    /// x > √q: outside the range x ≤ q^{1/2} of the lower bound.
    pub beyond_sqrt_q: bool,
    /// k < 2: outside the range of the lower bound.
    pub k_below_two: bool,
}

/// Σ_{a ≠ 0} |T(χ_a)|^{2k}.
pub fn moment_from_sums(sums: &TwistedSumVector, k: f64) -> f64 {
    let terms: Vec<f64> = sums.values[1..].iter().map(|t| pow_of_square(t.norm_sqr(), k)).collect();
    pairwise_sum(&terms)
}

pub fn normalization(q: u64, x: u64, k: f64) -> f64 {
    (q - 1) as f64 * (x as f64).powf(k) * (q as f64).ln().powf((k - 1.0) * (k - 1.0))
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 1.0) {
        return Err(Error::domain(format!("moment order k = {k} must be a finite real ≥ 1")));
    }
    Ok(())
}

pub fn moment(index: &CharacterIndex, table: &HeckeTable, x: u64, k: f64) -> Result<MomentReport> {
    moment_parts(index, table, x, k).map(|(report, _, _)| report)
}

/// The report together with the transform and coefficients it came from.
fn moment_parts(
    index: &CharacterIndex,
    table: &HeckeTable,
    x: u64,
    k: f64,
) -> Result<(MomentReport, TwistedSumVector, Vec<f64>)> {
    check_k(k)?;
    let q = index.modulus();
    if x == 0 || x >= q {
        return Err(Error::domain(format!("need 1 ≤ x < q, got x = {x}, q = {q}")));
    }
    if x as usize > table.limit() {
        return Err(Error::precondition(format!("x = {x} exceeds table limit {}", table.limit())));
    }
    let coeffs = table.coefficients(x as usize);
    let sums = all_twisted_sums(index, &coeffs)?;
    let s_k = moment_from_sums(&sums, k);
    let diagonal = pairwise_sum(&coeffs.iter().map(|c| c * c).collect::<Vec<_>>());
    let second_moment_check = (sums.mean_square() - diagonal).abs() / diagonal;
    let report = MomentReport {
        q,
        x,
        k,
        s_k,
        normalized: s_k / normalization(q, x, k),
        principal_square: sums.values[0].norm_sqr(),
        second_moment_check,
        beyond_sqrt_q: x * x > q,
        k_below_two: k < 2.0,
    };
    Ok((report, sums, coeffs))
}

/// Fully naive S_k: every character against every n, no transform.
pub fn naive_moment(index: &CharacterIndex, coeffs: &[f64], k: f64) -> f64 {
    let terms: Vec<f64> = (1..index.order())
        .map(|a| pow_of_square(crate::characters::naive_twisted_sum(index, a, coeffs).norm_sqr(), k))
        .collect();
    pairwise_sum(&terms)
}

/// How x is chosen from q in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XRule {
    /// x = ⌊√q⌋.
    Sqrt,
    Fixed(u64),
}

impl XRule {
    pub fn length(&self, q: u64) -> u64 {
        match *self {
            XRule::Sqrt => isqrt(q),
            XRule::Fixed(x) => x,
        }
    }
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// One row of a growth sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub q: u64,
    pub x: u64,
    pub k: f64,
    pub s_k: f64,
    pub normalized: f64,
    /// log(S_k / (φ(q) x^k)), regressed against log log q.
    pub log_ratio: f64,
    pub loglog_q: f64,
    /// S_1 from the same transform.
    pub s_1: f64,
    /// Relative residual of (S_1 + |T(χ₀)|²)/φ(q) = Σ_{n ≤ x} λ(n)².
    pub diagonal_residual: f64,
    pub beyond_sqrt_q: bool,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthScan {
    pub k: f64,
    pub rows: Vec<GrowthRow>,
    /// Least-squares fit of log_ratio against log log q.
    pub fit: Option<LinearFit>,
    pub slope_ci95: Option<(f64, f64)>,
    /// (k - 1)², the exponent of log q in the conjectured order.
    pub reference_slope: f64,
}

fn growth_row(q: u64, k: f64, x_rule: XRule, table: &HeckeTable) -> Result<GrowthRow> {
    let start = Instant::now();
    let index = CharacterIndex::new(q)?;
    let x = x_rule.length(q);
    let (report, sums, coeffs) = moment_parts(&index, table, x, k)?;
    let s_1 = moment_from_sums(&sums, 1.0);
    let diagonal = pairwise_sum(&coeffs.iter().map(|c| c * c).collect::<Vec<_>>());
    let identity = (s_1 + sums.values[0].norm_sqr()) / index.order() as f64;
    let log_q = (q as f64).ln();
    Ok(GrowthRow {
        q,
        x,
        k,
        s_k: report.s_k,
        normalized: report.normalized,
        log_ratio: (report.s_k / ((q - 1) as f64 * (x as f64).powf(k))).ln(),
        loglog_q: log_q.ln(),
        s_1,
        diagonal_residual: (identity - diagonal).abs() / diagonal,
        beyond_sqrt_q: report.beyond_sqrt_q,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Rows for each q in `q_list` (ascending primes), computed in parallel and
/// returned in input order.
pub fn growth_scan(q_list: &[u64], k: f64, x_rule: XRule, table: &HeckeTable) -> Result<GrowthScan> {
    check_k(k)?;
    if q_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("q list must be ascending"));
    }
    let rows: Vec<GrowthRow> =
        q_list.par_iter().map(|&q| growth_row(q, k, x_rule, table)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.loglog_q).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.log_ratio).collect();
    let fit = LinearFit::fit(&xs, &ys);
    Ok(GrowthScan {
        k,
        slope_ci95: fit.and_then(|f| f.slope_ci95()),
        fit,
        rows,
        reference_slope: (k - 1.0) * (k - 1.0),
    })
}

/// Primes near a geometric grid: the next prime at or above
/// lo·(hi/lo)^{i/(count-1)}, deduplicated.
pub fn geometric_primes(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = (0..count)
        .map(|i| {
            let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
            let target = (lo as f64 * (hi as f64 / lo as f64).powf(t)).round() as u64;
            (target..).find(|&n| crate::primes::is_prime_trial(n)).expect("primes are unbounded")
        })
        .filter(|&p| p <= hi || count == 1)
        .collect();
    out.dedup();
    out
}
