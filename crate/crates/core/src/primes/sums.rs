//! Mertens-type sums over primes.

use serde::Serialize;

use super::{FactorTable, PrimeList};
use crate::error::{Error, Result};
use crate::hecke::HeckeTable;
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeWeight {
    /// Σ 1/p
    One,
    /// Σ λ(p)²/p
    LambdaSquared,
}

fn check_range(primes: &PrimeList, x: f64) -> Result<()> {
    if !(x >= 2.0) {
        return Err(Error::domain(format!("prime sums need x ≥ 2, got {x}")));
    }
    if (primes.bound() as f64) < x.floor() {
        return Err(Error::precondition(format!(
            "prime list bound {} is below x = {x}",
            primes.bound()
        )));
    }
    Ok(())
}

/// Σ_{p ≤ x} 1/p.
pub fn mertens_sum(primes: &PrimeList, x: f64) -> Result<f64> {
    check_range(primes, x)?;
    let terms: Vec<f64> = primes.up_to(x).iter().map(|&p| 1.0 / p as f64).collect();
    Ok(pairwise_sum(&terms))
}

/// Σ_{p ≤ x} λ(p)²/p.
pub fn lambda_sq_mertens(primes: &PrimeList, table: &HeckeTable, x: f64) -> Result<f64> {
    check_range(primes, x)?;
    if x.floor() > table.limit() as f64 {
        return Err(Error::precondition(format!("x = {x} exceeds table limit {}", table.limit())));
    }
    let terms: Vec<f64> = primes
        .up_to(x)
        .iter()
        .map(|&p| {
            let l = table.lambda(p);
            l * l / p as f64
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// One row of the `primes` report: the sum, loglog x + b, and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimeSumReport {
    pub x: f64,
    pub sum: f64,
    pub reference: f64,
    pub residual: f64,
}

impl PrimeSumReport {
    /// |residual| · log x, the constant in an O(1/log x) error term.
    pub fn scaled_residual(&self) -> f64 {
        self.residual.abs() * self.x.ln()
    }
}

pub fn prime_sum_report(
    primes: &PrimeList,
    table: Option<&HeckeTable>,
    weight: PrimeWeight,
    x: f64,
    constant: f64,
) -> Result<PrimeSumReport> {
    let sum = match weight {
        PrimeWeight::One => mertens_sum(primes, x)?,
        PrimeWeight::LambdaSquared => {
            let table = table.ok_or_else(|| Error::precondition("λ² weights need a Hecke table"))?;
            lambda_sq_mertens(primes, table, x)?
        }
    };
    let reference = x.ln().ln() + constant;
    Ok(PrimeSumReport { x, sum, reference, residual: sum - reference })
}

/// Which branch of the piecewise bound applies to a cosine-weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CosineRegime {
    /// |α| ≤ 1/log x: bound shape log log x.
    Small,
    /// 1/log x < |α| ≤ 10: bound shape log(1/|α|).
    Middle,
    /// |α| > 10: bound shape log log |α|.
    Large,
    /// λ(p²)-weighted sum: bound shape 3 log log(|α| + e^e).
    Sym2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosineSumReport {
    pub sum: f64,
    pub regime: CosineRegime,
    pub shape: f64,
    /// sum - shape: the measured additive constant.
    pub excess: f64,
}

/// Σ_{p ≤ x} w(p) cos(α log p) / p^{1+β}, with w ≡ 1, or w(p) = λ(p²) when a
/// table is supplied. β must lie in [0, beta_constant / log x].
pub fn cosine_prime_sum(
    primes: &PrimeList,
    x: f64,
    alpha: f64,
    beta: f64,
    beta_constant: f64,
    table: Option<&HeckeTable>,
) -> Result<CosineSumReport> {
    check_range(primes, x)?;
    let log_x = x.ln();
    if !(0.0..=beta_constant / log_x).contains(&beta) {
        return Err(Error::domain(format!(
            "β = {beta} outside [0, {beta_constant}/log x = {}]",
            beta_constant / log_x
        )));
    }
    let ps = primes.up_to(x);
    let terms: Vec<f64> = ps
        .iter()
        .map(|&p| {
            let lp = (p as f64).ln();
            let w = table.map_or(1.0, |t| t.lambda_prime_square(p));
            w * (alpha * lp).cos() / (p as f64).powf(1.0 + beta)
        })
        .collect();
    let sum = pairwise_sum(&terms);
    let a = alpha.abs();
    let (regime, shape) = if table.is_some() {
        (CosineRegime::Sym2, 3.0 * (a + std::f64::consts::E.exp()).ln().ln())
    } else if a <= 1.0 / log_x {
        (CosineRegime::Small, log_x.ln())
    } else if a <= 10.0 {
        (CosineRegime::Middle, (1.0 / a).ln())
    } else {
        (CosineRegime::Large, a.ln().ln())
    };
    Ok(CosineSumReport { sum, regime, shape, excess: sum - shape })
}

/// Σ_{x/(r+1) < n ≤ x/r, P⁻(n) > y} λ(n)² against the shape x / (r² log y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoughBlock {
    pub r: u64,
    pub sum: f64,
    pub shape: f64,
    pub ratio: f64,
}

pub fn rough_block_lambda_sq(
    x: u64,
    r: u64,
    y: f64,
    table: &HeckeTable,
    factors: &FactorTable,
) -> Result<RoughBlock> {
    if r == 0 || y < 2.0 {
        return Err(Error::domain("need r ≥ 1 and y ≥ 2"));
    }
    if x as usize > table.limit() || x as usize > factors.limit() {
        return Err(Error::precondition(format!("x = {x} exceeds the tables")));
    }
    let lo = x / (r + 1);
    let hi = x / r;
    let terms: Vec<f64> = (lo + 1..=hi)
        .filter(|&n| n > 1 && factors.smallest_prime_factor(n) as f64 > y)
        .map(|n| {
            let l = table.lambda(n);
            l * l
        })
        .collect();
    let sum = pairwise_sum(&terms);
    let shape = x as f64 / ((r * r) as f64 * y.ln());
    Ok(RoughBlock { r, sum, shape, ratio: sum / shape })
}
