//! Symmetric-square Euler factors, L(1, sym² f), and the multiplicative
//! weights P₁, P₂, P₃ and g(d).

use num_complex::Complex64;
use serde::Serialize;

use super::{FactorTable, PrimeList};
use crate::error::{Error, Result};
use crate::hecke::{factor_exponents, HeckeTable, SatakePair};
use crate::numeric::pairwise_sum;

pub const ZETA_2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Truncation threshold for the local series in P₁, P₂ and g.
const SERIES_RTOL: f64 = 1e-12;

/// (1 - λ(p²)p^{-s} + λ(p²)p^{-2s} - p^{-3s})^{-1}.
pub fn sym2_local_factor(lambda_p2: f64, p: u64, s: Complex64) -> Complex64 {
    let u = (-s * (p as f64).ln()).exp();
    let poly = Complex64::new(1.0, 0.0) - lambda_p2 * u + lambda_p2 * u * u - u * u * u;
    poly.inv()
}

/// (1 - α²p^{-s})^{-1}(1 - p^{-s})^{-1}(1 - β²p^{-s})^{-1}.
pub fn sym2_local_factor_satake(pair: &SatakePair, p: u64, s: Complex64) -> Complex64 {
    let u = (-s * (p as f64).ln()).exp();
    let one = Complex64::new(1.0, 0.0);
    ((one - pair.alpha * pair.alpha * u) * (one - u) * (one - pair.beta * pair.beta * u)).inv()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sym2Value {
    pub value: Complex64,
    /// Estimated |L(s) - value| from the primes beyond the cutoff.
    pub tail: f64,
    pub primes: usize,
}

/// ∏_{p ≤ P} of the local symmetric-square factor at s, Re s > 1.
#[allow(non_snake_case)]
pub fn sym2_L_truncated(s: Complex64, prime_bound: u64, table: &HeckeTable) -> Result<Sym2Value> {
    if !(s.re > 1.0) {
        return Err(Error::Divergence(format!("Euler product needs Re s > 1, got {}", s.re)));
    }
    if prime_bound < 2 {
        return Ok(Sym2Value { value: Complex64::new(1.0, 0.0), tail: 0.0, primes: 0 });
    }
    if (prime_bound as usize) > table.limit() {
        return Err(Error::precondition(format!(
            "prime bound {prime_bound} exceeds table limit {}",
            table.limit()
        )));
    }
    let list = super::sieve(prime_bound)?;
    // Multiply in log space so long products do not drift.
    let logs: Vec<Complex64> = list
        .primes()
        .iter()
        .map(|&p| sym2_local_factor(table.lambda_prime_square(p), p, s).ln())
        .collect();
    let re = pairwise_sum(&logs.iter().map(|z| z.re).collect::<Vec<_>>());
    let im = pairwise_sum(&logs.iter().map(|z| z.im).collect::<Vec<_>>());
    let value = Complex64::new(re, im).exp();
    // |log of a local factor| ≤ 3 Σ_j p^{-jσ}/j, dominated by 3p^{-σ}(1 + p^{-σ}).
    // Σ_{p > P} p^{-σ} ≤ P^{1-σ} / ((σ - 1) log P) by partial summation.
    let sigma = s.re;
    let pb = prime_bound as f64;
    let log_tail = 3.0 * (1.0 + pb.powf(-sigma)) * pb.powf(1.0 - sigma) / ((sigma - 1.0) * pb.ln());
    let tail = value.norm() * (log_tail.exp() - 1.0);
    Ok(Sym2Value { value, tail, primes: list.len() })
}

/// L(1, sym² f) from a smoothed Dirichlet series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1Estimate {
    pub value: f64,
    /// Smoothing length T.
    pub truncation: u64,
    /// |estimate(T) - estimate(T/2)|, the Cauchy difference.
    pub cauchy: f64,
}

/// Riesz mean Σ_{n ≤ T} c_n/n (1 - n/T)³ of L(1, sym² f) = Σ c_n/n, where
/// c_n = Σ_{m²k = n} λ(k²).
fn riesz_mean(t: u64, table: &HeckeTable, factors: &FactorTable) -> f64 {
    let tf = t as f64;
    let mut terms = Vec::with_capacity(t as usize);
    for k in 1..=t {
        let lk2 = lambda_of_square(k, table, factors);
        if lk2 == 0.0 {
            continue;
        }
        let mut m = 1u64;
        while m * m * k <= t {
            let n = (m * m * k) as f64;
            let w = 1.0 - n / tf;
            terms.push(lk2 / n * w * w * w);
            m += 1;
        }
    }
    pairwise_sum(&terms)
}

fn lambda_of_square(k: u64, table: &HeckeTable, factors: &FactorTable) -> f64 {
    if let Some(v) = k.checked_mul(k).and_then(|k2| table.get(k2)) {
        return v;
    }
    factors
        .factorize(k)
        .iter()
        .map(|&(p, e)| table.lambda_prime_power(p, 2 * e))
        .product()
}

/// L(1, sym² f) by a cubic Riesz mean at lengths T and T/2 followed by one
/// Richardson step that cancels the 1/T term coming from L(0, sym² f).
pub fn l1_sym2(table: &HeckeTable, truncation: u64) -> Result<L1Estimate> {
    if truncation < 64 {
        return Err(Error::domain("truncation length must be at least 64"));
    }
    if truncation as usize > table.limit() {
        return Err(Error::precondition(format!(
            "truncation {truncation} exceeds table limit {}",
            table.limit()
        )));
    }
    let factors = FactorTable::new(truncation as usize)?;
    let estimate = |t: u64| 2.0 * riesz_mean(t, table, &factors) - riesz_mean(t / 2, table, &factors);
    let value = estimate(truncation);
    let half = estimate(truncation / 2);
    Ok(L1Estimate { value, truncation, cauchy: (value - half).abs() })
}

/// Per-prime pieces of P₁, P₂ and g at p^ν ‖ c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalFactors {
    pub p: u64,
    pub nu: u32,
    pub p1: f64,
    pub p2: f64,
    /// p^{-ν} Σ_j λ(p^{ν+j})²/p^j · ζ_p(2) / (ζ_p(1) L_p(1, sym² f)).
    pub g: f64,
}

/// Σ_{j ≥ 0} term(j) r^j where |term(j)| ≤ (ν+j+1)(j+1), stopped when the
/// remaining tail is below the relative tolerance.
fn local_series(nu: u32, r: f64, term: impl Fn(u32) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut rj = 1.0;
    for j in 0..2000u32 {
        sum += term(j) * rj;
        rj *= r;
        let a = (nu + j + 2) as f64;
        let b = (j + 2) as f64;
        let next = a * b * rj;
        let ratio = r * (1.0 + 1.0 / a) * (1.0 + 1.0 / b);
        if ratio < 1.0 && next / (1.0 - ratio) < SERIES_RTOL * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    sum
}

impl LocalFactors {
    pub fn new(p: u64, nu: u32, table: &HeckeTable) -> Self {
        let pf = p as f64;
        let lam = |j: u32| table.lambda_prime_power(p, j);
        let pair = |j: u32| (lam(nu + j) * lam(j)).abs();
        let p1 = local_series(nu, 1.0 / pf, pair);
        let p2 = local_series(nu, pf.powf(-0.75), pair);
        let sq = local_series(nu, 1.0 / pf, |j| lam(nu + j).powi(2));
        let l2 = lam(2);
        let correction = pf / (pf + 1.0) * (1.0 - l2 / pf + l2 / (pf * pf) - 1.0 / (pf * pf * pf));
        let g = sq * correction / pf.powi(nu as i32);
        LocalFactors { p, nu, p1, p2, g }
    }
}

/// The multiplicative weights attached to a positive integer c.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerFactorSet {
    pub c: u64,
    pub locals: Vec<LocalFactors>,
}

impl EulerFactorSet {
    pub fn new(c: u64, table: &HeckeTable) -> Result<Self> {
        if c == 0 {
            return Err(Error::domain("c must be positive"));
        }
        let locals = factor_exponents(c)
            .into_iter()
            .map(|(p, nu)| {
                if (p as usize) > table.limit() {
                    return Err(Error::precondition(format!("prime {p} exceeds table limit")));
                }
                Ok(LocalFactors::new(p, nu, table))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EulerFactorSet { c, locals })
    }

    pub fn p1(&self) -> f64 {
        self.locals.iter().map(|l| l.p1).product()
    }

    pub fn p2(&self) -> f64 {
        self.locals.iter().map(|l| l.p2).product()
    }

    pub fn g(&self) -> f64 {
        self.locals.iter().map(|l| l.g).product()
    }

    /// ∏_{p | c} (|h(p)| + |h(p²)|/p).
    pub fn p3(&self, k: f64, table: &HeckeTable, support: impl Fn(u64) -> bool) -> Result<f64> {
        let mut out = 1.0;
        for l in &self.locals {
            let h1 = h_function(l.p, 1, k, table, &support)?;
            let h2 = h_function(l.p, 2, k, table, &support)?;
            out *= h1.abs() + h2.abs() / l.p as f64;
        }
        Ok(out)
    }
}

pub fn p1_p2_factors(c: u64, table: &HeckeTable) -> Result<(f64, f64)> {
    let set = EulerFactorSet::new(c, table)?;
    Ok((set.p1(), set.p2()))
}

/// h(p) = (k-1)λ(p) and h(p²) = ½k(k-1)(α² + β²) + (k-1)², zero when p is
/// outside the support.
pub fn h_function(p: u64, power: u32, k: f64, table: &HeckeTable, support: impl Fn(u64) -> bool) -> Result<f64> {
    if !matches!(power, 1 | 2) {
        return Err(Error::domain(format!("h is supported on p and p², not p^{power}")));
    }
    if !support(p) {
        return Ok(0.0);
    }
    Ok(match power {
        1 => (k - 1.0) * table.lambda(p),
        _ => 0.5 * k * (k - 1.0) * (table.lambda_prime_square(p) - 1.0) + (k - 1.0).powi(2),
    })
}

/// Σ_{n ≤ x} |λ(c₁n) λ(c₂n)|.
pub fn lambda_pair_sum(x: u64, c1: u64, c2: u64, table: &HeckeTable) -> Result<f64> {
    let top = x.checked_mul(c1.max(c2)).ok_or_else(|| Error::Capacity("c·x overflows".into()))?;
    if top as usize > table.limit() {
        return Err(Error::precondition(format!("c·x = {top} exceeds table limit {}", table.limit())));
    }
    let terms: Vec<f64> = (1..=x).map(|n| (table.lambda(c1 * n) * table.lambda(c2 * n)).abs()).collect();
    Ok(pairwise_sum(&terms))
}

/// Brute-force Σ_{n ≤ x, c | n} λ(n)² next to its predicted main term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivisorConstrainedSum {
    pub x: u64,
    pub c: u64,
    pub exact: f64,
    /// x · g(c) · L(1, sym² f) / ζ(2).
    pub main: f64,
}

impl DivisorConstrainedSum {
    pub fn relative_gap(&self) -> f64 {
        (self.exact - self.main).abs() / self.exact.abs()
    }
}

pub fn divisor_constrained_lambda_sum(x: u64, c: u64, table: &HeckeTable, l1: f64) -> Result<DivisorConstrainedSum> {
    if c == 0 {
        return Err(Error::domain("c must be positive"));
    }
    if x as usize > table.limit() {
        return Err(Error::precondition(format!("x = {x} exceeds table limit {}", table.limit())));
    }
    let terms: Vec<f64> = (1..=x / c)
        .map(|m| {
            let l = table.lambda(c * m);
            l * l
        })
        .collect();
    let exact = pairwise_sum(&terms);
    let g = EulerFactorSet::new(c, table)?.g();
    Ok(DivisorConstrainedSum { x, c, exact, main: x as f64 * g * l1 / ZETA_2 })
}

/// Σ_p Σ_{j ≥ 2} (α^{2j} + 1 + β^{2j}) / (j p^j): the part of log L(1, sym² f)
/// not carried by Σ_p λ(p²)/p. Converges absolutely.
pub fn sym2_higher_prime_powers(primes: &PrimeList, table: &HeckeTable) -> f64 {
    let terms: Vec<f64> = primes
        .primes()
        .iter()
        .take_while(|&&p| (p as usize) <= table.limit())
        .map(|&p| {
            let pf = p as f64;
            let mut s = 0.0;
            let mut pj = pf;
            for j in 2..200u32 {
                pj *= pf;
                // α^{2j} + β^{2j} = λ(p^{2j}) - λ(p^{2j-2})
                let c = table.lambda_prime_power(p, 2 * j) - table.lambda_prime_power(p, 2 * j - 2) + 1.0;
                let t = c / (j as f64 * pj);
                s += t;
                if 3.0 / pj < 1e-18 {
                    break;
                }
            }
            s
        })
        .collect();
    pairwise_sum(&terms)
}
