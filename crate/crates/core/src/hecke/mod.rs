//! Hecke eigenvalues of the discriminant form Δ (weight 12, level 1).
//!
//! τ(n) is computed exactly; the normalised eigenvalues are
//! λ(n) = τ(n) / n^{11/2}, which satisfy |λ(n)| ≤ d(n) and the Hecke relations.

mod cache;
mod series;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes::{self, PrimeList};

pub use cache::{read_tau_cache, write_tau_cache, TAU_CACHE_MAGIC};

/// Weight of Δ. Fixed: the table is always built from the discriminant form.
pub const WEIGHT: u32 = 12;

/// Default upper index of a table.
pub const DEFAULT_LIMIT: usize = 1_000_000;

/// Largest τ table we will attempt; the transforms need ~40 bytes per entry.
pub const MAX_TAU_LIMIT: usize = 8_000_000;

/// Exact τ(n) for 0 ≤ n ≤ limit, with τ(0) = 0, so that index n holds the
/// coefficient of q^n in Δ.
pub fn build_tau_table(limit: usize) -> Result<Vec<i128>> {
    build_tau_table_with_budget(limit, MAX_TAU_LIMIT)
}

pub fn build_tau_table_with_budget(limit: usize, max_limit: usize) -> Result<Vec<i128>> {
    if limit == 0 {
        return Err(Error::domain("tau table limit must be at least 1"));
    }
    if limit > max_limit {
        return Err(Error::Capacity(format!("tau table limit {limit} exceeds budget {max_limit}")));
    }
    series::delta_coefficients(limit)
}

/// Normalised Hecke eigenvalues λ(1..=limit).
#[derive(Debug, Clone)]
pub struct HeckeTable {
    limit: usize,
    /// λ(n) at index n; index 0 holds 0.
    lambda: Vec<f64>,
    weight: u32,
}

/// λ(n) = τ(n) / n^{(κ-1)/2}.
pub fn normalize(tau: &[i128], weight: u32) -> Result<HeckeTable> {
    if weight != WEIGHT {
        return Err(Error::domain(format!("only weight {WEIGHT} is supported, got {weight}")));
    }
    if tau.len() < 2 {
        return Err(Error::domain("tau table must cover n = 1"));
    }
    let half = (weight as f64 - 1.0) / 2.0;
    let lambda = tau
        .iter()
        .enumerate()
        .map(|(n, &t)| if n == 0 { 0.0 } else { t as f64 / (n as f64).powf(half) })
        .collect();
    Ok(HeckeTable { limit: tau.len() - 1, lambda, weight })
}

impl HeckeTable {
    pub fn build(limit: usize) -> Result<Self> {
        normalize(&build_tau_table(limit)?, WEIGHT)
    }

    /// Reuse a τ cache when it covers `limit`; otherwise build and (re)write it.
    pub fn load_or_build(limit: usize, cache: Option<&std::path::Path>) -> Result<Self> {
        if let Some(path) = cache {
            if path.exists() {
                let tau = read_tau_cache(path)?;
                if tau.len() > limit {
                    return normalize(&tau[..=limit], WEIGHT);
                }
            }
            let tau = build_tau_table(limit)?;
            write_tau_cache(path, &tau)?;
            return normalize(&tau, WEIGHT);
        }
        Self::build(limit)
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// λ(n) for 1 ≤ n ≤ limit.
    ///
    /// Panics when n is outside the table.
    #[inline]
    pub fn lambda(&self, n: u64) -> f64 {
        assert!(n >= 1 && (n as usize) <= self.limit, "λ({n}) outside table of size {}", self.limit);
        self.lambda[n as usize]
    }

    pub fn get(&self, n: u64) -> Option<f64> {
        (n >= 1 && (n as usize) <= self.limit).then(|| self.lambda[n as usize])
    }

    /// λ(1..=x) as a dense coefficient vector (index i holds λ(i+1)).
    pub fn coefficients(&self, x: usize) -> Vec<f64> {
        assert!(x <= self.limit);
        self.lambda[1..=x].to_vec()
    }

    /// λ(p^j), read from the table when p^j ≤ limit and otherwise continued
    /// with the Hecke recursion from λ(p).
    pub fn lambda_prime_power(&self, p: u64, j: u32) -> f64 {
        if j == 0 {
            return 1.0;
        }
        let lp = self.lambda(p);
        let (mut prev, mut cur) = (1.0, lp);
        let mut pk = p as u128;
        for _ in 1..j {
            pk = pk.saturating_mul(p as u128);
            let next = if pk <= self.limit as u128 { self.lambda[pk as usize] } else { lp * cur - prev };
            prev = cur;
            cur = next;
        }
        cur
    }

    /// λ(p²); falls back to λ(p)² - 1 when p² is beyond the table.
    pub fn lambda_prime_square(&self, p: u64) -> f64 {
        self.lambda_prime_power(p, 2)
    }

    pub fn satake(&self, p: u64) -> Result<SatakePair> {
        satake(self.lambda(p))
    }
}

/// Satake parameters at one prime: the roots of X² - λ(p)X + 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SatakePair {
    pub alpha: Complex64,
    pub beta: Complex64,
}

const DELIGNE_SLACK: f64 = 1e-9;

pub fn satake(lambda_p: f64) -> Result<SatakePair> {
    if !lambda_p.is_finite() || lambda_p.abs() > 2.0 + DELIGNE_SLACK {
        return Err(Error::domain(format!("|λ(p)| = {} exceeds 2", lambda_p.abs())));
    }
    let half = (lambda_p / 2.0).clamp(-1.0, 1.0);
    let im = (1.0 - half * half).max(0.0).sqrt();
    Ok(SatakePair { alpha: Complex64::new(half, im), beta: Complex64::new(half, -im) })
}

impl SatakePair {
    /// Σ_{i=0}^{j} α^i β^{j-i}, which equals λ(p^j).
    pub fn power_sum(&self, j: u32) -> Complex64 {
        (0..=j).map(|i| self.alpha.powu(i) * self.beta.powu(j - i)).sum()
    }
}

/// Largest residual of an identity and where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub max_residual: f64,
    pub worst_at: u64,
    pub checked: usize,
}

impl IdentityResidual {
    fn new() -> Self {
        IdentityResidual { max_residual: 0.0, worst_at: 0, checked: 0 }
    }

    fn record(&mut self, at: u64, residual: f64) {
        self.checked += 1;
        if residual > self.max_residual || residual.is_nan() {
            self.max_residual = residual;
            self.worst_at = at;
        }
    }
}

/// max_{p ≤ bound} |λ(p)² - λ(p²) - 1|.
pub fn lambda_square_identity_check(table: &HeckeTable, bound: u64) -> Result<IdentityResidual> {
    if (bound as u128) * (bound as u128) > table.limit() as u128 {
        return Err(Error::precondition(format!(
            "bound² = {} exceeds table limit {}",
            bound as u128 * bound as u128,
            table.limit()
        )));
    }
    let mut out = IdentityResidual::new();
    for &p in primes::sieve(bound.max(2))?.primes() {
        let lp = table.lambda(p);
        out.record(p, (lp * lp - table.lambda(p * p) - 1.0).abs());
    }
    Ok(out)
}

/// max over pairs of |λ(mn) - λ(m)λ(n)| / max(1, |λ(mn)|). Non-coprime pairs
/// and pairs with mn beyond the table are skipped.
pub fn multiplicativity_residual(table: &HeckeTable, pairs: &[(u64, u64)]) -> IdentityResidual {
    let mut out = IdentityResidual::new();
    for &(m, n) in pairs {
        let mn = m as u128 * n as u128;
        if m == 0 || n == 0 || gcd(m, n) != 1 || mn > table.limit() as u128 {
            continue;
        }
        let l = table.lambda(mn as u64);
        out.record(mn as u64, (l - table.lambda(m) * table.lambda(n)).abs() / l.abs().max(1.0));
    }
    out
}

/// max_{n ≤ bound} (|λ(n)| - d(n)); non-positive when the divisor bound holds.
pub fn deligne_excess(table: &HeckeTable, bound: u64) -> IdentityResidual {
    let divisors = primes::divisor_counts(bound as usize);
    let mut out = IdentityResidual { max_residual: f64::NEG_INFINITY, worst_at: 0, checked: 0 };
    for n in 1..=bound.min(table.limit() as u64) {
        out.record(n, table.lambda(n).abs() - divisors[n as usize] as f64);
    }
    out
}

/// Three-term recursion and Satake closure on every prime power p^j ≤ limit,
/// j ≥ 2. Returns (recursion residual, Satake reconstruction residual).
pub fn prime_power_residuals(table: &HeckeTable) -> Result<(IdentityResidual, IdentityResidual)> {
    let limit = table.limit() as u64;
    let mut recursion = IdentityResidual::new();
    let mut closure = IdentityResidual::new();
    let bound = (limit as f64).sqrt() as u64 + 1;
    for &p in primes::sieve(bound.max(2))?.primes() {
        let lp = table.lambda(p);
        let pair = satake(lp)?;
        let mut prev = p;
        let mut pk = p * p;
        let mut j = 2;
        while pk <= limit {
            let expected = lp * table.lambda(prev) - table.lambda(prev / p);
            recursion.record(pk, (table.lambda(pk) - expected).abs());
            closure.record(pk, (table.lambda(pk) - pair.power_sum(j).re).abs());
            prev = pk;
            pk = match pk.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
            j += 1;
        }
    }
    Ok((recursion, closure))
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Number of positive divisors, by trial division.
pub fn divisor_count(n: u64) -> u64 {
    assert!(n >= 1);
    factor_exponents(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Number of distinct prime divisors.
pub fn omega(n: u64) -> u32 {
    assert!(n >= 1);
    factor_exponents(n).len() as u32
}

/// Prime factorisation by trial division, ascending.
pub fn factor_exponents(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Shared helper for callers that need a prime list and a table together.
pub fn primes_for(table: &HeckeTable) -> Result<PrimeList> {
    primes::sieve(table.limit().max(2) as u64)
}
