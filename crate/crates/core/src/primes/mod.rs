//! Prime sieving, factor tables, and the prime-sum / Euler-factor quantities.

mod constants;
mod euler;
mod sums;

pub use constants::{Constant, Constants};
pub use euler::{
    divisor_constrained_lambda_sum, h_function, l1_sym2, lambda_pair_sum, p1_p2_factors,
    sym2_L_truncated, sym2_higher_prime_powers, sym2_local_factor, sym2_local_factor_satake,
    DivisorConstrainedSum, EulerFactorSet, L1Estimate, LocalFactors, Sym2Value, ZETA_2,
};
pub use sums::{
    cosine_prime_sum, lambda_sq_mertens, mertens_sum, prime_sum_report, rough_block_lambda_sq,
    CosineRegime, CosineSumReport, PrimeSumReport, PrimeWeight, RoughBlock,
};

use crate::error::{Error, Result};

/// Largest sieve bound accepted (about 400 MB of output at the top end).
pub const MAX_SIEVE_BOUND: u64 = 1_000_000_000;

const SEGMENT: usize = 1 << 18;

/// Ascending list of all primes ≤ bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeList {
    bound: u64,
    primes: Vec<u64>,
}

/// Segmented sieve of Eratosthenes.
pub fn sieve(bound: u64) -> Result<PrimeList> {
    if bound < 2 {
        return Err(Error::domain(format!("sieve bound must be at least 2, got {bound}")));
    }
    if bound > MAX_SIEVE_BOUND {
        return Err(Error::Capacity(format!("sieve bound {bound} exceeds {MAX_SIEVE_BOUND}")));
    }
    let root = (bound as f64).sqrt() as u64 + 1;
    let base = simple_sieve(root);
    let mut primes: Vec<u64> = base.iter().copied().filter(|&p| p <= bound).collect();
    let mut low = root + 1;
    let mut marks = vec![false; SEGMENT];
    while low <= bound {
        let high = (low + SEGMENT as u64 - 1).min(bound);
        let width = (high - low + 1) as usize;
        marks[..width].fill(true);
        for &p in &base {
            if p * p > high {
                break;
            }
            let mut m = ((low + p - 1) / p * p).max(p * p);
            while m <= high {
                marks[(m - low) as usize] = false;
                m += p;
            }
        }
        primes.extend((0..width).filter(|&i| marks[i]).map(|i| low + i as u64));
        low = high + 1;
    }
    Ok(PrimeList { bound, primes })
}

fn simple_sieve(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut is = vec![true; n + 1];
    is[0] = false;
    if n >= 1 {
        is[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if is[i] {
            for j in (i * i..=n).step_by(i) {
                is[j] = false;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&i| is[i]).map(|i| i as u64).collect()
}

impl PrimeList {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Primes p ≤ x.
    pub fn up_to(&self, x: f64) -> &[u64] {
        let end = self.primes.partition_point(|&p| (p as f64) <= x);
        &self.primes[..end]
    }

    /// Primes in the half-open real interval (lo, hi].
    pub fn in_interval(&self, lo: f64, hi: f64) -> &[u64] {
        let start = self.primes.partition_point(|&p| (p as f64) <= lo);
        let end = self.primes.partition_point(|&p| (p as f64) <= hi);
        &self.primes[start..end.max(start)]
    }

    pub fn contains(&self, n: u64) -> bool {
        self.primes.binary_search(&n).is_ok()
    }

    /// Recount primes in [lo, hi] by trial division and compare against the list.
    pub fn verify_window(&self, lo: u64, hi: u64) -> bool {
        let hi = hi.min(self.bound);
        let listed = self.primes.iter().filter(|&&p| p >= lo && p <= hi).count();
        listed == (lo..=hi).filter(|&n| is_prime_trial(n)).count()
    }
}

pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest-prime-factor table for fast factorisation of n ≤ limit.
#[derive(Debug, Clone)]
pub struct FactorTable {
    spf: Vec<u32>,
}

impl FactorTable {
    pub fn new(limit: usize) -> Result<Self> {
        if limit > u32::MAX as usize {
            return Err(Error::Capacity(format!("factor table limit {limit}")));
        }
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Ok(FactorTable { spf })
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    /// Ascending (prime, exponent) pairs of n; empty for n = 1.
    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        assert!(n >= 1 && (n as usize) <= self.limit(), "{n} outside factor table");
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        if n == 1 {
            return u64::MAX;
        }
        self.spf[n as usize] as u64
    }

    pub fn largest_prime_factor(&self, n: u64) -> u64 {
        self.factorize(n).last().map(|&(p, _)| p).unwrap_or(1)
    }
}

/// d(n) for 0 ≤ n ≤ limit (index 0 unused).
pub fn divisor_counts(limit: usize) -> Vec<u32> {
    let mut d = vec![0u32; limit + 1];
    for i in 1..=limit {
        for j in (i..=limit).step_by(i) {
            d[j] += 1;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sieves() {
        assert_eq!(sieve(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(sieve(2).unwrap().primes(), &[2]);
        assert_eq!(sieve(100).unwrap().len(), 25);
        assert!(matches!(sieve(1), Err(Error::Domain(_))));
        assert!(matches!(sieve(MAX_SIEVE_BOUND + 1), Err(Error::Capacity(_))));
    }

    #[test]
    fn segmented_sieve_matches_trial_division() {
        let list = sieve(1_000_000).unwrap();
        assert_eq!(list.len(), 78_498);
        // Windows straddling segment boundaries.
        let seg = SEGMENT as u64;
        for lo in [1, 990, seg - 50, 2 * seg - 10, 999_000] {
            assert!(list.verify_window(lo, lo + 1000), "window at {lo}");
        }
        assert!(list.primes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn interval_queries() {
        let list = sieve(100).unwrap();
        assert_eq!(list.in_interval(2.0, 3.0), &[3]);
        assert_eq!(list.in_interval(1.0, 7.5), &[2, 3, 5, 7]);
        assert!(list.in_interval(3.0, 3.0).is_empty());
        assert_eq!(list.up_to(10.0).len(), 4);
    }

    #[test]
    fn factor_table() {
        let ft = FactorTable::new(1000).unwrap();
        assert_eq!(ft.factorize(1), vec![]);
        assert_eq!(ft.factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(ft.largest_prime_factor(997), 997);
        assert_eq!(ft.smallest_prime_factor(91), 7);
        let d = divisor_counts(12);
        assert_eq!(d[12], 6);
        assert_eq!(d[1], 1);
    }
}
