//! Dirichlet characters to a prime modulus and the all-characters kernel.
//!
//! With g a primitive root mod q, every character is χ_a(n) = e(a·ind(n)/(q-1))
//! for a ∈ {0, …, q-2}. Grouping coefficients by ind(n) turns the family of
//! twisted sums Σ a_n χ_a(n) into one DFT of length q-1.

pub mod dft;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, pairwise_sum_complex};
use dft::{dft_plus, unit_root};

/// Largest modulus accepted by [`build_index`] (the table is 4 bytes per residue).
pub const MAX_MODULUS: u64 = 200_000_000;

/// Any completely multiplicative map into the closed unit disc, evaluated at
/// primes: Dirichlet characters and Steinhaus samples.
pub trait Multiplicative {
    fn at_prime(&self, p: u64) -> Complex64;
}

/// The constant function 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct Trivial;

impl Multiplicative for Trivial {
    fn at_prime(&self, _p: u64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
}

fn is_prime(n: u64) -> bool {
    crate::primes::is_prime_trial(n)
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// True when g has order q-1 modulo the prime q.
pub fn is_primitive_root(g: u64, q: u64) -> bool {
    if g % q == 0 {
        return false;
    }
    if q == 2 {
        return g % 2 == 1;
    }
    distinct_prime_factors(q - 1).iter().all(|&r| pow_mod(g, (q - 1) / r, q) != 1)
}

/// Smallest primitive root of the prime q.
pub fn find_primitive_root(q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if q == 2 {
        return Ok(1);
    }
    let factors = distinct_prime_factors(q - 1);
    (2..q)
        .find(|&g| factors.iter().all(|&r| pow_mod(g, (q - 1) / r, q) != 1))
        .ok_or(Error::NotPrime(q))
}

/// Discrete-log table for a prime modulus.
#[derive(Debug, Clone)]
pub struct CharacterIndex {
    q: u64,
    g: u64,
    /// ind[n] for 1 ≤ n ≤ q-1; ind[0] is unused.
    ind: Vec<u32>,
}

pub fn build_index(q: u64, g: u64) -> Result<CharacterIndex> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if q > MAX_MODULUS {
        return Err(Error::Capacity(format!("modulus {q} exceeds {MAX_MODULUS}")));
    }
    if !is_primitive_root(g, q) {
        return Err(Error::NotPrimitiveRoot(g, q));
    }
    let mut ind = vec![u32::MAX; q as usize];
    let mut power = 1u64;
    for j in 0..(q - 1) {
        ind[power as usize] = j as u32;
        power = power * g % q;
    }
    debug_assert_eq!(power, 1);
    // Bijection check: every residue 1..q-1 was hit exactly once.
    if ind[1..].iter().any(|&v| v == u32::MAX) {
        return Err(Error::NotPrimitiveRoot(g, q));
    }
    Ok(CharacterIndex { q, g, ind })
}

impl CharacterIndex {
    /// Index for q with its smallest primitive root.
    pub fn new(q: u64) -> Result<Self> {
        build_index(q, find_primitive_root(q)?)
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn root(&self) -> u64 {
        self.g
    }

    /// Number of characters, φ(q) = q - 1.
    pub fn order(&self) -> u64 {
        self.q - 1
    }

    /// ind(n mod q), or None when q | n.
    #[inline]
    pub fn ind(&self, n: u64) -> Option<u64> {
        let r = (n % self.q) as usize;
        (r != 0).then(|| self.ind[r] as u64)
    }

    /// χ_a(n) = e(a·ind(n)/(q-1)), and 0 when q | n.
    pub fn chi(&self, a: u64, n: u64) -> Complex64 {
        match self.ind(n) {
            None => Complex64::new(0.0, 0.0),
            Some(j) => {
                let phase = (a as u128 * j as u128 % self.order() as u128) as u64;
                unit_root(phase, self.order(), 1.0)
            }
        }
    }

    pub fn character(&self, a: u64) -> Character<'_> {
        Character { index: self, a: a % self.order() }
    }
}

/// One character χ_a as a multiplicative evaluator.
#[derive(Debug, Clone, Copy)]
pub struct Character<'a> {
    index: &'a CharacterIndex,
    a: u64,
}

impl Character<'_> {
    pub fn label(&self) -> u64 {
        self.a
    }

    pub fn at(&self, n: u64) -> Complex64 {
        self.index.chi(self.a, n)
    }
}

impl Multiplicative for Character<'_> {
    fn at_prime(&self, p: u64) -> Complex64 {
        self.at(p)
    }
}

/// T(χ_a) for every a ∈ {0, …, q-2}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwistedSumVector {
    pub q: u64,
    pub x: u64,
    pub values: Vec<Complex64>,
}

impl TwistedSumVector {
    /// |T(χ_a)|² for all a.
    pub fn squared_moduli(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// (1/φ(q)) Σ_a |T(χ_a)|², including the principal character.
    pub fn mean_square(&self) -> f64 {
        pairwise_sum(&self.squared_moduli()) / (self.q - 1) as f64
    }
}

/// Σ_{n ≤ x} a_n χ_a(n) for all characters at once. `coeffs[i]` is a_{i+1},
/// so x = coeffs.len(), which must be below q.
pub fn all_twisted_sums(index: &CharacterIndex, coeffs: &[f64]) -> Result<TwistedSumVector> {
    let q = index.modulus();
    let x = coeffs.len() as u64;
    if x >= q {
        return Err(Error::domain(format!("x = {x} must be below q = {q}")));
    }
    let mut buckets = vec![Complex64::new(0.0, 0.0); index.order() as usize];
    for (i, &c) in coeffs.iter().enumerate() {
        let j = index.ind(i as u64 + 1).expect("n < q is a unit");
        buckets[j as usize].re += c;
    }
    Ok(TwistedSumVector { q, x, values: transform_buckets(&buckets) })
}

/// Σ_n b_n χ_a(n) for all a, for arbitrary n and complex b_n; terms with
/// q | n vanish. `x` is recorded as the largest n supplied.
pub fn twisted_sums_sparse(index: &CharacterIndex, terms: &[(u64, Complex64)]) -> TwistedSumVector {
    let mut buckets = vec![Complex64::new(0.0, 0.0); index.order() as usize];
    for &(n, b) in terms {
        if let Some(j) = index.ind(n) {
            buckets[j as usize] += b;
        }
    }
    let x = terms.iter().map(|t| t.0).max().unwrap_or(0);
    TwistedSumVector { q: index.modulus(), x, values: transform_buckets(&buckets) }
}

fn transform_buckets(buckets: &[Complex64]) -> Vec<Complex64> {
    dft_plus(buckets)
}

/// Direct O(x) evaluation of Σ_{n ≤ x} a_n χ_a(n).
pub fn naive_twisted_sum(index: &CharacterIndex, a: u64, coeffs: &[f64]) -> Complex64 {
    let terms: Vec<Complex64> =
        coeffs.iter().enumerate().map(|(i, &c)| index.chi(a, i as u64 + 1) * c).collect();
    pairwise_sum_complex(&terms)
}

/// Both sides of the bucket Parseval identity Σ_a |T(χ_a)|² = (q-1) Σ_j |c_j|².
pub fn bucket_parseval(index: &CharacterIndex, coeffs: &[f64], sums: &TwistedSumVector) -> (f64, f64) {
    let mut buckets = vec![0.0f64; index.order() as usize];
    for (i, &c) in coeffs.iter().enumerate() {
        if let Some(j) = index.ind(i as u64 + 1) {
            buckets[j as usize] += c;
        }
    }
    let lhs = pairwise_sum(&sums.squared_moduli());
    let rhs = index.order() as f64 * pairwise_sum(&buckets.iter().map(|c| c * c).collect::<Vec<_>>());
    (lhs, rhs)
}

/// The diagonal identity (1/φ(q)) Σ_χ |Σ a_n χ(n)|² = Σ_{n ≤ x, (n,q)=1} a_n², x < q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    pub q: u64,
    pub x: u64,
    pub character_side: f64,
    pub diagonal: f64,
    pub relative_error: f64,
}

pub fn orthogonality_check(index: &CharacterIndex, coeffs: &[f64]) -> Result<OrthogonalityReport> {
    let sums = all_twisted_sums(index, coeffs)?;
    let character_side = sums.mean_square();
    let diagonal = pairwise_sum(&coeffs.iter().map(|c| c * c).collect::<Vec<_>>());
    Ok(OrthogonalityReport {
        q: index.modulus(),
        x: coeffs.len() as u64,
        character_side,
        diagonal,
        relative_error: (character_side - diagonal).abs() / diagonal.abs().max(f64::MIN_POSITIVE),
    })
}
