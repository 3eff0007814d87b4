//! The orthogonality transfer: when the expanded Dirichlet polynomial is
//! shorter than q, the character average of |Σ χ(n)λ(n)|² R(χ) equals the
//! Steinhaus expectation E|Σ f(n)λ(n)|² R(f).
//!
//! The random side is computed exactly. R(f) is a polynomial in the f(p) and
//! their conjugates; each monomial f(a) conj f(b) is stored with a, b coprime
//! (unit modulus lets common factors cancel), and E f(n₁a) conj f(n₂b) is 1
//! exactly when n₁a = n₂b, i.e. n₁ = bt, n₂ = at.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::{all_twisted_sums, twisted_sums_sparse, CharacterIndex};
use crate::error::{Error, Result};
use crate::hecke::HeckeTable;
use crate::mollifier::MollifierSchedule;
use crate::numeric::relative_diff;
use crate::primes::PrimeList;

use super::mollified::{truncated_exp, DCoefficients};

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Σ c_{a,b} f(a) conj f(b) with gcd(a, b) = 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LaurentPoly {
    pub terms: BTreeMap<(u128, u128), Complex64>,
}

impl LaurentPoly {
    pub fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((1, 1), Complex64::new(1.0, 0.0));
        LaurentPoly { terms }
    }

    pub fn add_term(&mut self, a: u128, b: u128, c: Complex64) {
        let g = gcd(a, b);
        *self.terms.entry((a / g, b / g)).or_default() += c;
    }

    pub fn scale(&self, c: f64) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(&k, &v)| (k, v * c)).collect() }
    }

    pub fn add(&mut self, other: &Self) {
        for (&(a, b), &c) in &other.terms {
            *self.terms.entry((a, b)).or_default() += c;
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = LaurentPoly::default();
        for (&(a1, b1), &c1) in &self.terms {
            for (&(a2, b2), &c2) in &other.terms {
                let a = a1.checked_mul(a2).ok_or_else(|| Error::Capacity("monomial overflows u128".into()))?;
                let b = b1.checked_mul(b2).ok_or_else(|| Error::Capacity("monomial overflows u128".into()))?;
                out.add_term(a, b, c1 * c2);
            }
        }
        Ok(out)
    }

    /// max(a, b) over the monomials: the length of the polynomial.
    pub fn length(&self) -> u128 {
        self.terms.keys().map(|&(a, b)| a.max(b)).max().unwrap_or(1)
    }

    /// E f(a) conj f(b) summed: the constant coefficient.
    pub fn expectation(&self) -> Complex64 {
        self.terms.get(&(1, 1)).copied().unwrap_or_default()
    }
}

/// Re D as a Laurent polynomial: D = Σ c1 f(p) + c2 f(p²), Re D = (D + conj D)/2.
fn re_d_poly(co: &DCoefficients) -> LaurentPoly {
    let mut out = LaurentPoly::default();
    for ((&p, &c1), &c2) in co.primes.iter().zip(&co.c1).zip(&co.c2) {
        let p = p as u128;
        out.add_term(p, 1, c1 / 2.0);
        out.add_term(1, p, c1.conj() / 2.0);
        out.add_term(p * p, 1, c2 / 2.0);
        out.add_term(1, p * p, c2.conj() / 2.0);
    }
    out
}

/// (Σ_{j ≤ J} (k-1)^j/j! (Re D)^j)² as a polynomial.
fn r_block_poly(co: &DCoefficients, k: f64, j: u32) -> Result<LaurentPoly> {
    let re_d = re_d_poly(co);
    let mut sum = LaurentPoly::one();
    let mut power = LaurentPoly::one();
    let mut coeff = 1.0;
    for i in 1..=j {
        power = power.mul(&re_d)?;
        coeff *= (k - 1.0) / i as f64;
        sum.add(&power.scale(coeff));
    }
    sum.mul(&sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferReport {
    pub q: u64,
    pub x: u64,
    /// (1/φ(q)) Σ_{all χ} |Σ_{n ≤ x} χ(n)λ(n)|² R(χ).
    pub char_side: f64,
    /// E |Σ_{n ≤ x} f(n)λ(n)|² R(f), by exact diagonal matching.
    pub rmf_side: f64,
    pub relative_difference: f64,
    /// Imaginary residue of the symbolic side (should vanish).
    pub rmf_imaginary: f64,
    /// x · N where N = max(a, b) over the monomials of R.
    pub expanded_length: f64,
    /// x N < q: the regime where the identity must hold.
    pub length_ok: bool,
    pub monomials: usize,
}

/// Both sides of the transfer identity. With `enforce_length` the call fails
/// when x N ≥ q; without it the sides are still computed (off-diagonal
/// leakage then shows up as a difference).
pub fn orthogonality_transfer_check(
    index: &CharacterIndex,
    x: u64,
    s: &MollifierSchedule,
    table: &HeckeTable,
    list: &PrimeList,
    enforce_length: bool,
) -> Result<TransferReport> {
    let q = index.modulus();
    if x == 0 || x >= q || x as usize > table.limit() {
        return Err(Error::domain(format!("need 1 ≤ x < q and x within the table, got x = {x}")));
    }
    let shifts = s.shifts();
    let blocks: Vec<Vec<DCoefficients>> = shifts
        .iter()
        .map(|&l| (1..=s.m_count).map(|m| DCoefficients::for_block(table, list, s, m, l)).collect())
        .collect::<Result<_>>()?;

    // Symbolic side.
    let mut rmf = Complex64::new(0.0, 0.0);
    let mut length = 1u128;
    let mut monomials = 0;
    for per_l in &blocks {
        let mut poly = LaurentPoly::one();
        for (m, co) in per_l.iter().enumerate() {
            poly = poly.mul(&r_block_poly(co, s.k, s.j(m + 1))?)?;
        }
        length = length.max(poly.length());
        monomials += poly.terms.len();
        for (&(a, b), &c) in &poly.terms {
            let top = a.max(b);
            if top > x as u128 {
                continue;
            }
            let (a, b) = (a as u64, b as u64);
            let diag: f64 = (1..=x / top as u64).map(|t| table.lambda(b * t) * table.lambda(a * t)).sum();
            rmf += c * diag;
        }
    }
    let expanded_length = x as f64 * length as f64;
    let length_ok = expanded_length < q as f64;
    if enforce_length && !length_ok {
        return Err(Error::precondition(format!(
            "expanded length x·N = {expanded_length} is not below q = {q}; orthogonality does not isolate the diagonal"
        )));
    }

    // Character side.
    let t = all_twisted_sums(index, &table.coefficients(x as usize))?;
    let mut r = vec![0.0f64; index.order() as usize];
    for per_l in &blocks {
        let mut prod = vec![1.0f64; r.len()];
        for (m, co) in per_l.iter().enumerate() {
            let mut terms = Vec::with_capacity(2 * co.primes.len());
            for ((&p, &c1), &c2) in co.primes.iter().zip(&co.c1).zip(&co.c2) {
                terms.push((p, c1));
                terms.push((p * p, c2));
            }
            let d = twisted_sums_sparse(index, &terms);
            let k = s.k;
            let j = s.j(m + 1);
            for (acc, dv) in prod.iter_mut().zip(&d.values) {
                *acc *= truncated_exp((k - 1.0) * dv.re, j).powi(2);
            }
        }
        for (acc, p) in r.iter_mut().zip(prod) {
            *acc += p;
        }
    }
    let weighted: Vec<f64> = t.values.iter().zip(&r).map(|(tv, rv)| tv.norm_sqr() * rv).collect();
    let char_side = crate::numeric::pairwise_sum(&weighted) / index.order() as f64;

    Ok(TransferReport {
        q,
        x,
        char_side,
        rmf_side: rmf.re,
        relative_difference: relative_diff(char_side, rmf.re, f64::MIN_POSITIVE),
        rmf_imaginary: rmf.im,
        expanded_length,
        length_ok,
        monomials,
    })
}
