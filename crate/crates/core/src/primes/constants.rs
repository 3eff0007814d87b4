//! Numerically fitted constants shipped with the crate.
//!
//! The values in `fixtures/constants.json` are produced by the
//! `fit_constants` example and carry a provenance string each.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

const BUNDLED: &str = include_str!("../../fixtures/constants.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// lim Σ_{p ≤ x} 1/p - log log x.
    pub b1: Constant,
    /// lim Σ_{p ≤ x} λ(p)²/p - log log x.
    pub b2: Constant,
    #[serde(rename = "L1_sym2")]
    pub l1_sym2: Constant,
    /// Smoothing length used for L1_sym2.
    #[serde(rename = "T_truncation")]
    pub t_truncation: Constant,
}

impl Constants {
    pub fn bundled() -> Self {
        serde_json::from_str(BUNDLED).expect("bundled constants.json is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_constants_parse() {
        let c = Constants::bundled();
        // The Meissel-Mertens constant.
        assert!((c.b1.value - 0.261_497_212_847_642_8).abs() < 1e-3);
        assert!(c.l1_sym2.value > 0.0);
        assert!(!c.b2.provenance.is_empty());
    }

    #[test]
    fn b2_agrees_with_the_euler_product_identity() {
        // b₂ = b₁ + log L(1, sym² f) - Σ_p Σ_{j≥2} (α^{2j} + 1 + β^{2j})/(j p^j).
        let c = Constants::bundled();
        let table = crate::hecke::HeckeTable::build(100_000).unwrap();
        let primes = crate::primes::sieve(100_000).unwrap();
        let higher = crate::primes::sym2_higher_prime_powers(&primes, &table);
        let b2 = c.b1.value + c.l1_sym2.value.ln() - higher;
        assert!((b2 - c.b2.value).abs() < 5e-4, "{b2} vs {}", c.b2.value);
    }

    #[test]
    fn shorter_smoothing_reproduces_l1() {
        let c = Constants::bundled();
        let table = crate::hecke::HeckeTable::build(200_000).unwrap();
        let est = crate::primes::l1_sym2(&table, 200_000).unwrap();
        assert!((est.value - c.l1_sym2.value).abs() < 1e-7, "{est:?}");
        assert!(est.cauchy < 1e-6);
    }
}
