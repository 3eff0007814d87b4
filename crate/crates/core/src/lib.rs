//! Numerical laboratory for moments of twisted Hecke eigenvalue sums.
//!
//! The crate instantiates the discriminant form Δ and provides:
//!
//! - [`hecke`]: exact τ(n), normalised eigenvalues λ(n) and Satake parameters.
//! - [`primes`]: sieving, Mertens-type sums, local Euler factors.
//! - [`characters`]: Dirichlet characters to a prime modulus and the
//!   all-characters twisted sum kernel.
//! - [`moments`]: the 2k-th moments over characters and growth sweeps.
//! - [`steinhaus`]: Steinhaus random multiplicative functions and the
//!   probabilistic identities built on them.
//! - [`mollifier`]: the subdivision/exponent schedule and majorant audits.

pub mod characters;
pub mod error;
pub mod hecke;
pub mod mollifier;
pub mod moments;
pub mod numeric;
pub mod primes;
pub mod quadrature;
pub mod steinhaus;

pub use error::{Error, Result};
