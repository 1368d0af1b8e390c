//! Exponential sums over smooth squarefree moduli, Ramanujan's `τ`, summation
//! formulas and the bilinear-form bounds that feed an exponent of distribution
//! for `λ_f * 1` in arithmetic progressions.

pub mod apdist;
pub mod bessel;
pub mod bilinear;
pub mod error;
pub mod expsums;
pub mod heckecoeffs;
pub mod modarith;
pub mod quad;
pub mod report;
pub mod rng;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
