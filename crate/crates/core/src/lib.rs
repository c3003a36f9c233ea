//! Random walks on fusion rings of compact quantum groups.
//!
//! The crate works entirely at fusion-ring level: labels, tensor
//! multiplicities and quantum dimensions. On top of that it provides
//! convolution of measures on the free unitary fusion semigroup and its end
//! compactification, amenability diagnostics through fusion-matrix norms, and
//! a finite-dimensional minimal-idempotent toolkit.

pub mod amenability;
pub mod cli;
pub mod error;
pub mod fusion;
pub mod hamana;
pub mod walk;

pub use error::{Error, Result};
