//! Numerical laboratory for planted-versus-null distinguishing problems.
//!
//! The crate computes low-degree likelihood ratios, pseudo-calibrated moment
//! matrices, the moment-matching program and its low-degree dual on
//! enumerable spaces, Monte Carlo robustness estimates, and spectral richness
//! of solution moment matrices.

pub mod combin;
pub mod duality;
pub mod error;
pub mod fourier;
pub mod hypergraph;
pub mod ldlr;
pub mod linalg;
pub mod models;
pub mod pseudocal;
pub mod robust;
pub mod sos;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
