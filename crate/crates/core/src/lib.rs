//! Exact dynamics, spectra and snapshot statistics for the long-range XXZ chain
//!
//! H = (1/3) Σ_{i<j} J_ij (σˣσˣ + σʸσʸ + Δ σᶻσᶻ), J_ij = J / d(i,j)^α.
//!
//! Sites are 0-based inside the library; the CLI and file formats use 1-based labels.

pub mod entropy;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod model;
pub mod probes;
pub mod sampling;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
