//! Discrete fractional Fourier transform realized by Jx coupled-waveguide
//! lattices.
//!
//! The crate covers the exact spectrum and eigenbasis of the Jx coupling
//! matrix, closed-form and spectral Green functions, propagation of classical
//! fields to arbitrary transform order, two-photon correlation maps for
//! separable and path-entangled inputs, and convergence checks against the
//! continuous harmonic oscillator.

pub mod biphoton;
pub mod cli;
pub mod continuum;
pub mod error;
pub mod lattice;
pub mod specfun;
pub mod transform;

pub use error::{Error, Result};
pub use lattice::{build_jx, numeric_basis, JxMatrix, LatticeSpec, SpectralBasis};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
