//! Numerical toolkit for zero-energy threshold scattering of Schrödinger operators
//! `−Δ + V` on ℝ^m: free resolvent kernels, spherical means and spectral pairings,
//! weighted harmonic-analysis primitives, Birman–Schwinger threshold analysis and
//! low-energy wave-operator probes.

pub mod error;
pub mod special;
pub mod quad;
pub mod filon;
pub mod profile;
pub mod kernels;
pub mod means;
pub mod harmonic;
pub mod threshold;
pub mod waveop;
pub mod cli;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use profile::{LogGrid, RadialProfile};
