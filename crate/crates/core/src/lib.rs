//! Littlewood-Paley calculus on sampled periodic functions.
//!
//! The crate computes Besov, Triebel-Lizorkin `F^{s,w}_{p,q}`, bmo and `X_w`
//! norms on a periodic box, applies bilinear pseudodifferential operators and
//! their paraproduct decompositions, and runs ensemble experiments that probe
//! logarithmic Sobolev embeddings, lifting properties and product estimates.
//!
//! The periodic box `[0, L)^n` stands in for `R^n`. All infinite dyadic sums
//! are truncated at a resolution level `J_max`, and inputs are required to be
//! band-limited so that the truncation is exact.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bilinear;
pub mod error;
pub mod experiments;
pub mod fd;
mod fft;
pub mod io;
pub mod norms;
pub mod par;
pub mod partition;
pub mod pde;
pub mod rational;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use par::Execution;
pub use partition::{AnnulusCutoffs, BumpProfile, ResolutionOfUnity};
pub use spectral::{Grid, GridFunction, Spectrum};
pub use weights::{AdmissibleWeight, RegularizedWeight};
