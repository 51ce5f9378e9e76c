//! Wavelet-sparse row-action reconstruction for magnetic-particle-imaging
//! style linear inverse problems `Ax = b`.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: the real voxel grid shared by every other module.
//! - [`wavelet`]: the undecimated (à trous) wavelet transform used as the
//!   sparsifying tight frame.
//! - [`prox`]: closed-form shrinkage rules and their composition with a
//!   tight frame.
//! - [`solvers`]: the sparse Kaczmarz algorithm, FISTA, Landweber, plain and
//!   Tikhonov-regularised Kaczmarz, and the operator-norm estimate.
//! - [`simulate`]: phantoms, synthetic system matrices, colored noise and the
//!   row preprocessing pipeline.
//! - [`metrics`]: PSNR and SSIM.
//! - [`io`]: the `MPIR1` container format, PGM export and CSV helpers.
//! - [`bench`]: the comparative benchmark harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod prox;
pub mod simulate;
pub mod solvers;
pub mod wavelet;

pub use grid::ImageGrid;
pub use num_complex::Complex64;
