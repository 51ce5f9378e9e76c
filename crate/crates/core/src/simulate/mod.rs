//! Synthetic forward model: phantoms, MPI-like system matrices, colored
//! background noise and the row preprocessing applied before reconstruction.

mod noise;
mod phantom;
mod preprocess;
mod system;

use thiserror::Error;

use crate::grid::GridError;
use crate::solvers::SolverError;

pub use noise::{
    colored_background, forward_simulate, noise_envelope, NoiseModel, DEFAULT_NOISE_LEVEL,
};
pub use phantom::{
    make_delta_phantom, make_phantom, make_shape_phantom, make_vascular_phantom,
    shape_phantom_regions, PhantomKind, ShapeRegion, MIN_PHANTOM_SIDE,
};
pub use preprocess::preprocess_matrix;
pub use system::{synth_system_matrix, MatrixModel, FREQ_MAX_HZ, FREQ_MIN_HZ};

#[derive(Debug, Error, PartialEq)]
pub enum SimulateError {
    #[error("grid {dims:?} is too small: {reason}")]
    GridTooSmall { dims: Vec<usize>, reason: String },
    #[error("phantom weight sigma must be > 0, got {0}")]
    InvalidSigma(f64),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("system matrix has no {0} metadata")]
    MissingMetadata(&'static str),
    #[error("no rows survive preprocessing (snr > {snr_min}, {f_lo_hz} Hz <= f <= {f_hi_hz} Hz)")]
    AllRowsFiltered {
        snr_min: f64,
        f_lo_hz: f64,
        f_hi_hz: f64,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
