//! Serialization: the `MPIR1` container, 16-bit PGM export and CSV helpers.

mod container;
mod pgm;

pub use container::{Container, Kind, Payload, MAGIC};
pub use pgm::{read_pgm16, render_pgm16, write_pgm16};

use crate::grid::GridError;
use crate::solvers::{ReconReport, SolverError};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not an MPIR1 container (bad magic)")]
    BadMagic,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("duplicate header key '{0}'")]
    DuplicateKey(String),
    #[error("payload has {got} bytes, header implies {expected}")]
    PayloadLength { expected: usize, got: usize },
    #[error("expected a {expected} container, found {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },
    #[error("expected dtype {expected}, found {got}")]
    WrongDtype {
        expected: &'static str,
        got: &'static str,
    },
    #[error("malformed PGM: {0}")]
    BadPgm(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Header of the per-epoch convergence CSV.
pub const CONVERGENCE_CSV_HEADER: &str = "epoch,eps_r,residual,seconds";

/// One line per epoch: epoch, relative change, residual norm, seconds.
pub fn convergence_csv(report: &ReconReport) -> String {
    let mut out = String::from(CONVERGENCE_CSV_HEADER);
    out.push('\n');
    for (k, ((eps, res), t)) in report
        .rel_change_history
        .iter()
        .zip(&report.residual_history)
        .zip(&report.time_history)
        .enumerate()
    {
        out.push_str(&format!("{},{:e},{:e},{:.6}\n", k + 1, eps, res, t));
    }
    out
}
