//! Row-action and proximal-gradient solvers for `Ax = b`.
//!
//! Every solver starts from `x₀ = 0`, counts one pass over all rows of `A`
//! as one epoch, and stops once the relative change between consecutive
//! epoch iterates drops below `eps_r` or the epoch cap is reached.

mod fista;
mod kaczmarz;
mod landweber;
mod matrix;
mod opnorm;
mod regkz;
mod ska;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::ImageGrid;
use crate::prox::{Coefficient, ProxError, ThresholdKind, ThresholdRule};
use crate::wavelet::{Udwt, WaveletError};

pub use fista::{fista_momentum, fista_reconstruct, fista_reconstruct_observed};
pub use kaczmarz::{
    kaczmarz_reconstruct, kaczmarz_reconstruct_observed, kaczmarz_sweep, kaczmarz_sweep_ordered,
};
pub use landweber::{landweber_step, least_squares_gradient};
pub use matrix::SystemMatrix;
pub use opnorm::power_iteration_opnorm;
pub use regkz::{regkz_reconstruct, regkz_reconstruct_observed};
pub use ska::{ska_reconstruct, ska_reconstruct_observed};

/// Row norms must be within this distance of one for the normalised solvers.
pub const ROW_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("row {0} has zero norm")]
    ZeroRow(usize),
    #[error("system matrix is not row-normalised (row {row} has norm {norm})")]
    NotRowNormalized { row: usize, norm: f64 },
    #[error("FISTA needs the operator norm of A (gamma) to set its step size")]
    MissingStepSize,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("power iteration did not converge in {iterations} iterations (best estimate {best})")]
    NoConvergence { best: f64, iterations: usize },
    #[error("{0} is not implemented")]
    NotImplemented(&'static str),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Prox(#[from] ProxError),
}

/// Order in which a sweep visits the rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RowOrder {
    #[default]
    Cyclic,
    /// A fresh random permutation every epoch, seeded.
    Shuffled(u64),
}

/// FISTA step size as a function of ϱ, the largest eigenvalue of `A*A`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FistaStep {
    /// `1/ϱ`, the Lipschitz step.
    #[default]
    InverseEigenvalue,
    /// `1/sqrt(ϱ)`.
    InverseSqrtEigenvalue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Regularisation weight λ (threshold of the shrinkage rule).
    pub lambda: f64,
    pub rule: ThresholdKind,
    pub max_epochs: usize,
    pub eps_r: f64,
    /// Largest eigenvalue of `A*A`; required by FISTA.
    pub gamma: Option<f64>,
    pub fista_step: FistaStep,
    /// Tikhonov weight of the regularised Kaczmarz baseline.
    pub rho: f64,
    pub row_order: RowOrder,
    pub enforce_nonneg: bool,
    /// Also shrink the coarsest approximation band.
    pub threshold_approx: bool,
    /// Record the composite objective per epoch.
    pub track_objective: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            rule: ThresholdKind::Nng,
            max_epochs: 3000,
            eps_r: 1e-5,
            gamma: None,
            fista_step: FistaStep::InverseEigenvalue,
            rho: 0.0,
            row_order: RowOrder::Cyclic,
            enforce_nonneg: true,
            threshold_approx: false,
            track_objective: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.eps_r > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "eps_r must be > 0, got {}",
                self.eps_r
            )));
        }
        if self.max_epochs == 0 {
            return Err(SolverError::InvalidConfig("max_epochs must be >= 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(SolverError::InvalidConfig(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(SolverError::InvalidConfig(format!(
                "rho must be >= 0, got {}",
                self.rho
            )));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(SolverError::InvalidConfig(format!(
                    "gamma must be > 0, got {g}"
                )));
            }
        }
        Ok(())
    }

    pub fn threshold_rule(&self) -> Result<ThresholdRule, SolverError> {
        Ok(ThresholdRule::new(self.rule, self.lambda)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    MaxEpochs,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Tolerance => "tolerance",
            StopReason::MaxEpochs => "max_epochs",
        }
    }
}

/// Result of a solver run.
#[derive(Clone, Debug)]
pub struct ReconReport {
    /// Final iterate as a real image (projected when nonnegativity is on,
    /// otherwise the real part).
    pub x: ImageGrid,
    /// Final iterate before the real-part/projection step.
    pub x_raw: Vec<Complex64>,
    pub epochs_run: usize,
    pub rel_change_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub objective_history: Option<Vec<f64>>,
    /// Seconds since the start of the run at the end of each epoch.
    pub time_history: Vec<f64>,
    pub wall_time_s: f64,
    pub stopped_by: StopReason,
}

/// Per-epoch state handed to observers.
pub struct EpochInfo<'a> {
    pub epoch: usize,
    pub x: &'a [Complex64],
    pub rel_change: f64,
    pub residual: f64,
    pub elapsed_s: f64,
}

/// `‖x_prev - x_next‖ / ‖x_prev‖`, or `‖x_next‖` when `x_prev = 0`.
pub fn relative_change<T: Coefficient + std::ops::Sub<Output = T>>(
    x_prev: &[T],
    x_next: &[T],
) -> f64 {
    debug_assert_eq!(x_prev.len(), x_next.len());
    let mut diff = 0.0;
    let mut prev = 0.0;
    for (&p, &q) in x_prev.iter().zip(x_next) {
        let d = (p - q).magnitude();
        diff += d * d;
        let m = p.magnitude();
        prev += m * m;
    }
    if prev == 0.0 {
        x_next
            .iter()
            .map(|v| v.magnitude().powi(2))
            .sum::<f64>()
            .sqrt()
    } else {
        diff.sqrt() / prev.sqrt()
    }
}

/// True iff the relative change from `x_prev` to `x_next` is below `eps_r`.
pub fn stop_check<T: Coefficient + std::ops::Sub<Output = T>>(
    x_prev: &[T],
    x_next: &[T],
    eps_r: f64,
) -> bool {
    relative_change(x_prev, x_next) < eps_r
}

pub(crate) struct RowSchedule {
    order: Vec<usize>,
    rng: Option<ChaCha8Rng>,
}

impl RowSchedule {
    pub(crate) fn new(rows: usize, order: RowOrder) -> Self {
        Self {
            order: (0..rows).collect(),
            rng: match order {
                RowOrder::Cyclic => None,
                RowOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            },
        }
    }

    pub(crate) fn next_epoch(&mut self) -> &[usize] {
        if let Some(rng) = self.rng.as_mut() {
            self.order.shuffle(rng);
        }
        &self.order
    }
}

/// Accumulates the per-epoch histories of a run.
pub(crate) struct RunLog {
    start: Instant,
    rel_change: Vec<f64>,
    residual: Vec<f64>,
    objective: Option<Vec<f64>>,
    time: Vec<f64>,
}

impl RunLog {
    pub(crate) fn new(track_objective: bool) -> Self {
        Self {
            start: Instant::now(),
            rel_change: Vec::new(),
            residual: Vec::new(),
            objective: track_objective.then(Vec::new),
            time: Vec::new(),
        }
    }

    pub(crate) fn wants_objective(&self) -> bool {
        self.objective.is_some()
    }

    /// Records one epoch and returns its elapsed time.
    pub(crate) fn push(&mut self, rel_change: f64, residual: f64, objective: Option<f64>) -> f64 {
        let t = self.start.elapsed().as_secs_f64();
        self.rel_change.push(rel_change);
        self.residual.push(residual);
        if let (Some(hist), Some(v)) = (self.objective.as_mut(), objective) {
            hist.push(v);
        }
        self.time.push(t);
        t
    }

    pub(crate) fn finish(
        self,
        dims: &[usize],
        x_raw: Vec<Complex64>,
        enforce_nonneg: bool,
        stopped_by: StopReason,
    ) -> ReconReport {
        let values = x_raw
            .iter()
            .map(|v| if enforce_nonneg { v.re.max(0.0) } else { v.re })
            .collect();
        ReconReport {
            x: ImageGrid::new(dims, values).expect("solver output matches grid"),
            x_raw,
            epochs_run: self.rel_change.len(),
            rel_change_history: self.rel_change,
            residual_history: self.residual,
            objective_history: self.objective,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            time_history: self.time,
            stopped_by,
        }
    }
}

pub(crate) fn check_system(a: &SystemMatrix, b: &[Complex64]) -> Result<(), SolverError> {
    if b.len() != a.rows() {
        return Err(SolverError::DimensionMismatch(format!(
            "b has {} entries, A has {} rows",
            b.len(),
            a.rows()
        )));
    }
    Ok(())
}

pub(crate) fn check_transform(a: &SystemMatrix, phi: &Udwt) -> Result<(), SolverError> {
    if phi.dims() != a.grid_dims() {
        return Err(SolverError::DimensionMismatch(format!(
            "wavelet grid {:?} does not match matrix grid {:?}",
            phi.dims(),
            a.grid_dims()
        )));
    }
    Ok(())
}

/// `½‖Ax - b‖² + weight · penalty(Φx)` where the penalty is the one whose
/// proximal map is `rule`, applied to the bands the rule thresholds.
pub(crate) fn composite_objective(
    residual: f64,
    x: &[Complex64],
    phi: &Udwt,
    rule: &ThresholdRule,
    weight: f64,
    threshold_approx: bool,
) -> Result<f64, SolverError> {
    let data = 0.5 * residual * residual;
    if rule.is_identity() {
        return Ok(data);
    }
    let re: Vec<f64> = x.iter().map(|v| v.re).collect();
    let p = phi.forward(&re)?;
    let coeffs = if threshold_approx {
        p.coeffs()
    } else {
        p.details()
    };
    Ok(data + weight * rule.penalty(coeffs))
}

/// Reconstruction methods the CLI and the benchmark can select by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    SkaNng,
    SkaSoft,
    FistaNng,
    FistaSoft,
    Regkz,
    Kaczmarz,
    /// Listed in benchmark tables only; no solver behind it.
    FusedLasso,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::SkaNng,
        Algorithm::SkaSoft,
        Algorithm::FistaNng,
        Algorithm::FistaSoft,
        Algorithm::Regkz,
        Algorithm::Kaczmarz,
        Algorithm::FusedLasso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::SkaNng => "ska-nng",
            Algorithm::SkaSoft => "ska-st",
            Algorithm::FistaNng => "fista-nng",
            Algorithm::FistaSoft => "fista-st",
            Algorithm::Regkz => "regkz",
            Algorithm::Kaczmarz => "kaczmarz",
            Algorithm::FusedLasso => "fused-lasso",
        }
    }

    pub fn needs_op_norm(self) -> bool {
        matches!(self, Algorithm::FistaNng | Algorithm::FistaSoft)
    }

    /// Runs the method with `lambda` as its regularisation weight (ρ for the
    /// Tikhonov baseline). Other settings come from `base`.
    pub fn run(
        self,
        a: &SystemMatrix,
        b: &[Complex64],
        lambda: f64,
        base: &SolverConfig,
        phi: &Udwt,
        observer: &mut dyn FnMut(&EpochInfo),
    ) -> Result<ReconReport, SolverError> {
        let mut cfg = base.clone();
        match self {
            Algorithm::SkaNng | Algorithm::SkaSoft => {
                cfg.lambda = lambda;
                cfg.rule = if self == Algorithm::SkaNng {
                    ThresholdKind::Nng
                } else {
                    ThresholdKind::Soft
                };
                ska_reconstruct_observed(a, b, &cfg, phi, observer)
            }
            Algorithm::FistaNng | Algorithm::FistaSoft => {
                cfg.lambda = lambda;
                cfg.rule = if self == Algorithm::FistaNng {
                    ThresholdKind::Nng
                } else {
                    ThresholdKind::Soft
                };
                fista_reconstruct_observed(a, b, &cfg, phi, observer)
            }
            Algorithm::Regkz => {
                cfg.rho = lambda;
                regkz_reconstruct_observed(a, b, &cfg, observer)
            }
            Algorithm::Kaczmarz => kaczmarz_reconstruct_observed(a, b, &cfg, observer),
            Algorithm::FusedLasso => Err(SolverError::NotImplemented("the fused lasso solver")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                format!(
                    "unknown algorithm '{s}' (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_check_hand_cases() {
        let x = [1.0, 0.0];
        assert!(stop_check(&x, &x, 1e-12));
        assert!(stop_check(&[1.0, 0.0], &[1.0, 1e-6], 1e-5));
        assert!(!stop_check(&[1.0, 0.0], &[1.0, 1e-4], 1e-5));
    }

    #[test]
    fn zero_previous_convention() {
        assert_eq!(relative_change(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert!(stop_check(&[0.0, 0.0], &[0.0, 0.0], 1e-5));
        assert_eq!(relative_change(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        let z = Complex64::new(0.0, 0.0);
        assert!(!stop_check(&[z], &[Complex64::new(0.0, 1.0)], 0.5));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = [
            SolverConfig {
                eps_r: 0.0,
                ..Default::default()
            },
            SolverConfig {
                max_epochs: 0,
                ..Default::default()
            },
            SolverConfig {
                lambda: -1.0,
                ..Default::default()
            },
            SolverConfig {
                rho: -1.0,
                ..Default::default()
            },
            SolverConfig {
                gamma: Some(0.0),
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(
                matches!(cfg.validate(), Err(SolverError::InvalidConfig(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn shuffled_schedule_is_deterministic_permutation() {
        let mut a = RowSchedule::new(10, RowOrder::Shuffled(4));
        let mut b = RowSchedule::new(10, RowOrder::Shuffled(4));
        for _ in 0..3 {
            let pa = a.next_epoch().to_vec();
            assert_eq!(pa, b.next_epoch());
            let mut sorted = pa.clone();
            sorted.sort();
            assert_eq!(sorted, (0..10).collect::<Vec<_>>());
        }
        let mut c = RowSchedule::new(4, RowOrder::Cyclic);
        assert_eq!(c.next_epoch(), &[0, 1, 2, 3]);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("ska".parse::<Algorithm>().is_err());
    }
}
