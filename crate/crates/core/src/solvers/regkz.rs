//! Tikhonov-regularised Kaczmarz: Kaczmarz on the augmented system
//! `[A  sqrt(ρ) I] [x; v] = b`, whose minimum-norm solution solves
//! `(A*A + ρI) x = A*b`.

use num_complex::Complex64;

use super::{
    check_system, relative_change, EpochInfo, ReconReport, RowSchedule, RunLog, SolverConfig,
    SolverError, StopReason, SystemMatrix,
};
use crate::prox::project_nonneg_in_place;

pub fn regkz_reconstruct(
    a: &SystemMatrix,
    b: &[Complex64],
    cfg: &SolverConfig,
) -> Result<ReconReport, SolverError> {
    regkz_reconstruct_observed(a, b, cfg, &mut |_| {})
}

pub fn regkz_reconstruct_observed(
    a: &SystemMatrix,
    b: &[Complex64],
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&EpochInfo),
) -> Result<ReconReport, SolverError> {
    cfg.validate()?;
    check_system(a, b)?;
    let sqrt_rho = cfg.rho.sqrt();
    let norms = a.row_norms();
    if let Some(i) = norms.iter().position(|&n| !(n * n + cfg.rho > 0.0)) {
        return Err(SolverError::ZeroRow(i));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; a.cols()];
    let mut v = vec![zero; a.rows()];
    let mut prev = x.clone();
    let mut schedule = RowSchedule::new(a.rows(), cfg.row_order);
    let mut log = RunLog::new(cfg.track_objective);
    let mut stopped_by = StopReason::MaxEpochs;

    for epoch in 1..=cfg.max_epochs {
        prev.copy_from_slice(&x);
        for &i in schedule.next_epoch() {
            let beta =
                (b[i] - a.row_dot(i, &x) - v[i] * sqrt_rho) / (norms[i] * norms[i] + cfg.rho);
            for (xj, aj) in x.iter_mut().zip(a.row(i)) {
                *xj += beta * aj.conj();
            }
            v[i] += beta * sqrt_rho;
        }
        if cfg.enforce_nonneg {
            project_nonneg_in_place(&mut x);
        }
        let rel_change = relative_change(&prev, &x);
        let residual = a.residual_norm(&x, b);
        let objective = log.wants_objective().then(|| {
            0.5 * residual * residual + cfg.rho * x.iter().map(|v| v.norm_sqr()).sum::<f64>()
        });
        let elapsed_s = log.push(rel_change, residual, objective);
        observer(&EpochInfo {
            epoch,
            x: &x,
            rel_change,
            residual,
            elapsed_s,
        });
        if rel_change < cfg.eps_r {
            stopped_by = StopReason::Tolerance;
            break;
        }
    }
    Ok(log.finish(a.grid_dims(), x, cfg.enforce_nonneg, stopped_by))
}
