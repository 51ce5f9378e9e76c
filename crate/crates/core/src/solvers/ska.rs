//! Sparse Kaczmarz: a full Kaczmarz sweep as the gradient step, followed by
//! the nonnegativity projection and the wavelet-domain proximal step, once
//! per epoch.

use num_complex::Complex64;

use super::{
    check_system, check_transform, composite_objective, kaczmarz_sweep_ordered, relative_change,
    EpochInfo, ReconReport, RowSchedule, RunLog, SolverConfig, SolverError, StopReason,
    SystemMatrix, ROW_NORM_TOL,
};
use crate::prox::{project_nonneg_in_place, prox_composed, prox_composed_complex};
use crate::wavelet::Udwt;

pub fn ska_reconstruct(
    a: &SystemMatrix,
    b: &[Complex64],
    cfg: &SolverConfig,
    phi: &Udwt,
) -> Result<ReconReport, SolverError> {
    ska_reconstruct_observed(a, b, cfg, phi, &mut |_| {})
}

/// [`ska_reconstruct`] calling `observer` after every epoch.
pub fn ska_reconstruct_observed(
    a: &SystemMatrix,
    b: &[Complex64],
    cfg: &SolverConfig,
    phi: &Udwt,
    observer: &mut dyn FnMut(&EpochInfo),
) -> Result<ReconReport, SolverError> {
    cfg.validate()?;
    check_system(a, b)?;
    check_transform(a, phi)?;
    // a single step size for every row needs ‖a_i‖ = 1
    a.ensure_row_normalized(ROW_NORM_TOL)?;
    let rule = cfg.threshold_rule()?;

    let n = a.cols();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut prev = x.clone();
    let mut re = vec![0.0; n];
    let mut schedule = RowSchedule::new(a.rows(), cfg.row_order);
    let mut log = RunLog::new(cfg.track_objective);
    let mut stopped_by = StopReason::MaxEpochs;

    for epoch in 1..=cfg.max_epochs {
        prev.copy_from_slice(&x);
        kaczmarz_sweep_ordered(a, b, &mut x, schedule.next_epoch());
        if cfg.enforce_nonneg {
            project_nonneg_in_place(&mut x);
        }
        if !rule.is_identity() {
            if cfg.enforce_nonneg {
                re.iter_mut().zip(&x).for_each(|(r, v)| *r = v.re);
                let shrunk = prox_composed(&re, phi, &rule, cfg.threshold_approx)?;
                x.iter_mut()
                    .zip(shrunk)
                    .for_each(|(v, s)| *v = Complex64::new(s, 0.0));
            } else {
                x = prox_composed_complex(&x, phi, &rule, cfg.threshold_approx)?;
            }
        }
        let rel_change = relative_change(&prev, &x);
        let residual = a.residual_norm(&x, b);
        let objective = if log.wants_objective() {
            Some(composite_objective(
                residual,
                &x,
                phi,
                &rule,
                1.0,
                cfg.threshold_approx,
            )?)
        } else {
            None
        };
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
