use num_complex::Complex64;

use super::{
    check_system, relative_change, EpochInfo, ReconReport, RowSchedule, RunLog, SolverConfig,
    SolverError, StopReason, SystemMatrix,
};
use crate::prox::project_nonneg_in_place;

/// One projection update per row in `order`:
/// `x ← x + (b_i - ⟨a_i, x⟩)/‖a_i‖² · conj(a_i)`.
pub fn kaczmarz_sweep_ordered(
    a: &SystemMatrix,
    b: &[Complex64],
    x: &mut [Complex64],
    order: &[usize],
) {
    let norms = a.row_norms();
    for &i in order {
        let beta = (b[i] - a.row_dot(i, x)) / (norms[i] * norms[i]);
        for (xj, aj) in x.iter_mut().zip(a.row(i)) {
            *xj += beta * aj.conj();
        }
    }
}

/// One cyclic sweep over all rows.
pub fn kaczmarz_sweep(
    a: &SystemMatrix,
    b: &[Complex64],
    x: &[Complex64],
) -> Result<Vec<Complex64>, SolverError> {
    check_system(a, b)?;
    if x.len() != a.cols() {
        return Err(SolverError::DimensionMismatch(format!(
            "x has {} entries, A has {} columns",
            x.len(),
            a.cols()
        )));
    }
    if let Some(i) = a.row_norms().iter().position(|&n| !(n > 0.0)) {
        return Err(SolverError::ZeroRow(i));
    }
    let mut out = x.to_vec();
    let order: Vec<usize> = (0..a.rows()).collect();
    kaczmarz_sweep_ordered(a, b, &mut out, &order);
    Ok(out)
}

/// Plain Kaczmarz from `x₀ = 0`; with `enforce_nonneg` the iterate is
/// projected onto the nonnegative reals after every sweep.
pub fn kaczmarz_reconstruct(
    a: &SystemMatrix,
    b: &[Complex64],
    cfg: &SolverConfig,
) -> Result<ReconReport, SolverError> {
    kaczmarz_reconstruct_observed(a, b, cfg, &mut |_| {})
}

pub fn kaczmarz_reconstruct_observed(
    a: &SystemMatrix,
    b: &[Complex64],
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&EpochInfo),
) -> Result<ReconReport, SolverError> {
    cfg.validate()?;
    check_system(a, b)?;
    if let Some(i) = a.row_norms().iter().position(|&n| !(n > 0.0)) {
        return Err(SolverError::ZeroRow(i));
    }
    let mut x = vec![Complex64::new(0.0, 0.0); a.cols()];
    let mut prev = x.clone();
    let mut schedule = RowSchedule::new(a.rows(), cfg.row_order);
    let mut log = RunLog::new(cfg.track_objective);
    let mut stopped_by = StopReason::MaxEpochs;
    for epoch in 1..=cfg.max_epochs {
        prev.copy_from_slice(&x);
        kaczmarz_sweep_ordered(a, b, &mut x, schedule.next_epoch());
        if cfg.enforce_nonneg {
            project_nonneg_in_place(&mut x);
        }
        let rel_change = relative_change(&prev, &x);
        let residual = a.residual_norm(&x, b);
        let objective = log.wants_objective().then_some(0.5 * residual * residual);
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
