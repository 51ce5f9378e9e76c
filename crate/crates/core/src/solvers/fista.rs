//! FISTA with the nonnegativity projection and the wavelet-domain proximal
//! step.

use num_complex::Complex64;

use super::{
    check_system, check_transform, composite_objective, relative_change, EpochInfo, FistaStep,
    ReconReport, RunLog, SolverConfig, SolverError, StopReason, SystemMatrix,
};
use crate::prox::{project_nonneg_in_place, prox_composed, prox_composed_complex, ThresholdRule};
use crate::wavelet::Udwt;

/// `t_k = (1 + sqrt(4 t_{k-1}² + 1)) / 2`
pub fn fista_momentum(t_prev: f64) -> f64 {
    (1.0 + (4.0 * t_prev * t_prev + 1.0).sqrt()) / 2.0
}

pub fn fista_reconstruct(
    a: &SystemMatrix,
    b: &[Complex64],
    cfg: &SolverConfig,
    phi: &Udwt,
) -> Result<ReconReport, SolverError> {
    fista_reconstruct_observed(a, b, cfg, phi, &mut |_| {})
}

/// One FISTA iteration counts as one epoch.
///
/// `cfg.gamma` holds ϱ, the largest eigenvalue of `A*A`. The gradient step is
/// `1/ϱ` (or `1/sqrt(ϱ)`, see [`FistaStep`]) and the shrinkage threshold is
/// `λ` times that step.
pub fn fista_reconstruct_observed(
    a: &SystemMatrix,
    b: &[Complex64],
    cfg: &SolverConfig,
    phi: &Udwt,
    observer: &mut dyn FnMut(&EpochInfo),
) -> Result<ReconReport, SolverError> {
    cfg.validate()?;
    check_system(a, b)?;
    check_transform(a, phi)?;
    let rho = cfg.gamma.ok_or(SolverError::MissingStepSize)?;
    let step = match cfg.fista_step {
        FistaStep::InverseEigenvalue => 1.0 / rho,
        FistaStep::InverseSqrtEigenvalue => 1.0 / rho.sqrt(),
    };
    let rule = ThresholdRule::new(cfg.rule, cfg.lambda * step)?;

    let n = a.cols();
    let zero = Complex64::new(0.0, 0.0);
    let mut x_prev = vec![zero; n];
    let mut z = x_prev.clone();
    let mut re = vec![0.0; n];
    let mut t = 1.0;
    let mut log = RunLog::new(cfg.track_objective);
    let mut stopped_by = StopReason::MaxEpochs;

    for epoch in 1..=cfg.max_epochs {
        let mut r = a.apply(&z);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= bi);
        let grad = a.apply_adjoint(&r);
        let mut y: Vec<Complex64> = z.iter().zip(&grad).map(|(zi, gi)| zi - gi * step).collect();
        if cfg.enforce_nonneg {
            project_nonneg_in_place(&mut y);
        }
        let x = if rule.is_identity() {
            y
        } else if cfg.enforce_nonneg {
            re.iter_mut().zip(&y).for_each(|(r, v)| *r = v.re);
            prox_composed(&re, phi, &rule, cfg.threshold_approx)?
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect()
        } else {
            prox_composed_complex(&y, phi, &rule, cfg.threshold_approx)?
        };
        let t_next = fista_momentum(t);
        let momentum = 1.0 + (t - 1.0) / t_next;
        for ((zi, xi), pi) in z.iter_mut().zip(&x).zip(&x_prev) {
            *zi = pi + (xi - pi) * momentum;
        }
        t = t_next;

        let rel_change = relative_change(&x_prev, &x);
        let residual = a.residual_norm(&x, b);
        let objective = if log.wants_objective() {
            Some(composite_objective(
                residual,
                &x,
                phi,
                &rule,
                1.0 / step,
                cfg.threshold_approx,
            )?)
        } else {
            None
        };
        x_prev = x;
        let elapsed_s = log.push(rel_change, residual, objective);
        observer(&EpochInfo {
            epoch,
            x: &x_prev,
            rel_change,
            residual,
            elapsed_s,
        });
        if rel_change < cfg.eps_r {
            stopped_by = StopReason::Tolerance;
            break;
        }
    }
    Ok(log.finish(a.grid_dims(), x_prev, cfg.enforce_nonneg, stopped_by))
}
