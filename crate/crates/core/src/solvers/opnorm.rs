use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SolverError, SystemMatrix};

/// Largest eigenvalue of `A*A` by power iteration.
///
/// Stops once the Rayleigh quotient `‖Av‖²` changes by less than `tol`
/// relative to its value. The start vector is a fixed pseudo-random vector,
/// so the result is deterministic.
pub fn power_iteration_opnorm(
    a: &SystemMatrix,
    tol: f64,
    max_it: usize,
) -> Result<f64, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<Complex64> = (0..a.cols())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    normalize(&mut v);
    let mut estimate = f64::NAN;
    for _ in 0..max_it {
        let av = a.apply(&v);
        let next: f64 = av.iter().map(|c| c.norm_sqr()).sum();
        if next == 0.0 {
            return Ok(0.0);
        }
        let converged = (next - estimate).abs() <= tol * next;
        estimate = next;
        if converged {
            return Ok(estimate);
        }
        v = a.apply_adjoint(&av);
        normalize(&mut v);
    }
    Err(SolverError::NoConvergence {
        best: estimate,
        iterations: max_it,
    })
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|c| *c /= n);
    }
}
