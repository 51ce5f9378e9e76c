//! Closed-form shrinkage rules, their composition with a tight frame and the
//! projection onto the nonnegative reals.
//!
//! All rules act on magnitudes and keep the phase (sign) of the input, so
//! they apply to real and complex coefficients alike through [`Coefficient`].
//! A magnitude exactly equal to the threshold maps to zero for every rule.

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::ImageGrid;
use crate::wavelet::{Udwt, WaveletError, WaveletPyramid};

#[derive(Debug, Error, PartialEq)]
pub enum ProxError {
    #[error("threshold must be a finite nonnegative number, got {0}")]
    InvalidLambda(f64),
    #[error("the NNG penalty is undefined for lambda = 0")]
    ZeroLambda,
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
}

/// Scalar types the shrinkage rules operate on.
pub trait Coefficient: Copy {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn scale(self, factor: f64) -> Self;
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
}

impl Coefficient for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
}

/// `x · max(1 - λ/|x|, 0)`
pub fn prox_soft<T: Coefficient>(x: T, lambda: f64) -> T {
    let m = x.magnitude();
    if m <= lambda {
        T::zero()
    } else {
        x.scale(1.0 - lambda / m)
    }
}

/// Non-negative Garrote, `x · max(1 - λ²/|x|², 0)`.
pub fn prox_nng<T: Coefficient>(x: T, lambda: f64) -> T {
    let m = x.magnitude();
    if m <= lambda {
        T::zero()
    } else {
        x.scale(1.0 - (lambda * lambda) / (m * m))
    }
}

pub fn prox_hard<T: Coefficient>(x: T, lambda: f64) -> T {
    if x.magnitude() <= lambda {
        T::zero()
    } else {
        x
    }
}

/// Penalty whose proximal map is the non-negative Garrote with threshold λ,
/// summed over `x`:
///
/// `Σ λ² + λ²·asinh(|x_i|/2λ) + λ²·|x_i| / (sqrt(|x_i|² + 4λ²) + |x_i|)`
///
/// The per-entry constant λ² does not move the minimiser.
pub fn nng_penalty_eval(x: &[f64], lambda: f64) -> Result<f64, ProxError> {
    if lambda == 0.0 {
        return Err(ProxError::ZeroLambda);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ProxError::InvalidLambda(lambda));
    }
    let l2 = lambda * lambda;
    Ok(x.iter()
        .map(|v| {
            let a = v.abs();
            l2 + l2 * (a / (2.0 * lambda)).asinh() + l2 * a / ((a * a + 4.0 * l2).sqrt() + a)
        })
        .sum())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ThresholdKind {
    Soft,
    #[default]
    Nng,
    Hard,
    None,
}

impl ThresholdKind {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdKind::Soft => "soft",
            ThresholdKind::Nng => "nng",
            ThresholdKind::Hard => "hard",
            ThresholdKind::None => "none",
        }
    }
}

/// A shrinkage rule with its threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdRule {
    pub kind: ThresholdKind,
    pub lambda: f64,
}

impl ThresholdRule {
    pub fn new(kind: ThresholdKind, lambda: f64) -> Result<Self, ProxError> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ProxError::InvalidLambda(lambda));
        }
        Ok(Self { kind, lambda })
    }

    pub fn soft(lambda: f64) -> Self {
        Self::new(ThresholdKind::Soft, lambda).expect("valid lambda")
    }

    pub fn nng(lambda: f64) -> Self {
        Self::new(ThresholdKind::Nng, lambda).expect("valid lambda")
    }

    pub fn identity() -> Self {
        Self {
            kind: ThresholdKind::None,
            lambda: 0.0,
        }
    }

    /// True when the rule maps every input to itself.
    pub fn is_identity(&self) -> bool {
        self.kind == ThresholdKind::None || self.lambda == 0.0
    }

    pub fn apply<T: Coefficient>(&self, x: T) -> T {
        match self.kind {
            ThresholdKind::Soft => prox_soft(x, self.lambda),
            ThresholdKind::Nng => prox_nng(x, self.lambda),
            ThresholdKind::Hard => prox_hard(x, self.lambda),
            ThresholdKind::None => x,
        }
    }

    pub fn apply_slice<T: Coefficient>(&self, xs: &mut [T]) {
        if self.kind == ThresholdKind::None {
            return;
        }
        xs.iter_mut().for_each(|x| *x = self.apply(*x));
    }

    /// Penalty whose proximal map is this rule, evaluated on `x`. Hard
    /// thresholding has no convex penalty and counts nonzeros instead
    /// (times λ²/2).
    pub fn penalty(&self, x: &[f64]) -> f64 {
        match self.kind {
            ThresholdKind::Soft => self.lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
            ThresholdKind::Nng if self.lambda > 0.0 => nng_penalty_eval(x, self.lambda).unwrap(),
            ThresholdKind::Hard => {
                0.5 * self.lambda * self.lambda * x.iter().filter(|v| **v != 0.0).count() as f64
            }
            _ => 0.0,
        }
    }
}

/// Proximal map of `g(x) = f(Φx)` for a tight frame `Φ*Φ = αI`:
///
/// `x + (1/α) Φ*(T(Φx) - Φx)`
///
/// The approximation band is only thresholded when `threshold_approx` is set.
pub fn prox_composed(
    x: &[f64],
    phi: &Udwt,
    rule: &ThresholdRule,
    threshold_approx: bool,
) -> Result<Vec<f64>, ProxError> {
    if rule.is_identity() {
        if x.len() != phi.grid_len() {
            return Err(WaveletError::ShapeMismatch(format!(
                "signal has {} samples, transform expects {}",
                x.len(),
                phi.grid_len()
            ))
            .into());
        }
        return Ok(x.to_vec());
    }
    let mut p = phi.forward(x)?;
    shrink_residual(&mut p, rule, threshold_approx);
    let correction = phi.adjoint(&p)?;
    let inv_alpha = 1.0 / phi.frame_constant();
    Ok(x.iter()
        .zip(correction)
        .map(|(v, c)| v + inv_alpha * c)
        .collect())
}

/// [`prox_composed`] on an [`ImageGrid`].
pub fn prox_composed_grid(
    x: &ImageGrid,
    phi: &Udwt,
    rule: &ThresholdRule,
    threshold_approx: bool,
) -> Result<ImageGrid, ProxError> {
    if x.dims() != phi.dims() {
        return Err(WaveletError::ShapeMismatch(format!(
            "image is {:?}, transform is {:?}",
            x.dims(),
            phi.dims()
        ))
        .into());
    }
    let values = prox_composed(x.values(), phi, rule, threshold_approx)?;
    Ok(ImageGrid::new(x.dims(), values).expect("dims checked"))
}

/// Complex variant: real and imaginary parts are analysed separately and the
/// rule acts on the complex coefficient magnitudes.
pub fn prox_composed_complex(
    x: &[Complex64],
    phi: &Udwt,
    rule: &ThresholdRule,
    threshold_approx: bool,
) -> Result<Vec<Complex64>, ProxError> {
    if rule.is_identity() {
        return Ok(x.to_vec());
    }
    let re: Vec<f64> = x.iter().map(|v| v.re).collect();
    let im: Vec<f64> = x.iter().map(|v| v.im).collect();
    let mut p_re = phi.forward(&re)?;
    let mut p_im = phi.forward(&im)?;
    let limit = if threshold_approx {
        p_re.coeffs().len()
    } else {
        p_re.details().len()
    };
    for (r, i) in p_re.coeffs_mut()[..limit]
        .iter_mut()
        .zip(&mut p_im.coeffs_mut()[..limit])
    {
        let c = Complex64::new(*r, *i);
        let d = rule.apply(c) - c;
        *r = d.re;
        *i = d.im;
    }
    if !threshold_approx {
        p_re.approx_mut().iter_mut().for_each(|v| *v = 0.0);
        p_im.approx_mut().iter_mut().for_each(|v| *v = 0.0);
    }
    let c_re = phi.adjoint(&p_re)?;
    let c_im = phi.adjoint(&p_im)?;
    let inv_alpha = 1.0 / phi.frame_constant();
    Ok(x.iter()
        .zip(c_re.iter().zip(&c_im))
        .map(|(v, (r, i))| v + Complex64::new(*r, *i) * inv_alpha)
        .collect())
}

/// Replaces every coefficient `c` by `T(c) - c`; an unthresholded
/// approximation band becomes zero.
fn shrink_residual(p: &mut WaveletPyramid, rule: &ThresholdRule, threshold_approx: bool) {
    for c in p.details_mut() {
        *c = rule.apply(*c) - *c;
    }
    if threshold_approx {
        for c in p.approx_mut() {
            *c = rule.apply(*c) - *c;
        }
    } else {
        p.approx_mut().iter_mut().for_each(|c| *c = 0.0);
    }
}

/// Real part clamped at zero.
pub fn project_nonneg(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|v| v.re.max(0.0)).collect()
}

pub fn project_nonneg_real(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0)).collect()
}

/// In-place projection of a complex iterate onto the nonnegative reals.
pub fn project_nonneg_in_place(x: &mut [Complex64]) {
    for v in x {
        *v = Complex64::new(v.re.max(0.0), 0.0);
    }
}
