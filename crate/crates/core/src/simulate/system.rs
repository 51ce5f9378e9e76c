//! Desk-scale stand-ins for a measured MPI system matrix.
//!
//! Rows carry a synthetic receive frequency (strictly increasing with the row
//! index) and a synthetic SNR that falls off with frequency, so the usual
//! band-pass and SNR row selection can be exercised.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::noise::noise_envelope;
use super::SimulateError;
use crate::grid::check_dims;
use crate::solvers::SystemMatrix;

/// Frequency tag of the first row.
pub const FREQ_MIN_HZ: f64 = 80e3;
/// Frequency tag of the last row (receiver bandwidth).
pub const FREQ_MAX_HZ: f64 = 4.375e6;

/// SNR tag of a row at zero spatial frequency before jitter.
const SNR_REF: f64 = 50.0;
/// Gaussian transfer function cut-off, in cycles per sample.
const BLUR_CUTOFF: f64 = 0.2;
/// Depth of the smooth receive-channel sensitivity modulation.
const SENSITIVITY_DEPTH: f64 = 0.3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MatrixModel {
    /// Fourier rows of a Gaussian-blurred point response. Rows are split
    /// into `ceil(m/n)` receive channels; each channel has a smooth amplitude
    /// sensitivity and channel `c` a quadratic phase of rate `c`, so rows of
    /// different channels are nearly orthogonal rather than duplicates.
    #[default]
    FourierBlur,
    /// Smoothed complex Gaussian random rows.
    RandomSmooth,
}

impl MatrixModel {
    pub fn name(self) -> &'static str {
        match self {
            MatrixModel::FourierBlur => "fourier-blur",
            MatrixModel::RandomSmooth => "random-smooth",
        }
    }
}

impl std::str::FromStr for MatrixModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fourier-blur" => Ok(MatrixModel::FourierBlur),
            "random-smooth" => Ok(MatrixModel::RandomSmooth),
            _ => Err(format!(
                "unknown matrix model '{s}' (expected fourier-blur or random-smooth)"
            )),
        }
    }
}

fn row_frequencies(m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![FREQ_MIN_HZ];
    }
    let step = (FREQ_MAX_HZ - FREQ_MIN_HZ) / (m - 1) as f64;
    (0..m).map(|i| FREQ_MIN_HZ + step * i as f64).collect()
}

/// Deterministic (in `seed`) synthetic system matrix for a grid of shape
/// `dims` with `m_rows` rows.
pub fn synth_system_matrix(
    dims: &[usize],
    m_rows: usize,
    seed: u64,
    model: MatrixModel,
) -> Result<SystemMatrix, SimulateError> {
    let n = check_dims(dims)?;
    if m_rows == 0 {
        return Err(SimulateError::InvalidArgument(
            "system matrix needs at least one row".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let freq = row_frequencies(m_rows);
    let (entries, gains) = match model {
        MatrixModel::FourierBlur => fourier_blur_rows(dims, n, m_rows, &mut rng),
        MatrixModel::RandomSmooth => random_smooth_rows(dims, n, m_rows, &mut rng),
    };
    let snr: Vec<f64> = gains
        .iter()
        .zip(&freq)
        .map(|(g, &f)| {
            let jitter: f64 = rng.sample(StandardNormal);
            SNR_REF * g / noise_envelope(f) * (0.15 * jitter).exp()
        })
        .collect();
    Ok(SystemMatrix::new(m_rows, entries, dims)?
        .with_row_freq_hz(freq)?
        .with_row_snr(snr)?)
}

/// Signed DFT frequency of index `k` on an axis of length `len`.
fn signed_freq(k: usize, len: usize) -> i64 {
    let k = k as i64;
    let len = len as i64;
    if k >= (len + 1) / 2 {
        k - len
    } else {
        k
    }
}

fn multi_index(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for a in (0..dims.len()).rev() {
        idx[a] = flat % dims[a];
        flat /= dims[a];
    }
    idx
}

fn fourier_blur_rows(
    dims: &[usize],
    n: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Complex64>, Vec<f64>) {
    let d = dims.len();
    // spatial frequencies ordered by radius in cycles per sample
    let mut freqs: Vec<(f64, Vec<i64>)> = (0..n)
        .map(|flat| {
            let k: Vec<i64> = multi_index(flat, dims)
                .iter()
                .zip(dims)
                .map(|(&i, &len)| signed_freq(i, len))
                .collect();
            let radius = k
                .iter()
                .zip(dims)
                .map(|(&ki, &len)| (ki as f64 / len as f64).powi(2))
                .sum::<f64>()
                .sqrt();
            (radius, k)
        })
        .collect();
    freqs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let channels = m.div_ceil(n);
    let sensitivity: Vec<Vec<Complex64>> = (0..channels)
        .map(|c| {
            let axis = c % d;
            let theta = rng.random_range(0.0..2.0 * PI);
            (0..n)
                .map(|flat| {
                    let idx = multi_index(flat, dims);
                    let p = idx[axis] as f64;
                    let amp =
                        1.0 + SENSITIVITY_DEPTH * (2.0 * PI * p / dims[axis] as f64 + theta).cos();
                    // every further channel sees the field through its own chirp
                    let chirp: f64 = idx
                        .iter()
                        .zip(dims)
                        .map(|(&q, &len)| PI * c as f64 * (q * q) as f64 / len as f64)
                        .sum();
                    Complex64::from_polar(amp, chirp)
                })
                .collect()
        })
        .collect();

    let positions: Vec<Vec<usize>> = (0..n).map(|flat| multi_index(flat, dims)).collect();
    let mut entries = Vec::with_capacity(m * n);
    let mut gains = Vec::with_capacity(m);
    for row in 0..m {
        let (radius, k) = &freqs[row / channels];
        let sens = &sensitivity[row % channels];
        let gain = (-0.5 * (radius / BLUR_CUTOFF).powi(2)).exp();
        let phase0 = rng.random_range(0.0..2.0 * PI);
        for (p, s) in positions.iter().zip(sens) {
            let arg: f64 = k
                .iter()
                .zip(p)
                .zip(dims)
                .map(|((&ki, &pi), &len)| ki as f64 * pi as f64 / len as f64)
                .sum();
            entries.push(s * Complex64::from_polar(gain, phase0 - 2.0 * PI * arg));
        }
        gains.push(gain);
    }
    (entries, gains)
}

fn random_smooth_rows(
    dims: &[usize],
    n: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Complex64>, Vec<f64>) {
    let positions: Vec<Vec<usize>> = (0..n).map(|flat| multi_index(flat, dims)).collect();
    let mut entries = Vec::with_capacity(m * n);
    let mut gains = Vec::with_capacity(m);
    let mut raw = vec![Complex64::new(0.0, 0.0); n];
    for row in 0..m {
        for v in raw.iter_mut() {
            *v = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        // periodic [1 2 1]/4 smoothing along every axis
        let mut smooth = raw.clone();
        for axis in 0..dims.len() {
            let prev = smooth.clone();
            for (flat, p) in positions.iter().enumerate() {
                let len = dims[axis];
                let mut q = p.clone();
                q[axis] = (p[axis] + len - 1) % len;
                let left = prev[flat_index(&q, dims)];
                q[axis] = (p[axis] + 1) % len;
                let right = prev[flat_index(&q, dims)];
                smooth[flat] = (left + prev[flat] * 2.0 + right) * 0.25;
            }
        }
        let gain = (-3.0 * row as f64 / m as f64).exp();
        entries.extend(smooth.iter().map(|v| v * gain));
        gains.push(gain);
    }
    (entries, gains)
}

fn flat_index(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}
