use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SimulateError;
use crate::grid::ImageGrid;
use crate::solvers::SystemMatrix;

/// Background amplitude used by the benchmark and the CLI.
pub const DEFAULT_NOISE_LEVEL: f64 = 0.01;

/// Knee of the receive-chain noise spectrum.
const NOISE_KNEE_HZ: f64 = 4e6;

/// Relative noise magnitude at frequency `f_hz`: flat below the knee,
/// falling like `1/f` above it.
pub fn noise_envelope(f_hz: f64) -> f64 {
    1.0 / (1.0 + f_hz.max(0.0) / NOISE_KNEE_HZ)
}

/// Phantom weight σ and the background vector η of `b = A(x/σ) + η`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub background: Vec<Complex64>,
    pub seed: u64,
}

impl NoiseModel {
    /// Noise-free model.
    pub fn noiseless(sigma: f64, rows: usize) -> Self {
        Self {
            sigma,
            background: vec![Complex64::new(0.0, 0.0); rows],
            seed: 0,
        }
    }

    /// Colored complex Gaussian background for the rows of `a`.
    pub fn colored(a: &SystemMatrix, sigma: f64, level: f64, seed: u64) -> Self {
        Self {
            sigma,
            background: colored_background(a, level, seed),
            seed,
        }
    }
}

/// `η_i = level · envelope(f_i) · (ξ + iζ)/sqrt(2)` with standard normal
/// `ξ, ζ`. Rows without a frequency tag are spread evenly over the band.
pub fn colored_background(a: &SystemMatrix, level: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = a.rows();
    (0..m)
        .map(|i| {
            let f = match a.row_freq_hz() {
                Some(freq) => freq[i],
                None => {
                    super::FREQ_MIN_HZ
                        + (super::FREQ_MAX_HZ - super::FREQ_MIN_HZ) * i as f64 / m as f64
                }
            };
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * (level * noise_envelope(f) / std::f64::consts::SQRT_2)
        })
        .collect()
}

/// `b = A(x/σ) + η`.
pub fn forward_simulate(
    a: &SystemMatrix,
    x: &ImageGrid,
    noise: &NoiseModel,
) -> Result<Vec<Complex64>, SimulateError> {
    if !(noise.sigma > 0.0) {
        return Err(SimulateError::InvalidSigma(noise.sigma));
    }
    if x.len() != a.cols() {
        return Err(SimulateError::InvalidArgument(format!(
            "phantom has {} voxels, system matrix has {} columns",
            x.len(),
            a.cols()
        )));
    }
    if noise.background.len() != a.rows() {
        return Err(SimulateError::InvalidArgument(format!(
            "background has {} entries, system matrix has {} rows",
            noise.background.len(),
            a.rows()
        )));
    }
    let scaled: Vec<f64> = x.values().iter().map(|v| v / noise.sigma).collect();
    let mut b = a.apply_real(&scaled);
    b.iter_mut()
        .zip(&noise.background)
        .for_each(|(bi, ei)| *bi += ei);
    Ok(b)
}
