//! Image quality measures.
//!
//! [`psnr`] is the plain inverse-MSE in decibels, without a peak term; it
//! first multiplies the reconstruction by the phantom weight σ to undo the
//! `x/σ` scaling of the forward model. [`ssim`] is the windowed structural
//! similarity index with the usual Gaussian 11×11 window (σ_w = 1.5) and
//! constants `K1 = 0.01`, `K2 = 0.03`.

use crate::grid::{GridError, ImageGrid};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_WINDOW_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// `10 log10(1 / mean((σ x_rec − x_true)²))`. Returns `f64::INFINITY` when
/// the error is exactly zero.
pub fn psnr(x_rec: &ImageGrid, x_true: &ImageGrid, sigma: f64) -> Result<f64, MetricsError> {
    x_rec.ensure_same_dims(x_true)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(MetricsError::InvalidSigma(sigma));
    }
    let sse: f64 = x_rec
        .values()
        .iter()
        .zip(x_true.values())
        .map(|(r, t)| (sigma * r - t).powi(2))
        .sum();
    let mse = sse / x_true.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * mse.log10())
}

/// Mean SSIM of two grids with the same dims.
///
/// Both images share one dynamic range `L = max(max x, max y)`, so
/// `ssim(a·x, a·y) = ssim(x, y)` for `a > 0` and the index is symmetric.
/// 1D grids are treated as a single row, 3D grids are averaged over their
/// slices along the last axis. Images smaller than the window use a window
/// clipped to the image. Two all-zero images score 1.
pub fn ssim(x: &ImageGrid, y: &ImageGrid) -> Result<f64, MetricsError> {
    x.ensure_same_dims(y)?;
    let peak = x.max().max(y.max());
    let dims = x.dims();
    match dims.len() {
        1 => Ok(ssim_2d(x.values(), y.values(), 1, dims[0], peak)),
        2 => Ok(ssim_2d(x.values(), y.values(), dims[0], dims[1], peak)),
        _ => {
            let (rows, cols, depth) = (dims[0], dims[1], dims[2]);
            let slice = |img: &ImageGrid, k: usize| -> Vec<f64> {
                (0..rows * cols)
                    .map(|p| img.values()[p * depth + k])
                    .collect()
            };
            let total: f64 = (0..depth)
                .map(|k| ssim_2d(&slice(x, k), &slice(y, k), rows, cols, peak))
                .sum();
            Ok(total / depth as f64)
        }
    }
}

fn gaussian_window(len: usize) -> Vec<f64> {
    let c = (len as f64 - 1.0) / 2.0;
    let w: Vec<f64> = (0..len)
        .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * SSIM_WINDOW_SIGMA * SSIM_WINDOW_SIGMA)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Largest odd length not above `min(len, SSIM_WINDOW)`.
fn window_len(len: usize) -> usize {
    let w = len.min(SSIM_WINDOW);
    if w.is_multiple_of(2) {
        w - 1
    } else {
        w
    }
}

fn ssim_2d(x: &[f64], y: &[f64], rows: usize, cols: usize, peak: f64) -> f64 {
    if peak <= 0.0 && x.iter().chain(y).all(|&v| v == 0.0) {
        return 1.0;
    }
    let range = if peak > 0.0 {
        peak
    } else {
        x.iter().chain(y).fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);
    let (wr, wc) = (window_len(rows), window_len(cols));
    let (gr, gc) = (gaussian_window(wr), gaussian_window(wc));
    let mut total = 0.0;
    let mut count = 0usize;
    for r0 in 0..=rows - wr {
        for c0 in 0..=cols - wc {
            let (mut mx, mut my) = (0.0, 0.0);
            for (i, wi) in gr.iter().enumerate() {
                for (j, wj) in gc.iter().enumerate() {
                    let p = (r0 + i) * cols + c0 + j;
                    mx += wi * wj * x[p];
                    my += wi * wj * y[p];
                }
            }
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for (i, wi) in gr.iter().enumerate() {
                for (j, wj) in gc.iter().enumerate() {
                    let p = (r0 + i) * cols + c0 + j;
                    let (dx, dy) = (x[p] - mx, y[p] - my);
                    vx += wi * wj * dx * dx;
                    vy += wi * wj * dy * dy;
                    cxy += wi * wj * dx * dy;
                }
            }
            total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    total / count as f64
}
