//! Undecimated (à trous / stationary) discrete wavelet transform in 1, 2 and
//! 3 dimensions with periodic boundaries.
//!
//! The transform is separable: at every level each axis is filtered with the
//! low- and high-pass taps, dilated by `2^(j-1)`, which gives `2^d` subbands
//! per level. The all-low subband feeds the next level. No subband is ever
//! downsampled, so every band has the spatial extent of the input.
//!
//! Under [`Normalization::Parseval`] the taps are multiplied by `1/sqrt(2)` on
//! every axis and level, which makes the analysis operator a Parseval tight
//! frame (`Φ*Φ = I`). The inverse is then simply the adjoint. An independent
//! inverse through ε-decimated reconstructions (even and odd polyphase
//! components averaged) is provided as [`Udwt::inverse_decimated`].

use std::f64::consts::FRAC_1_SQRT_2;

use thiserror::Error;

use crate::grid::{check_dims, GridError, ImageGrid};

#[derive(Debug, Error, PartialEq)]
pub enum WaveletError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("at least one decomposition level is required")]
    ZeroLevels,
    #[error("axis {axis} has length {len}, needs at least {needed} for {levels} levels")]
    DimensionTooSmall {
        axis: usize,
        len: usize,
        needed: usize,
        levels: usize,
    },
    #[error("decimated reconstruction needs every axis divisible by {needed}, axis {axis} has length {len}")]
    NotDyadic {
        axis: usize,
        len: usize,
        needed: usize,
    },
    #[error("input has odd length {0}")]
    OddLength(usize),
    #[error("pyramid does not match transform: {0}")]
    ShapeMismatch(String),
    #[error("filter pair is not an orthonormal quadrature-mirror pair: {0}")]
    NotOrthonormal(String),
    #[error("unscaled undecimated transform is only a tight frame for one level")]
    NotTight,
}

/// Decomposition and reconstruction taps of an orthonormal wavelet.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterPair {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub lo_r: Vec<f64>,
    pub hi_r: Vec<f64>,
}

impl FilterPair {
    pub fn haar() -> Self {
        Self::from_lowpass(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]).expect("haar taps are orthonormal")
    }

    /// Daubechies wavelet with two vanishing moments (4 taps).
    pub fn db2() -> Self {
        let s3 = 3f64.sqrt();
        let k = 4.0 * 2f64.sqrt();
        Self::from_lowpass(vec![
            (1.0 + s3) / k,
            (3.0 + s3) / k,
            (3.0 - s3) / k,
            (1.0 - s3) / k,
        ])
        .expect("db2 taps are orthonormal")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "haar" | "db1" => Some(Self::haar()),
            "db2" => Some(Self::db2()),
            _ => None,
        }
    }

    /// Builds the quadrature-mirror high-pass `hi[k] = (-1)^k lo[L-1-k]` and
    /// time-reversed reconstruction taps, then checks orthonormality of the
    /// double-shifted taps.
    pub fn from_lowpass(lo: Vec<f64>) -> Result<Self, WaveletError> {
        let len = lo.len();
        if len < 2 || !len.is_multiple_of(2) {
            return Err(WaveletError::NotOrthonormal(format!(
                "low-pass must have even length >= 2, got {len}"
            )));
        }
        let hi: Vec<f64> = (0..len)
            .map(|k| {
                if k % 2 == 0 {
                    lo[len - 1 - k]
                } else {
                    -lo[len - 1 - k]
                }
            })
            .collect();
        let pair = Self {
            lo_r: lo.iter().rev().copied().collect(),
            hi_r: hi.iter().rev().copied().collect(),
            lo,
            hi,
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    fn validate(&self) -> Result<(), WaveletError> {
        const TOL: f64 = 1e-12;
        let shifted = |a: &[f64], b: &[f64], shift: usize| -> f64 {
            (0..a.len())
                .filter(|&k| k + shift < b.len())
                .map(|k| a[k + shift] * b[k])
                .sum()
        };
        for shift in (0..self.len()).step_by(2) {
            let want = if shift == 0 { 1.0 } else { 0.0 };
            let ll = shifted(&self.lo, &self.lo, shift);
            let hh = shifted(&self.hi, &self.hi, shift);
            let lh = shifted(&self.lo, &self.hi, shift);
            let hl = shifted(&self.hi, &self.lo, shift);
            if (ll - want).abs() > TOL
                || (hh - want).abs() > TOL
                || lh.abs() > TOL
                || hl.abs() > TOL
            {
                return Err(WaveletError::NotOrthonormal(format!(
                    "double-shift {shift}: <lo,lo>={ll}, <hi,hi>={hh}, <lo,hi>={lh}"
                )));
            }
        }
        Ok(())
    }
}

/// How the undecimated taps are scaled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    /// Taps scaled by `1/sqrt(2)` per axis and level; frame constant 1.
    #[default]
    Parseval,
    /// Orthonormal taps used as-is; frame constant `2^d`, single level only.
    Unscaled,
}

/// Redundant multi-level subband stack.
///
/// Coefficients are stored flat: the `2^d - 1` detail bands of level 1, then
/// those of level 2, ..., then the level-`J` approximation. Within a level the
/// detail band index is the axis mask minus one, where bit `a` of the mask
/// selects the high-pass filter along axis `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletPyramid {
    dims: Vec<usize>,
    levels: usize,
    frame_constant: f64,
    coeffs: Vec<f64>,
}

impl WaveletPyramid {
    pub fn zeros(dims: &[usize], levels: usize, frame_constant: f64) -> Result<Self, WaveletError> {
        let n = check_dims(dims)?;
        let bands = levels * ((1 << dims.len()) - 1) + 1;
        Ok(Self {
            dims: dims.to_vec(),
            levels,
            frame_constant,
            coeffs: vec![0.0; bands * n],
        })
    }

    pub fn from_coeffs(
        dims: &[usize],
        levels: usize,
        frame_constant: f64,
        coeffs: Vec<f64>,
    ) -> Result<Self, WaveletError> {
        let mut p = Self::zeros(dims, levels, frame_constant)?;
        if coeffs.len() != p.coeffs.len() {
            return Err(WaveletError::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                p.coeffs.len(),
                coeffs.len()
            )));
        }
        p.coeffs = coeffs;
        Ok(p)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn frame_constant(&self) -> f64 {
        self.frame_constant
    }

    pub fn grid_len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn details_per_level(&self) -> usize {
        (1 << self.dims.len()) - 1
    }

    pub fn band_count(&self) -> usize {
        self.levels * self.details_per_level() + 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Detail coefficients of every level, followed by nothing: the
    /// approximation band is excluded.
    pub fn details(&self) -> &[f64] {
        &self.coeffs[..self.approx_offset()]
    }

    pub fn details_mut(&mut self) -> &mut [f64] {
        let off = self.approx_offset();
        &mut self.coeffs[..off]
    }

    /// Detail band `mask` (1..2^d) of `level` (1..=J).
    pub fn detail(&self, level: usize, mask: usize) -> &[f64] {
        let off = self.detail_offset(level, mask);
        &self.coeffs[off..off + self.grid_len()]
    }

    pub fn detail_mut(&mut self, level: usize, mask: usize) -> &mut [f64] {
        let off = self.detail_offset(level, mask);
        let n = self.grid_len();
        &mut self.coeffs[off..off + n]
    }

    pub fn approx(&self) -> &[f64] {
        &self.coeffs[self.approx_offset()..]
    }

    pub fn approx_mut(&mut self) -> &mut [f64] {
        let off = self.approx_offset();
        &mut self.coeffs[off..]
    }

    fn detail_offset(&self, level: usize, mask: usize) -> usize {
        assert!(
            (1..=self.levels).contains(&level),
            "level {level} out of range"
        );
        assert!(
            (1..=self.details_per_level()).contains(&mask),
            "band mask {mask} out of range"
        );
        ((level - 1) * self.details_per_level() + mask - 1) * self.grid_len()
    }

    fn approx_offset(&self) -> usize {
        self.levels * self.details_per_level() * self.grid_len()
    }
}

/// The analysis operator Φ for a fixed grid shape, filter pair and depth.
#[derive(Clone, Debug)]
pub struct Udwt {
    dims: Vec<usize>,
    filters: FilterPair,
    levels: usize,
    normalization: Normalization,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Udwt {
    pub fn new(dims: &[usize], filters: FilterPair, levels: usize) -> Result<Self, WaveletError> {
        Self::with_normalization(dims, filters, levels, Normalization::Parseval)
    }

    /// Haar wavelet with two levels.
    pub fn haar(dims: &[usize]) -> Result<Self, WaveletError> {
        Self::new(dims, FilterPair::haar(), 2)
    }

    pub fn with_normalization(
        dims: &[usize],
        filters: FilterPair,
        levels: usize,
        normalization: Normalization,
    ) -> Result<Self, WaveletError> {
        check_dims(dims)?;
        if levels == 0 {
            return Err(WaveletError::ZeroLevels);
        }
        if normalization == Normalization::Unscaled && levels > 1 {
            return Err(WaveletError::NotTight);
        }
        let needed = filters.len() << (levels - 1);
        for (axis, &len) in dims.iter().enumerate() {
            if len < needed {
                return Err(WaveletError::DimensionTooSmall {
                    axis,
                    len,
                    needed,
                    levels,
                });
            }
        }
        let scale = match normalization {
            Normalization::Parseval => FRAC_1_SQRT_2,
            Normalization::Unscaled => 1.0,
        };
        Ok(Self {
            dims: dims.to_vec(),
            lo: filters.lo.iter().map(|t| t * scale).collect(),
            hi: filters.hi.iter().map(|t| t * scale).collect(),
            filters,
            levels,
            normalization,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn filters(&self) -> &FilterPair {
        &self.filters
    }

    pub fn grid_len(&self) -> usize {
        self.dims.iter().product()
    }

    /// α in `Φ*Φ = αI`.
    pub fn frame_constant(&self) -> f64 {
        match self.normalization {
            Normalization::Parseval => 1.0,
            Normalization::Unscaled => (1usize << self.dims.len()) as f64,
        }
    }

    pub fn coefficient_count(&self) -> usize {
        (self.levels * ((1 << self.dims.len()) - 1) + 1) * self.grid_len()
    }

    fn check_len(&self, len: usize) -> Result<(), WaveletError> {
        if len != self.grid_len() {
            return Err(WaveletError::ShapeMismatch(format!(
                "signal has {len} samples, transform expects {}",
                self.grid_len()
            )));
        }
        Ok(())
    }

    fn check_pyramid(&self, p: &WaveletPyramid) -> Result<(), WaveletError> {
        if p.dims != self.dims || p.levels != self.levels {
            return Err(WaveletError::ShapeMismatch(format!(
                "pyramid is {:?} x {} levels, transform is {:?} x {} levels",
                p.dims, p.levels, self.dims, self.levels
            )));
        }
        if p.coeffs.len() != self.coefficient_count() {
            return Err(WaveletError::ShapeMismatch(format!(
                "pyramid holds {} coefficients, expected {}",
                p.coeffs.len(),
                self.coefficient_count()
            )));
        }
        Ok(())
    }

    /// Φx.
    pub fn forward(&self, x: &[f64]) -> Result<WaveletPyramid, WaveletError> {
        self.check_len(x.len())?;
        let n = self.grid_len();
        let details = (1usize << self.dims.len()) - 1;
        let mut pyramid = WaveletPyramid::zeros(&self.dims, self.levels, self.frame_constant())?;
        let mut approx = x.to_vec();
        for level in 1..=self.levels {
            let bands = self.analysis_level(&approx, 1 << (level - 1));
            let base = (level - 1) * details * n;
            for (mask, band) in bands.iter().enumerate().skip(1) {
                let off = base + (mask - 1) * n;
                pyramid.coeffs[off..off + n].copy_from_slice(band);
            }
            approx = bands.into_iter().next().unwrap();
        }
        pyramid.approx_mut().copy_from_slice(&approx);
        Ok(pyramid)
    }

    /// Φ*y.
    pub fn adjoint(&self, p: &WaveletPyramid) -> Result<Vec<f64>, WaveletError> {
        self.check_pyramid(p)?;
        let mut approx = p.approx().to_vec();
        for level in (1..=self.levels).rev() {
            let mut bands = Vec::with_capacity(1 << self.dims.len());
            bands.push(approx);
            for mask in 1..=p.details_per_level() {
                bands.push(p.detail(level, mask).to_vec());
            }
            approx = self.synthesis_level(bands, 1 << (level - 1));
        }
        Ok(approx)
    }

    /// Left inverse `Φ*/α`.
    pub fn inverse(&self, p: &WaveletPyramid) -> Result<Vec<f64>, WaveletError> {
        let mut x = self.adjoint(p)?;
        let alpha = self.frame_constant();
        if alpha != 1.0 {
            x.iter_mut().for_each(|v| *v /= alpha);
        }
        Ok(x)
    }

    /// Reconstruction by averaging the even- and odd-phase decimated inverse
    /// transforms of every polyphase component, level by level.
    ///
    /// Needs every axis divisible by `2^J`.
    pub fn inverse_decimated(&self, p: &WaveletPyramid) -> Result<Vec<f64>, WaveletError> {
        self.check_pyramid(p)?;
        let needed = 1usize << self.levels;
        for (axis, &len) in self.dims.iter().enumerate() {
            if len % needed != 0 {
                return Err(WaveletError::NotDyadic { axis, len, needed });
            }
        }
        let d = self.dims.len();
        // undo the per-axis 1/sqrt(2) so the decimated transform is orthonormal
        let scale = match self.normalization {
            Normalization::Parseval => 2f64.powf(d as f64 / 2.0),
            Normalization::Unscaled => 1.0,
        };
        let mut approx = p.approx().to_vec();
        for level in (1..=self.levels).rev() {
            let mut bands: Vec<&[f64]> = Vec::with_capacity(1 << d);
            bands.push(&approx);
            for mask in 1..=p.details_per_level() {
                bands.push(p.detail(level, mask));
            }
            approx = self.decimated_level_inverse(&bands, 1 << (level - 1), scale);
        }
        Ok(approx)
    }

    fn analysis_level(&self, approx: &[f64], dilation: usize) -> Vec<Vec<f64>> {
        let mut stage = vec![approx.to_vec()];
        for axis in 0..self.dims.len() {
            let mut next = vec![Vec::new(); stage.len() * 2];
            for (mask, arr) in stage.iter().enumerate() {
                next[mask] = filter_axis(arr, &self.dims, axis, &self.lo, dilation, false);
                next[mask | (1 << axis)] =
                    filter_axis(arr, &self.dims, axis, &self.hi, dilation, false);
            }
            stage = next;
        }
        stage
    }

    fn synthesis_level(&self, mut stage: Vec<Vec<f64>>, dilation: usize) -> Vec<f64> {
        for axis in (0..self.dims.len()).rev() {
            let half = stage.len() / 2;
            let hi_part = stage.split_off(half);
            stage = stage
                .iter()
                .zip(&hi_part)
                .map(|(lo_band, hi_band)| {
                    let mut out = filter_axis(lo_band, &self.dims, axis, &self.lo, dilation, true);
                    let h = filter_axis(hi_band, &self.dims, axis, &self.hi, dilation, true);
                    out.iter_mut().zip(h).for_each(|(o, v)| *o += v);
                    out
                })
                .collect();
        }
        stage.pop().unwrap()
    }

    fn decimated_level_inverse(&self, bands: &[&[f64]], dilation: usize, scale: f64) -> Vec<f64> {
        let d = self.dims.len();
        let sub_dims: Vec<usize> = self.dims.iter().map(|&n| n / dilation).collect();
        let half_dims: Vec<usize> = sub_dims.iter().map(|&n| n / 2).collect();
        let sub_len: usize = sub_dims.iter().product();
        let mut out = vec![0.0; self.grid_len()];

        for_each_index(&vec![dilation; d], |offset| {
            let sub_bands: Vec<Vec<f64>> = bands
                .iter()
                .map(|band| {
                    let mut s = gather_strided(band, &self.dims, offset, dilation, &sub_dims);
                    s.iter_mut().for_each(|v| *v *= scale);
                    s
                })
                .collect();
            let mut acc = vec![0.0; sub_len];
            for phase in 0..2 {
                let phase_off = vec![phase; d];
                let mut stage: Vec<Vec<f64>> = sub_bands
                    .iter()
                    .map(|s| gather_strided(s, &sub_dims, &phase_off, 2, &half_dims))
                    .collect();
                let mut cur_dims = half_dims.clone();
                for axis in (0..d).rev() {
                    let half = stage.len() / 2;
                    let hi_part = stage.split_off(half);
                    let mut next_dims = cur_dims.clone();
                    next_dims[axis] = sub_dims[axis];
                    stage = stage
                        .iter()
                        .zip(&hi_part)
                        .map(|(a, dt)| idwt_axis(a, dt, &cur_dims, axis, &self.filters, phase))
                        .collect();
                    cur_dims = next_dims;
                }
                acc.iter_mut().zip(&stage[0]).for_each(|(a, v)| *a += v);
            }
            acc.iter_mut().for_each(|v| *v *= 0.5);
            scatter_strided(&acc, &mut out, &self.dims, offset, dilation, &sub_dims);
        });
        out
    }
}

/// Level-`levels` undecimated decomposition of `x` with shipped (Parseval)
/// normalisation.
pub fn udwt_forward(
    x: &ImageGrid,
    filters: &FilterPair,
    levels: usize,
) -> Result<WaveletPyramid, WaveletError> {
    Udwt::new(x.dims(), filters.clone(), levels)?.forward(x.values())
}

pub fn udwt_inverse(p: &WaveletPyramid, filters: &FilterPair) -> Result<ImageGrid, WaveletError> {
    let normalization = if p.frame_constant() == 1.0 {
        Normalization::Parseval
    } else {
        Normalization::Unscaled
    };
    let phi = Udwt::with_normalization(p.dims(), filters.clone(), p.levels(), normalization)?;
    if phi.frame_constant() != p.frame_constant() {
        return Err(WaveletError::ShapeMismatch(format!(
            "frame constant {} does not match any normalisation",
            p.frame_constant()
        )));
    }
    Ok(ImageGrid::new(p.dims(), phi.inverse(p)?)?)
}

/// One level of the decimated periodic DWT: `a[m] = Σ lo[t] x[2m - t]`.
pub fn dwt_single_level(
    x: &[f64],
    filters: &FilterPair,
) -> Result<(Vec<f64>, Vec<f64>), WaveletError> {
    if !x.len().is_multiple_of(2) {
        return Err(WaveletError::OddLength(x.len()));
    }
    if x.len() < filters.len() {
        return Err(WaveletError::DimensionTooSmall {
            axis: 0,
            len: x.len(),
            needed: filters.len(),
            levels: 1,
        });
    }
    let mut approx = vec![0.0; x.len() / 2];
    let mut detail = vec![0.0; x.len() / 2];
    dwt_phase(x, filters, 0, &mut approx, &mut detail);
    Ok((approx, detail))
}

/// Inverse of [`dwt_single_level`].
pub fn idwt_single_level(
    approx: &[f64],
    detail: &[f64],
    filters: &FilterPair,
) -> Result<Vec<f64>, WaveletError> {
    if approx.len() != detail.len() {
        return Err(WaveletError::ShapeMismatch(format!(
            "approximation has {} samples, detail has {}",
            approx.len(),
            detail.len()
        )));
    }
    let mut x = vec![0.0; approx.len() * 2];
    idwt_phase(approx, detail, filters, 0, &mut x);
    Ok(x)
}

fn dwt_phase(
    x: &[f64],
    filters: &FilterPair,
    phase: usize,
    approx: &mut [f64],
    detail: &mut [f64],
) {
    let n = x.len() as isize;
    for m in 0..approx.len() {
        let k = (2 * m + phase) as isize;
        let (mut a, mut d) = (0.0, 0.0);
        for (t, (&l, &h)) in filters.lo.iter().zip(&filters.hi).enumerate() {
            let v = x[(k - t as isize).rem_euclid(n) as usize];
            a += l * v;
            d += h * v;
        }
        approx[m] = a;
        detail[m] = d;
    }
}

// x[k] = Σ_m Σ_t lo_r[t] a[m] + hi_r[t] d[m], k = 2m + phase + t - (L-1)
fn idwt_phase(approx: &[f64], detail: &[f64], filters: &FilterPair, phase: usize, x: &mut [f64]) {
    let n = x.len() as isize;
    let shift = filters.len() as isize - 1;
    x.iter_mut().for_each(|v| *v = 0.0);
    for m in 0..approx.len() {
        for (t, (&l, &h)) in filters.lo_r.iter().zip(&filters.hi_r).enumerate() {
            let k = (2 * m + phase) as isize + t as isize - shift;
            x[k.rem_euclid(n) as usize] += l * approx[m] + h * detail[m];
        }
    }
}

/// Product of the axes before and after `axis`.
fn axis_layout(dims: &[usize], axis: usize) -> (usize, usize) {
    let outer = dims[..axis].iter().product();
    let stride = dims[axis + 1..].iter().product();
    (outer, stride)
}

/// Periodic dilated convolution along one axis, or its adjoint (correlation).
fn filter_axis(
    input: &[f64],
    dims: &[usize],
    axis: usize,
    taps: &[f64],
    dilation: usize,
    adjoint: bool,
) -> Vec<f64> {
    let len = dims[axis];
    let (outer, stride) = axis_layout(dims, axis);
    let mut out = vec![0.0; input.len()];
    // tap offsets reduced modulo the axis length
    let shifts: Vec<usize> = (0..taps.len())
        .map(|t| {
            let s = (t * dilation) % len;
            if adjoint {
                s
            } else {
                (len - s) % len
            }
        })
        .collect();
    for o in 0..outer {
        let base = o * len * stride;
        for k in 0..len {
            let dst = base + k * stride;
            for (&tap, &s) in taps.iter().zip(&shifts) {
                let mut src_k = k + s;
                if src_k >= len {
                    src_k -= len;
                }
                let src = base + src_k * stride;
                for i in 0..stride {
                    out[dst + i] += tap * input[src + i];
                }
            }
        }
    }
    out
}

/// Decimated synthesis along `axis`: the axis doubles in length.
fn idwt_axis(
    approx: &[f64],
    detail: &[f64],
    dims: &[usize],
    axis: usize,
    filters: &FilterPair,
    phase: usize,
) -> Vec<f64> {
    let len = dims[axis];
    let (outer, stride) = axis_layout(dims, axis);
    let out_len = 2 * len;
    let mut out = vec![0.0; outer * out_len * stride];
    let mut a = vec![0.0; len];
    let mut d = vec![0.0; len];
    let mut x = vec![0.0; out_len];
    for o in 0..outer {
        for i in 0..stride {
            for k in 0..len {
                let src = (o * len + k) * stride + i;
                a[k] = approx[src];
                d[k] = detail[src];
            }
            idwt_phase(&a, &d, filters, phase, &mut x);
            for (k, &v) in x.iter().enumerate() {
                out[(o * out_len + k) * stride + i] = v;
            }
        }
    }
    out
}

fn for_each_index(extent: &[usize], mut f: impl FnMut(&[usize])) {
    let total: usize = extent.iter().product();
    let mut idx = vec![0usize; extent.len()];
    for _ in 0..total {
        f(&idx);
        for axis in (0..extent.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < extent[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
}

fn flat(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

fn gather_strided(
    src: &[f64],
    dims: &[usize],
    offset: &[usize],
    stride: usize,
    out_dims: &[usize],
) -> Vec<f64> {
    let mut out = Vec::with_capacity(out_dims.iter().product());
    let mut full = vec![0usize; dims.len()];
    for_each_index(out_dims, |q| {
        for a in 0..dims.len() {
            full[a] = offset[a] + stride * q[a];
        }
        out.push(src[flat(&full, dims)]);
    });
    out
}

fn scatter_strided(
    src: &[f64],
    dst: &mut [f64],
    dims: &[usize],
    offset: &[usize],
    stride: usize,
    src_dims: &[usize],
) {
    let mut full = vec![0usize; dims.len()];
    let mut pos = 0;
    for_each_index(src_dims, |q| {
        for a in 0..dims.len() {
            full[a] = offset[a] + stride * q[a];
        }
        dst[flat(&full, dims)] = src[pos];
        pos += 1;
    });
}
