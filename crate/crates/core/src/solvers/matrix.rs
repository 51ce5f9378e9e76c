use num_complex::Complex64;

use super::SolverError;
use crate::grid::check_dims;

/// Dense complex measurement operator `A ∈ C^{m×n}` stored row-major, with
/// per-row metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
    row_norms: Vec<f64>,
    row_snr: Option<Vec<f64>>,
    row_freq_hz: Option<Vec<f64>>,
    grid_dims: Vec<usize>,
    op_norm: Option<f64>,
}

fn norm(row: &[Complex64]) -> f64 {
    row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

impl SystemMatrix {
    pub fn new(
        rows: usize,
        entries: Vec<Complex64>,
        grid_dims: &[usize],
    ) -> Result<Self, SolverError> {
        let cols = check_dims(grid_dims).map_err(|e| SolverError::InvalidInput(e.to_string()))?;
        if rows == 0 {
            return Err(SolverError::InvalidInput(
                "system matrix needs at least one row".into(),
            ));
        }
        if entries.len() != rows * cols {
            return Err(SolverError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let row_norms = entries.chunks_exact(cols).map(norm).collect();
        Ok(Self {
            rows,
            cols,
            entries,
            row_norms,
            row_snr: None,
            row_freq_hz: None,
            grid_dims: grid_dims.to_vec(),
            op_norm: None,
        })
    }

    /// Builds a matrix from real entries (tests and toy systems).
    pub fn from_real(
        rows: usize,
        entries: &[f64],
        grid_dims: &[usize],
    ) -> Result<Self, SolverError> {
        Self::new(
            rows,
            entries.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            grid_dims,
        )
    }

    pub fn with_row_snr(mut self, snr: Vec<f64>) -> Result<Self, SolverError> {
        self.check_meta_len("row_snr", snr.len())?;
        self.row_snr = Some(snr);
        Ok(self)
    }

    pub fn with_row_freq_hz(mut self, freq: Vec<f64>) -> Result<Self, SolverError> {
        self.check_meta_len("row_freq_hz", freq.len())?;
        self.row_freq_hz = Some(freq);
        Ok(self)
    }

    pub fn with_op_norm(mut self, op_norm: Option<f64>) -> Self {
        self.op_norm = op_norm;
        self
    }

    fn check_meta_len(&self, what: &str, len: usize) -> Result<(), SolverError> {
        if len != self.rows {
            return Err(SolverError::DimensionMismatch(format!(
                "{what} has {len} entries for {} rows",
                self.rows
            )));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_norms(&self) -> &[f64] {
        &self.row_norms
    }

    pub fn row_snr(&self) -> Option<&[f64]> {
        self.row_snr.as_deref()
    }

    pub fn row_freq_hz(&self) -> Option<&[f64]> {
        self.row_freq_hz.as_deref()
    }

    pub fn grid_dims(&self) -> &[usize] {
        &self.grid_dims
    }

    /// Cached largest eigenvalue of `A*A`, if known.
    pub fn op_norm(&self) -> Option<f64> {
        self.op_norm
    }

    pub fn set_op_norm(&mut self, value: Option<f64>) {
        self.op_norm = value;
    }

    /// Scales every row to unit norm and returns the applied factors
    /// `1/‖a_i‖`. The cached operator norm is dropped.
    pub fn normalize_rows(&mut self) -> Result<Vec<f64>, SolverError> {
        if let Some(i) = self
            .row_norms
            .iter()
            .position(|&n| !(n > 0.0) || !n.is_finite())
        {
            return Err(SolverError::ZeroRow(i));
        }
        let cols = self.cols;
        let factors: Vec<f64> = self.row_norms.iter().map(|n| 1.0 / n).collect();
        for (row, &f) in self.entries.chunks_exact_mut(cols).zip(&factors) {
            row.iter_mut().for_each(|v| *v *= f);
        }
        self.row_norms = self.entries.chunks_exact(cols).map(norm).collect();
        self.op_norm = None;
        Ok(factors)
    }

    pub fn is_row_normalized(&self, tol: f64) -> bool {
        self.row_norms.iter().all(|n| (n - 1.0).abs() <= tol)
    }

    pub fn ensure_row_normalized(&self, tol: f64) -> Result<(), SolverError> {
        match self.row_norms.iter().position(|n| (n - 1.0).abs() > tol) {
            Some(row) => Err(SolverError::NotRowNormalized {
                row,
                norm: self.row_norms[row],
            }),
            None => Ok(()),
        }
    }

    /// Subset of rows in the given order, metadata included.
    pub fn select_rows(&self, keep: &[usize]) -> Result<Self, SolverError> {
        let mut entries = Vec::with_capacity(keep.len() * self.cols);
        for &i in keep {
            entries.extend_from_slice(self.row(i));
        }
        let pick = |v: &Option<Vec<f64>>| v.as_ref().map(|v| keep.iter().map(|&i| v[i]).collect());
        let mut out = Self::new(keep.len(), entries, &self.grid_dims)?;
        out.row_snr = pick(&self.row_snr);
        out.row_freq_hz = pick(&self.row_freq_hz);
        Ok(out)
    }

    /// Row inner product `⟨a_i, x⟩ = Σ_j a_ij x_j` (no conjugation, so that
    /// `(Ax)_i = ⟨a_i, x⟩`).
    #[inline]
    pub fn row_dot(&self, i: usize, x: &[Complex64]) -> Complex64 {
        let row = self.row(i);
        let (mut re, mut im) = (0.0, 0.0);
        for (a, v) in row.iter().zip(x) {
            re += a.re * v.re - a.im * v.im;
            im += a.re * v.im + a.im * v.re;
        }
        Complex64::new(re, im)
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row_dot(i, x)).collect()
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        self.entries
            .chunks_exact(self.cols)
            .map(|row| {
                let (mut re, mut im) = (0.0, 0.0);
                for (a, &v) in row.iter().zip(x) {
                    re += a.re * v;
                    im += a.im * v;
                }
                Complex64::new(re, im)
            })
            .collect()
    }

    /// `A* y`.
    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (row, &yi) in self.entries.chunks_exact(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * yi;
            }
        }
        out
    }

    /// `‖Ax - b‖₂`.
    pub fn residual_norm(&self, x: &[Complex64], b: &[Complex64]) -> f64 {
        (0..self.rows)
            .map(|i| (self.row_dot(i, x) - b[i]).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖Ax - b‖₂` for a real iterate.
    pub fn residual_norm_real(&self, x: &[f64], b: &[Complex64]) -> f64 {
        self.apply_real(x)
            .iter()
            .zip(b)
            .map(|(ax, bi)| (ax - bi).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}
