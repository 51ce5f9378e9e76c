use num_complex::Complex64;

use super::SimulateError;
use crate::solvers::SystemMatrix;

/// Keeps the rows with `f_lo ≤ freq ≤ f_hi` and `snr > snr_min` (in their
/// original order), drops the matching entries of `b`, then scales every
/// surviving row and its entry of `b` by `1/‖a_i‖`.
pub fn preprocess_matrix(
    a: &SystemMatrix,
    b: &[Complex64],
    snr_min: f64,
    f_lo_hz: f64,
    f_hi_hz: f64,
) -> Result<(SystemMatrix, Vec<Complex64>), SimulateError> {
    if b.len() != a.rows() {
        return Err(SimulateError::InvalidArgument(format!(
            "b has {} entries, A has {} rows",
            b.len(),
            a.rows()
        )));
    }
    let freq = a
        .row_freq_hz()
        .ok_or(SimulateError::MissingMetadata("row_freq_hz"))?;
    let snr = a
        .row_snr()
        .ok_or(SimulateError::MissingMetadata("row_snr"))?;
    let keep: Vec<usize> = (0..a.rows())
        .filter(|&i| freq[i] >= f_lo_hz && freq[i] <= f_hi_hz && snr[i] > snr_min)
        .collect();
    if keep.is_empty() {
        return Err(SimulateError::AllRowsFiltered {
            snr_min,
            f_lo_hz,
            f_hi_hz,
        });
    }
    let mut out = a.select_rows(&keep)?;
    let factors = out.normalize_rows()?;
    let b_out = keep.iter().zip(&factors).map(|(&i, &f)| b[i] * f).collect();
    Ok((out, b_out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_threshold_is_strict() {
        let a = SystemMatrix::from_real(3, &[1.0, 0.0, 0.0, 2.0, 1.0, 1.0], &[2])
            .unwrap()
            .with_row_snr(vec![2.9, 3.0, 3.1])
            .unwrap()
            .with_row_freq_hz(vec![1e5, 2e5, 3e5])
            .unwrap();
        let b = [Complex64::new(1.0, 0.0); 3];
        let (out, bb) = preprocess_matrix(&a, &b, 3.0, 0.0, 1e9).unwrap();
        assert_eq!(out.rows(), 1);
        assert_eq!(out.row_snr().unwrap(), &[3.1]);
        let s = 1.0 / 2f64.sqrt();
        assert!((bb[0].re - s).abs() < 1e-15);
        assert!(out.is_row_normalized(1e-12));
    }

    #[test]
    fn band_limits_are_inclusive() {
        let a = SystemMatrix::from_real(3, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0], &[2])
            .unwrap()
            .with_row_snr(vec![10.0; 3])
            .unwrap()
            .with_row_freq_hz(vec![70e3, 1e6, 3.0001e6])
            .unwrap();
        let b = [Complex64::new(1.0, 0.0); 3];
        let (out, _) = preprocess_matrix(&a, &b, 3.0, 70e3, 3e6).unwrap();
        assert_eq!(out.row_freq_hz().unwrap(), &[70e3, 1e6]);
    }

    #[test]
    fn errors() {
        let plain = SystemMatrix::from_real(1, &[1.0, 0.0], &[2]).unwrap();
        let b = [Complex64::new(1.0, 0.0)];
        assert_eq!(
            preprocess_matrix(&plain, &b, 3.0, 0.0, 1e9).unwrap_err(),
            SimulateError::MissingMetadata("row_freq_hz")
        );
        let tagged = plain
            .with_row_freq_hz(vec![1e5])
            .unwrap()
            .with_row_snr(vec![1.0])
            .unwrap();
        assert!(matches!(
            preprocess_matrix(&tagged, &b, 3.0, 0.0, 1e9),
            Err(SimulateError::AllRowsFiltered { .. })
        ));
        assert!(preprocess_matrix(&tagged, &[], 0.0, 0.0, 1e9).is_err());
    }
}
