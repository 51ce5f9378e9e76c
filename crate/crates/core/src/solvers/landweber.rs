use num_complex::Complex64;

use super::SystemMatrix;

/// `A*(Ax - b)`, the gradient of `½‖Ax - b‖²`.
pub fn least_squares_gradient(
    a: &SystemMatrix,
    b: &[Complex64],
    x: &[Complex64],
) -> Vec<Complex64> {
    let mut r = a.apply(x);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= bi);
    a.apply_adjoint(&r)
}

/// One Landweber (gradient descent) step `x - γ A*(Ax - b)`.
pub fn landweber_step(
    a: &SystemMatrix,
    b: &[Complex64],
    x: &[Complex64],
    gamma: f64,
) -> Vec<Complex64> {
    let g = least_squares_gradient(a, b, x);
    x.iter().zip(g).map(|(xi, gi)| xi - gi * gamma).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_solution_is_fixed() {
        let a = SystemMatrix::from_real(3, &[1.0, 2.0, 0.0, 1.0, 3.0, -1.0], &[2]).unwrap();
        let x = [Complex64::new(0.5, 1.0), Complex64::new(-2.0, 0.25)];
        let b = a.apply(&x);
        assert_eq!(landweber_step(&a, &b, &x, 0.1), x.to_vec());
    }

    #[test]
    fn identity_reaches_zero_data_in_one_step() {
        let a = SystemMatrix::from_real(2, &[1.0, 0.0, 0.0, 1.0], &[2]).unwrap();
        let b = [Complex64::new(0.0, 0.0); 2];
        let x = [Complex64::new(3.0, -1.0), Complex64::new(7.0, 2.0)];
        assert!(landweber_step(&a, &b, &x, 1.0)
            .iter()
            .all(|v| v.norm() == 0.0));
    }
}
