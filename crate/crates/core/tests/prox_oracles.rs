mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use ska_core::prox::{
    nng_penalty_eval, project_nonneg, project_nonneg_real, prox_composed, prox_hard, prox_nng,
    prox_soft, ThresholdKind, ThresholdRule,
};
use ska_core::wavelet::{FilterPair, Udwt, WaveletPyramid};

use common::{gaussian_vec, rng};

/// Written out independently of the library's penalty routine.
fn nng_penalty(z: f64, lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    let a = z.abs();
    l2 + l2 * (a / (2.0 * lambda)).asinh() + l2 * a / ((a * a + 4.0 * l2).sqrt() + a)
}

/// argmin over a uniform grid of step `h` covering `[-|x|-1, |x|+1]`.
fn grid_argmin(x: f64, h: f64, penalty: impl Fn(f64) -> f64) -> f64 {
    let half = ((x.abs() + 1.0) / h).ceil() as i64;
    let mut best = (f64::INFINITY, 0.0);
    for k in -half..=half {
        let z = k as f64 * h;
        let v = penalty(z) + 0.5 * (x - z) * (x - z);
        if v < best.0 {
            best = (v, z);
        }
    }
    best.1
}

#[test]
fn soft_matches_grid_search() {
    let mut r = rng(10);
    for _ in 0..200 {
        let x: f64 = r.random_range(-5.0..5.0);
        let z = grid_argmin(x, 1e-4, |z| 0.7 * z.abs());
        assert!((prox_soft(x, 0.7) - z).abs() < 1e-3, "x={x}");
    }
}

#[test]
fn nng_matches_grid_search() {
    let mut r = rng(11);
    for _ in 0..200 {
        let x: f64 = r.random_range(-5.0..5.0);
        let z = grid_argmin(x, 1e-4, |z| nng_penalty(z, 1.0));
        assert!((prox_nng(x, 1.0) - z).abs() < 1e-3, "x={x}");
    }
}

#[test]
fn penalty_routine_agrees_with_formula() {
    let xs = [0.0, -0.3, 2.0, 7.5];
    let want: f64 = xs.iter().map(|&z| nng_penalty(z, 0.8)).sum();
    assert!((nng_penalty_eval(&xs, 0.8).unwrap() - want).abs() < 1e-12);
}

#[test]
fn nng_stationarity_by_central_differences() {
    for (x, lambda) in [(2.0, 1.0), (-3.5, 0.5), (10.0, 2.0)] {
        let z = prox_nng(x, lambda);
        let h = 1e-6;
        let grad = (nng_penalty(z + h, lambda) - nng_penalty(z - h, lambda)) / (2.0 * h);
        assert!((grad - (x - z)).abs() < 1e-5, "x={x}: {grad} vs {}", x - z);
    }
}

#[test]
fn rule_ordering_above_threshold() {
    let mut r = rng(12);
    for _ in 0..500 {
        let lambda: f64 = r.random_range(0.1..2.0);
        let x = lambda * r.random_range(1.0001..20.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let (s, g, h) = (
            prox_soft(x, lambda),
            prox_nng(x, lambda),
            prox_hard(x, lambda),
        );
        assert!(s.abs() <= g.abs() && g.abs() <= h.abs() && h == x);
        assert!((x - g - lambda * lambda / x).abs() < 1e-12 * x.abs().max(1.0));
    }
}

/// Dense Φ: column `j` is `Φ e_j`.
fn dense_phi(phi: &Udwt) -> Vec<Vec<f64>> {
    let n = phi.grid_len();
    (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            phi.forward(&e).unwrap().into_coeffs()
        })
        .collect()
}

/// `x + Φᵀ(T(Φx) − Φx)` with matrices only.
fn dense_composition(
    cols: &[Vec<f64>],
    x: &[f64],
    rule: &ThresholdRule,
    detail_len: usize,
    all: bool,
) -> Vec<f64> {
    let k = cols[0].len();
    let y: Vec<f64> = (0..k)
        .map(|i| cols.iter().zip(x).map(|(c, v)| c[i] * v).sum())
        .collect();
    let diff: Vec<f64> = y
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if all || i < detail_len {
                rule.apply(v) - v
            } else {
                0.0
            }
        })
        .collect();
    cols.iter()
        .zip(x)
        .map(|(c, v)| v + c.iter().zip(&diff).map(|(p, q)| p * q).sum::<f64>())
        .collect()
}

#[test]
fn composition_equals_dense_operators() {
    let dims = [8, 8];
    let mut r = rng(13);
    for levels in [1, 2] {
        let phi = Udwt::new(&dims, FilterPair::haar(), levels).unwrap();
        let cols = dense_phi(&phi);
        let detail_len = levels * 3 * 64;
        for kind in [ThresholdKind::Soft, ThresholdKind::Nng] {
            for lambda in [0.1, 0.5, 1.0] {
                for all in [false, true] {
                    let rule = ThresholdRule::new(kind, lambda).unwrap();
                    let x = gaussian_vec(&mut r, 64);
                    let got = prox_composed(&x, &phi, &rule, all).unwrap();
                    let want = dense_composition(&cols, &x, &rule, detail_len, all);
                    for (g, w) in got.iter().zip(&want) {
                        assert!((g - w).abs() < 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn composition_with_everything_thresholded_is_zero() {
    let phi = Udwt::haar(&[16, 16]).unwrap();
    let x = gaussian_vec(&mut rng(14), 256);
    for rule in [ThresholdRule::soft(1e9), ThresholdRule::nng(1e9)] {
        let out = prox_composed(&x, &phi, &rule, true).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn composition_rejects_wrong_shape() {
    let phi = Udwt::haar(&[8, 8]).unwrap();
    assert!(prox_composed(&[0.0; 63], &phi, &ThresholdRule::soft(1.0), false).is_err());
    let p = WaveletPyramid::zeros(&[8, 4], 2, 1.0).unwrap();
    assert!(phi.adjoint(&p).is_err());
}

proptest! {
    #[test]
    fn shrinkers_are_firm_and_keep_phase(re in -50.0f64..50.0, im in -50.0f64..50.0, lambda in 0.0f64..10.0) {
        let x = Complex64::new(re, im);
        for out in [prox_soft(x, lambda), prox_nng(x, lambda)] {
            prop_assert!(out.norm() <= x.norm() + 1e-12);
            if out.norm() > 0.0 {
                prop_assert!((out / out.norm() - x / x.norm()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn hard_keeps_or_kills(xs in prop::collection::vec(-10.0f64..10.0, 1..50), lambda in 0.0f64..5.0) {
        for &x in &xs {
            let h = prox_hard(x, lambda);
            prop_assert!(h == 0.0 || (h == x && h.abs() > lambda));
        }
    }

    #[test]
    fn projection_is_idempotent(xs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 0..40)) {
        let z: Vec<Complex64> = xs.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let once = project_nonneg(&z);
        prop_assert!(once.iter().all(|&v| v >= 0.0));
        prop_assert_eq!(project_nonneg_real(&once), once);
    }

    #[test]
    fn zero_lambda_composition_is_identity(seed in any::<u64>()) {
        let phi = Udwt::haar(&[8, 8]).unwrap();
        let x = gaussian_vec(&mut rng(seed), 64);
        prop_assert_eq!(prox_composed(&x, &phi, &ThresholdRule::nng(0.0), false).unwrap(), x);
    }
}
