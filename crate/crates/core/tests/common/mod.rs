//! Dense reference computations shared by the integration tests. None of
//! them call into the code under test beyond building inputs.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Row-major `m × n` matrix of standard complex normals.
pub fn complex_gaussian(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Complex64> {
    (0..m * n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

pub fn matvec(a: &[Complex64], m: usize, n: usize, x: &[Complex64]) -> Vec<Complex64> {
    (0..m)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

/// `A* y`.
pub fn adjoint_matvec(a: &[Complex64], m: usize, n: usize, y: &[Complex64]) -> Vec<Complex64> {
    (0..n)
        .map(|j| (0..m).map(|i| a[i * n + j].conj() * y[i]).sum())
        .collect()
}

/// `A* A`, `n × n`.
pub fn gram(a: &[Complex64], m: usize, n: usize) -> Vec<Complex64> {
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    for p in 0..n {
        for q in 0..n {
            g[p * n + q] = (0..m).map(|i| a[i * n + p].conj() * a[i * n + q]).sum();
        }
    }
    g
}

/// `A A*`, `m × m`.
pub fn outer_gram(a: &[Complex64], m: usize, n: usize) -> Vec<Complex64> {
    let mut g = vec![Complex64::new(0.0, 0.0); m * m];
    for p in 0..m {
        for q in 0..m {
            g[p * m + q] = (0..n).map(|j| a[p * n + j] * a[q * n + j].conj()).sum();
        }
    }
    g
}

/// Gaussian elimination with partial pivoting on a dense `n × n` system.
pub fn solve(mut mat: Vec<Complex64>, mut rhs: Vec<Complex64>) -> Vec<Complex64> {
    let n = rhs.len();
    assert_eq!(mat.len(), n * n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| mat[p * n + col].norm().total_cmp(&mat[q * n + col].norm()))
            .unwrap();
        assert!(mat[piv * n + col].norm() > 1e-300, "singular system");
        if piv != col {
            for j in 0..n {
                mat.swap(piv * n + j, col * n + j);
            }
            rhs.swap(piv, col);
        }
        let d = mat[col * n + col];
        for r in col + 1..n {
            let f = mat[r * n + col] / d;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = mat[col * n + j];
                mat[r * n + j] -= f * v;
            }
            let v = rhs[col];
            rhs[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|j| mat[r * n + j] * x[j]).sum();
        x[r] = (rhs[r] - s) / mat[r * n + r];
    }
    x
}

/// Minimum-norm solution `A⁺b`: normal equations on `A*A` when `m ≥ n`,
/// otherwise `A*(AA*)⁻¹b`. Assumes full rank.
pub fn pinv_solution(a: &[Complex64], m: usize, n: usize, b: &[Complex64]) -> Vec<Complex64> {
    if m >= n {
        solve(gram(a, m, n), adjoint_matvec(a, m, n, b))
    } else {
        let y = solve(outer_gram(a, m, n), b.to_vec());
        adjoint_matvec(a, m, n, &y)
    }
}

/// Eigenvalues (ascending) of a real symmetric matrix by cyclic Jacobi
/// rotations.
pub fn jacobi_eigenvalues(mut s: Vec<f64>, n: usize) -> Vec<f64> {
    let frob: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| s[p * n + q] * s[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = s[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[q * n + q] - s[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let skp = s[k * n + p];
                    let skq = s[k * n + q];
                    s[k * n + p] = cs * skp - sn * skq;
                    s[k * n + q] = sn * skp + cs * skq;
                }
                for k in 0..n {
                    let spk = s[p * n + k];
                    let sqk = s[q * n + k];
                    s[p * n + k] = cs * spk - sn * sqk;
                    s[q * n + k] = sn * spk + cs * sqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| s[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues (ascending) of a Hermitian matrix `H = X + iY`, through the
/// real symmetric embedding `[[X, -Y], [Y, X]]` whose spectrum is that of
/// `H` with every eigenvalue doubled.
pub fn hermitian_eigenvalues(h: &[Complex64], n: usize) -> Vec<f64> {
    let m = 2 * n;
    let mut s = vec![0.0; m * m];
    for p in 0..n {
        for q in 0..n {
            let v = h[p * n + q];
            s[p * m + q] = v.re;
            s[(p + n) * m + q + n] = v.re;
            s[p * m + q + n] = -v.im;
            s[(p + n) * m + q] = v.im;
        }
    }
    jacobi_eigenvalues(s, m).into_iter().step_by(2).collect()
}

/// Largest eigenvalue of `A*A`.
pub fn gram_max_eigenvalue(a: &[Complex64], m: usize, n: usize) -> f64 {
    *hermitian_eigenvalues(&gram(a, m, n), n).last().unwrap()
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn diff_norm(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(p, q)| (p - q).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn real_diff_norm(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

pub fn real_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
