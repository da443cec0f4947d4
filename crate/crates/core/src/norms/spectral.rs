//! Largest singular value by Lanczos on `A^*A`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DecayError, Result};
use crate::matrix_core::DecayMatrix;

const START_SEED: u64 = 0x0ff_d1a6;
/// Stop once the Ritz residual bound drops below this fraction of the Ritz value.
const RITZ_TOL: f64 = 1e-12;
const MAX_KRYLOV: usize = 4000;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue of the symmetric tridiagonal matrix and the last
/// component of its unit eigenvector.
fn top_ritz_pair(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (idx, theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    (theta, eig.eigenvectors[(k - 1, idx)])
}

/// Largest singular value of `a`.
///
/// Deterministic: the start vector comes from a fixed seed. Lanczos with full
/// reorthogonalization runs until the residual bound `beta_k |s_k|` certifies the
/// top Ritz value of `A^*A` to relative accuracy `1e-12`, or the Krylov space is
/// exhausted (in which case the value is exact up to rounding).
pub fn operator_norm(a: &DecayMatrix) -> Result<f64> {
    let n = a.dim();
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let a = a.scale(Complex64::new(1.0 / scale, 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut q: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let qn = norm2(&q);
    q.iter_mut().for_each(|z| *z /= qn);

    let limit = n.min(MAX_KRYLOV);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(limit.min(256));
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut w = vec![Complex64::new(0.0, 0.0); n];

    for step in 0..limit {
        a.apply(&q, &mut tmp);
        a.apply_adjoint(&tmp, &mut w);
        let alpha = dot(&q, &w).re;
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi -= qi * alpha;
        }
        if let (Some(prev), Some(&b)) = (basis.last(), betas.last()) {
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= pi * b;
            }
        }
        basis.push(q.clone());
        // two passes of classical Gram-Schmidt keep the basis orthogonal to working precision
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= vi * c;
                }
            }
        }
        alphas.push(alpha);
        let beta = norm2(&w);

        let k = step + 1;
        let exhausted = k == limit || beta <= 1e-14 * alphas.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if exhausted || k % 4 == 0 || k < 4 {
            let (theta, s_last) = top_ritz_pair(&alphas, &betas);
            if exhausted && (k == n || beta <= 1e-14 * theta.abs()) {
                return Ok(theta.max(0.0).sqrt() * scale);
            }
            if beta * s_last.abs() <= RITZ_TOL * theta {
                return Ok(theta.max(0.0).sqrt() * scale);
            }
            if exhausted {
                break;
            }
        }
        betas.push(beta);
        q = w.iter().map(|z| z / beta).collect();
    }
    Err(DecayError::Convergence {
        iterations: alphas.len(),
    })
}
