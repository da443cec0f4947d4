#![allow(dead_code)]

use num_complex::Complex64;
use offdiag::experiments::LaurentTerm;
use offdiag::matrix_core::{DecayMatrix, IndexGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random entries damped by `(1+|k-l|_1)^{-r}`, computed from positions.
pub fn random_decaying(g: IndexGeometry, r: f64, seed: u64) -> DecayMatrix {
    let mut rng = rng(seed);
    DecayMatrix::from_fn(g, |k, l| {
        let m: i64 = k.iter().zip(l).map(|(a, b)| g.reduce(a - b).abs()).sum();
        complex(&mut rng) * (1.0 + m as f64).powf(-r)
    })
}

/// Random matrix with `|k_j - l_j| <= band` on every axis (positional).
pub fn random_banded(g: IndexGeometry, band: i64, seed: u64) -> DecayMatrix {
    let mut rng = rng(seed);
    DecayMatrix::from_fn(g, |k, l| {
        if k.iter().zip(l).all(|(a, b)| (a - b).abs() <= band) {
            complex(&mut rng)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Diagonally dominant symbol: `a(0) = 1` plus small random terms up to `reach`.
pub fn random_symbol(d: usize, reach: i64, seed: u64) -> Vec<LaurentTerm> {
    let mut rng = rng(seed);
    let mut terms = vec![LaurentTerm::new(vec![0; d], Complex64::new(1.0, 0.0))];
    let mut budget = 0.9;
    for _ in 0..(2 * reach as usize + 1) {
        let m: Vec<i64> = (0..d).map(|_| rng.gen_range(-reach..=reach)).collect();
        if m.iter().all(|&x| x == 0) || terms.iter().any(|t| t.m.as_slice() == m.as_slice()) {
            continue;
        }
        let z = complex(&mut rng);
        let scale = budget * rng.gen_range(0.1..0.6) / z.norm();
        budget -= z.norm() * scale;
        terms.push(LaurentTerm::new(m, z * scale));
    }
    terms
}
