mod common;

use num_complex::Complex64;
use offdiag::approximation::{approx_error, jackson_ladder, vdp_mean};
use offdiag::experiments::fit_log_log;
use offdiag::matrix_core::{DecayMatrix, DiffIndex, IndexGeometry, Metric};
use offdiag::norms::{norm, NormTag};
use offdiag::smoothness::fourier_coefficient;

fn power_toeplitz(g: IndexGeometry, exponent: f64) -> DecayMatrix {
    DecayMatrix::toeplitz(g, |m| Complex64::new((1.0 + m[0].abs() as f64).powf(-exponent), 0.0))
}

#[test]
fn fourier_coefficients_reproduce_every_diagonal() {
    for (seed, (n, d, band)) in [(2, 1, 2), (3, 2, 1), (5, 1, 4), (2, 2, 2)].into_iter().enumerate() {
        let g = IndexGeometry::window(n, d).unwrap();
        let a = common::random_banded(g, band, seed as u64);
        let nodes = 2 * band as usize + 1;
        for m in g.diff_indices() {
            let q = fourier_coefficient(&a, &m, nodes.max(2 * m.norm_inf() as usize + 1)).unwrap();
            assert!(q.max_abs_diff(&a.side_diagonal(&m).unwrap()) <= 1e-10, "{m:?}");
        }
    }
}

#[test]
fn fourier_coefficients_of_a_decaying_matrix_decay() {
    let g = IndexGeometry::window(12, 1).unwrap();
    let a = power_toeplitz(g, 2.0);
    let nodes = 2 * 24 + 1;
    let pts: Vec<(f64, f64)> = (1..=24)
        .map(|m| {
            let q = fourier_coefficient(&a, &DiffIndex::from(m), nodes).unwrap();
            (1.0 + m as f64, q.max_abs())
        })
        .collect();
    let fit = fit_log_log(&pts).unwrap();
    assert!((fit.exponent - 2.0).abs() < 1e-8, "{fit:?}");
}

#[test]
fn vdp_error_decays_at_the_smoothness_order() {
    let g = IndexGeometry::window(128, 1).unwrap();
    let s = 1.5;
    let tag = NormTag::Jaffard(s);
    for r in [0.5, 1.0, 1.5] {
        let a = power_toeplitz(g, s + r);
        let pts: Vec<(f64, f64)> = jackson_ladder(&a)
            .into_iter()
            .map(|n| {
                let e = norm(&(&a - &vdp_mean(&a, n).unwrap()), &tag).unwrap();
                (1.0 + 2.0 * (n as f64 + 1.0), e)
            })
            .collect();
        let fit = fit_log_log(&pts).unwrap();
        assert!((fit.exponent - r).abs() < 0.05, "r = {r}: {fit:?}");
    }
}

#[test]
fn vdp_error_bounds_the_best_approximation() {
    let g = IndexGeometry::window(40, 1).unwrap();
    let a = power_toeplitz(g, 2.5);
    for t in [NormTag::Jaffard(1.0), NormTag::ConvDom(0.5), NormTag::Schur(0.0)] {
        for n in jackson_ladder(&a) {
            let vdp = norm(&(&a - &vdp_mean(&a, n).unwrap()), &t).unwrap();
            let best = approx_error(&a, 2 * n + 1, &t, Metric::InfNorm).unwrap();
            assert!(best <= vdp * (1.0 + 1e-12), "{t} n={n}: {best} > {vdp}");
        }
    }
}
