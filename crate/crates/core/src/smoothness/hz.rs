use std::f64::consts::PI;

use num_complex::Complex64;

use super::{derivation_power, derived_norm, finite_difference, MultiIndex, Probe, TGrid};
use crate::error::{DecayError, Result};
use crate::matrix_core::{DecayMatrix, DiffIndex};
use crate::norms::{norm, NormTag};

/// Smoothness order `r = k + eta` with `k = ceil(r) - 1` and `eta` in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HZParams {
    r: f64,
    k: u32,
    eta: f64,
    pub base: NormTag,
    pub grid: TGrid,
}

impl HZParams {
    pub fn new(r: f64, base: NormTag, grid: TGrid) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(DecayError::InvalidParameter(format!(
                "smoothness order must be > 0, got {r}"
            )));
        }
        let k = r.ceil() - 1.0;
        if k > f64::from(super::MAX_ORDER) {
            return Err(DecayError::OrderCap {
                order: k as u32,
                cap: super::MAX_ORDER,
            });
        }
        base.validate()?;
        Ok(Self {
            r,
            k: k as u32,
            eta: r - k,
            base,
            grid,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// `||Delta_t^order A||` in `base` for every probe of `grid`.
pub fn probe_values(
    a: &DecayMatrix,
    order: u32,
    base: &NormTag,
    grid: &TGrid,
) -> Result<Vec<(Probe, f64)>> {
    grid.probes(a.geometry().dim())?
        .into_iter()
        .map(|p| {
            let v = norm(&finite_difference(a, &p.t, order)?, base)?;
            Ok((p, v))
        })
        .collect()
}

/// Grid estimate of `sup_{|t| <= h} ||Delta_t^order A||`, a lower bound of the
/// true modulus.
pub fn modulus_of_smoothness(
    a: &DecayMatrix,
    h: f64,
    order: u32,
    base: &NormTag,
    grid: &TGrid,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(DecayError::InvalidParameter(format!(
            "modulus step must be > 0, got {h}"
        )));
    }
    let probes: Vec<Probe> = grid
        .probes(a.geometry().dim())?
        .into_iter()
        .filter(|p| p.norm1 <= h * (1.0 + 1e-12))
        .collect();
    if probes.is_empty() {
        return Err(DecayError::EmptyGrid { h });
    }
    let mut best = 0.0f64;
    for p in probes {
        best = best.max(norm(&finite_difference(a, &p.t, order)?, base)?);
    }
    Ok(best)
}

/// Grid estimate of `sup_t |t|^{-eta} ||Delta_t^2 A||`.
pub fn hz_seminorm(a: &DecayMatrix, eta: f64, base: &NormTag, grid: &TGrid) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(DecayError::InvalidParameter(format!(
            "Hölder exponent must lie in (0, 1], got {eta}"
        )));
    }
    Ok(probe_values(a, 2, base, grid)?
        .into_iter()
        .map(|(p, v)| v * p.norm1.powf(-eta))
        .fold(0.0, f64::max))
}

/// `derived_norm(A, k) + sum_{|alpha| = k} |delta^alpha A|_eta`.
pub fn hz_norm(a: &DecayMatrix, params: &HZParams) -> Result<f64> {
    let mut total = derived_norm(a, params.k, &params.base)?;
    for alpha in MultiIndex::of_order(a.geometry().dim(), params.k)? {
        let da = derivation_power(a, &alpha)?;
        total += hz_seminorm(&da, params.eta, &params.base, &params.grid)?;
    }
    Ok(total)
}

/// Largest `|k_j - l_j|` over the nonzero entries, per axis.
pub(crate) fn occupied_radius(a: &DecayMatrix) -> Vec<i64> {
    let g = a.geometry();
    let n = a.dim();
    let pos: Vec<Vec<i64>> = (0..n).map(|i| g.position(i)).collect();
    let mut out = vec![0i64; g.dim()];
    for k in 0..n {
        for (l, z) in a.row(k).iter().enumerate() {
            if *z != Complex64::new(0.0, 0.0) {
                for (o, (x, y)) in out.iter_mut().zip(pos[k].iter().zip(&pos[l])) {
                    *o = (*o).max((x - y).abs());
                }
            }
        }
    }
    out
}

/// Trapezoid rule for `int_{[0,1)^d} chi_t(A) e^{-2 pi i m.t} dt` with `nodes`
/// points per axis. Exact, and equal to the `m`-th side diagonal, once the
/// nodes resolve every occupied difference.
pub fn fourier_coefficient(a: &DecayMatrix, m: &DiffIndex, nodes: usize) -> Result<DecayMatrix> {
    let g = a.geometry();
    if m.dim() != g.dim() {
        return Err(DecayError::InvalidParameter(format!(
            "difference {m} does not match dimension {}",
            g.dim()
        )));
    }
    let occupied = occupied_radius(a);
    let max_diff = occupied
        .iter()
        .zip(m.as_slice())
        .map(|(o, x)| (*o).max(x.abs()))
        .max()
        .unwrap_or(0);
    let required = 2 * max_diff as usize + 1;
    if nodes < required {
        return Err(DecayError::Aliasing {
            nodes,
            max_diff,
            required,
        });
    }
    // per-axis quadrature weight of e^{2 pi i (p - m_j) x}, p over positional differences
    let reach = 2 * g.half();
    let axis_weights: Vec<Vec<Complex64>> = m
        .as_slice()
        .iter()
        .map(|&mj| {
            (-reach..=reach)
                .map(|p| {
                    let s: Complex64 = (0..nodes)
                        .map(|x| {
                            let arg = 2.0 * PI * ((p - mj) as f64) * (x as f64) / nodes as f64;
                            Complex64::from_polar(1.0, arg)
                        })
                        .sum();
                    s / nodes as f64
                })
                .collect()
        })
        .collect();
    Ok(a.map_positional(|p| {
        p.iter()
            .zip(&axis_weights)
            .map(|(&pj, w)| w[(pj + reach) as usize])
            .product()
    }))
}

/// `max ||Delta_t A||` over the finest dyadic shell of `grid` and the probes
/// `e_i / (2 M_i)`, `M_i` the outermost occupied difference along axis `i`.
pub fn continuity_defect(a: &DecayMatrix, base: &NormTag, grid: &TGrid) -> Result<f64> {
    let d = a.geometry().dim();
    let mut probes = grid.finest_shell(d);
    for (i, &mi) in occupied_radius(a).iter().enumerate() {
        if mi > 0 {
            let mut t = vec![0.0; d];
            t[i] = 1.0 / (2.0 * mi as f64);
            probes.push(t);
        }
    }
    let mut best = 0.0f64;
    for t in probes {
        best = best.max(norm(&finite_difference(a, &t, 1)?, base)?);
    }
    Ok(best)
}
