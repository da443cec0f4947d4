use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};
use crate::norms::SideDiagonalProfile;

/// Least-squares power-law fit `y ~ C x^{-exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Smallest and largest abscissa label used.
    pub range: (f64, f64),
}

/// Coefficients of a multivariate log-log fit over a 2d or higher profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnisotropicFit {
    /// Exponent of `(1+|m|_1)`.
    pub r: f64,
    /// Exponent of `(1+|m_j|)` per axis.
    pub alpha: Vec<f64>,
    pub intercept: f64,
    pub r_squared: f64,
    /// Decay exponent along each coordinate axis.
    pub rays: Vec<FitResult>,
}

fn r_squared(y: &[f64], fitted: impl Iterator<Item = f64>) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(fitted).map(|(v, f)| (v - f).powi(2)).sum();
    if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    }
}

/// Fit `ln y = c - exponent * x` over points with `y > 0`.
///
/// `labels` are carried into `FitResult::range` only.
pub fn fit_linear_log(points: &[(f64, f64)], labels: (f64, f64), min_points: usize) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y > 0.0)
        .map(|&(x, y)| (x, y.ln()))
        .collect();
    if pts.is_empty() {
        return Err(DecayError::Degenerate("no positive values to fit".into()));
    }
    if pts.len() < min_points {
        return Err(DecayError::InsufficientData(format!(
            "{} positive points, need {min_points}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(DecayError::InsufficientData("all abscissae coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let r2 = r_squared(&ys, pts.iter().map(|p| intercept + slope * p.0));
    Ok(FitResult {
        exponent: -slope,
        intercept,
        r_squared: r2,
        range: labels,
    })
}

/// Fit `y ~ C x^{-exponent}` in log-log coordinates; needs 3 positive points.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<FitResult> {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y)).collect();
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    fit_linear_log(&logs, (lo, hi), 3)
}

/// Decay exponent of a side-diagonal profile.
///
/// The profile is collapsed to its maximum on each shell `|m|_1 = s`, shells
/// `k_min <= s <= k_max` with positive values are kept, and `ln P` is
/// regressed on `ln(1+s)`. Needs four such shells.
pub fn fit_decay_exponent(profile: &SideDiagonalProfile, k_min: i64, k_max: i64) -> Result<FitResult> {
    let shells = profile.shell_maxima();
    let in_range: Vec<(i64, f64)> = shells
        .range(k_min..=k_max)
        .map(|(&s, &v)| (s, v))
        .collect();
    if in_range.iter().all(|(_, v)| *v == 0.0) {
        return Err(DecayError::Degenerate(format!(
            "profile vanishes on shells {k_min}..={k_max}"
        )));
    }
    let pts: Vec<(f64, f64)> = in_range
        .iter()
        .map(|&(s, v)| ((1.0 + s as f64).ln(), v))
        .collect();
    let used: Vec<i64> = in_range.iter().filter(|(_, v)| *v > 0.0).map(|p| p.0).collect();
    let labels = (*used.first().unwrap() as f64, *used.last().unwrap() as f64);
    fit_linear_log(&pts, labels, 4)
}

/// Exponent `rho` in `s_k ~ 2^{-rho k}` for dyadic shell norms `s_k`, `k_min <= k <= k_max`.
pub fn fit_shell_exponent(shells: &[f64], k_min: usize, k_max: usize) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .enumerate()
        .filter(|(k, _)| (k_min..=k_max).contains(k))
        .map(|(k, &s)| (k as f64 * std::f64::consts::LN_2, s))
        .collect();
    fit_linear_log(&pts, (k_min as f64, k_max as f64), 3)
}

/// Multivariate fit `ln P(m) = c - r ln(1+|m|_1) - sum_j alpha_j ln(1+|m_j|)`
/// over `k_min <= |m|_inf <= k_max`, plus a one-dimensional fit along each
/// coordinate axis (taking the larger of `P(x e_j)`, `P(-x e_j)`).
pub fn fit_anisotropic(profile: &SideDiagonalProfile, k_min: i64, k_max: i64) -> Result<AnisotropicFit> {
    let d = profile.geometry().dim();
    let rows: Vec<(Vec<f64>, f64)> = profile
        .iter()
        .filter(|(m, v)| *v > 0.0 && (k_min..=k_max).contains(&m.norm_inf()))
        .map(|(m, v)| {
            let mut x = Vec::with_capacity(d + 2);
            x.push(1.0);
            x.push(-(1.0 + m.norm1() as f64).ln());
            x.extend(m.as_slice().iter().map(|&c| -(1.0 + c.abs() as f64).ln()));
            (x, v.ln())
        })
        .collect();
    if rows.len() < 4 * (d + 2) {
        return Err(DecayError::InsufficientData(format!(
            "{} positive diagonals for a {}-parameter fit",
            rows.len(),
            d + 2
        )));
    }
    let design = DMatrix::from_fn(rows.len(), d + 2, |i, j| rows[i].0[j]);
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| DecayError::InsufficientData(e.to_string()))?;
    let fitted = &design * &coef;
    let ys: Vec<f64> = y.iter().copied().collect();
    let r2 = r_squared(&ys, fitted.iter().copied());

    let mut rays = Vec::with_capacity(d);
    for j in 0..d {
        let pts: Vec<(f64, f64)> = (k_min..=k_max)
            .map(|x| {
                let mut plus = vec![0i64; d];
                plus[j] = x;
                let mut minus = vec![0i64; d];
                minus[j] = -x;
                let v = profile.get(&plus).max(profile.get(&minus));
                ((1.0 + x as f64).ln(), v)
            })
            .collect();
        rays.push(fit_linear_log(&pts, (k_min as f64, k_max as f64), 4)?);
    }
    Ok(AnisotropicFit {
        r: coef[1],
        alpha: coef.iter().skip(2).copied().collect(),
        intercept: coef[0],
        r_squared: r2,
        rays,
    })
}
