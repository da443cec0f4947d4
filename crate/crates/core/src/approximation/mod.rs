//! Approximation by banded matrices.
//!
//! `E_N(A)` is the distance from `A` to matrices of bandwidth `N`. For solid
//! norms the truncation `band_truncate(A, N)` is a best approximation, so the
//! error is exact; under the operator norm it is only an upper bound.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};
use crate::matrix_core::{DecayMatrix, Metric};
use crate::norms::{norm, NormTag};
use crate::smoothness::{modulus_of_smoothness, TGrid};

/// Whether the recorded errors are exact minima or truncation upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApproxFlag {
    ExactMinimizer,
    TruncationProxy,
}

impl fmt::Display for ApproxFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxFlag::ExactMinimizer => write!(f, "exact"),
            ApproxFlag::TruncationProxy => write!(f, "truncation_proxy"),
        }
    }
}

impl ApproxFlag {
    pub fn for_tag(tag: &NormTag) -> Self {
        if tag.is_solid() {
            ApproxFlag::ExactMinimizer
        } else {
            ApproxFlag::TruncationProxy
        }
    }
}

/// `(N, E_N)` for `N = 0..=band_range`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxProfile {
    pub tag: NormTag,
    pub metric: Metric,
    pub flag: ApproxFlag,
    pub errors: Vec<(usize, f64)>,
}

/// `l^p` exponent for the approximation-space norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub fn finite(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(DecayError::InvalidParameter(format!(
                "p must be >= 1, got {p}"
            )));
        }
        Ok(PExponent::Finite(p))
    }
}

impl std::str::FromStr for PExponent {
    type Err = DecayError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(PExponent::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| {
                    DecayError::InvalidParameter(format!("cannot parse p from {other:?}"))
                })?;
                PExponent::finite(p)
            }
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => write!(f, "inf"),
        }
    }
}

/// `||A - band_truncate(A, N)||` in `tag`.
pub fn approx_error(a: &DecayMatrix, n: usize, tag: &NormTag, metric: Metric) -> Result<f64> {
    let rest = a - &a.band_truncate(n, metric);
    norm(&rest, tag)
}

/// All approximation errors up to the band range of the geometry.
///
/// Under a non-solid tag each entry is the smallest truncation error seen so
/// far, which is still an upper bound for the true (monotone) error.
pub fn approx_profile(a: &DecayMatrix, tag: &NormTag, metric: Metric) -> Result<ApproxProfile> {
    let flag = ApproxFlag::for_tag(tag);
    let nmax = a.geometry().band_range(metric);
    let mut errors = Vec::with_capacity(nmax + 1);
    let mut best = f64::INFINITY;
    for n in 0..=nmax {
        let mut e = approx_error(a, n, tag, metric)?;
        if flag == ApproxFlag::TruncationProxy {
            best = best.min(e);
            e = best;
        }
        errors.push((n, e));
    }
    Ok(ApproxProfile {
        tag: tag.clone(),
        metric,
        flag,
        errors,
    })
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(DecayError::InvalidParameter(format!(
            "approximation order must be > 0, got {r}"
        )));
    }
    Ok(())
}

/// Norm of the error sequence in `E^p_r`.
pub fn approx_space_norm_of(profile: &ApproxProfile, r: f64, p: PExponent) -> Result<f64> {
    check_r(r)?;
    let weight = |n: usize| n as f64 + 1.0;
    Ok(match p {
        PExponent::Infinity => profile
            .errors
            .iter()
            .map(|&(n, e)| weight(n).powf(r) * e)
            .fold(0.0, f64::max),
        PExponent::Finite(p) => profile
            .errors
            .iter()
            .map(|&(n, e)| e.powf(p) * weight(n).powf(r * p - 1.0))
            .sum::<f64>()
            .powf(1.0 / p),
    })
}

/// `(sum_N E_N^p (N+1)^{rp-1})^{1/p}`, or `max_N (N+1)^r E_N` for `p = inf`.
pub fn approx_space_norm(
    a: &DecayMatrix,
    r: f64,
    p: PExponent,
    tag: &NormTag,
    metric: Metric,
) -> Result<f64> {
    check_r(r)?;
    approx_space_norm_of(&approx_profile(a, tag, metric)?, r, p)
}

/// `A(k,l) prod_j (1 - |m_j|/(n+1))^+`
pub fn fejer_mean(a: &DecayMatrix, n: usize) -> DecayMatrix {
    let scale = (n + 1) as f64;
    a.map_reduced(|m| {
        let f: f64 = m
            .iter()
            .map(|&x| (1.0 - x.abs() as f64 / scale).max(0.0))
            .product();
        Complex64::new(f, 0.0)
    })
}

/// One-axis de la Vallée Poussin coefficient: 1 up to `n+1`, linear to 0 at `2(n+1)`.
pub fn vdp_coefficient(m: i64, n: usize) -> f64 {
    let m = m.abs() as f64;
    let n1 = (n + 1) as f64;
    if m <= n1 {
        1.0
    } else {
        (2.0 - m / n1).max(0.0)
    }
}

/// Tensor de la Vallée Poussin mean; reproduces bandwidth `<= n+1` (sup metric)
/// and has bandwidth `<= 2n+1`.
pub fn vdp_mean(a: &DecayMatrix, n: usize) -> Result<DecayMatrix> {
    let range = a.geometry().band_range(Metric::InfNorm);
    if 2 * n + 1 > range {
        return Err(DecayError::BandRange {
            requested: 2 * n + 1,
            range,
        });
    }
    Ok(a.map_reduced(|m| {
        Complex64::new(m.iter().map(|&x| vdp_coefficient(x, n)).product(), 0.0)
    }))
}

fn check_solid(tag: &NormTag) -> Result<()> {
    if !tag.is_solid() {
        return Err(DecayError::InvalidParameter(format!(
            "{tag} is not a solid norm"
        )));
    }
    Ok(())
}

/// `[||A_hat(0)||, ||S_0||, ||S_1||, ...]` with `S_k` the sum of the side
/// diagonals `2^k <= |m|_1 < 2^{k+1}`, `k = 0..=floor(log2(band range))`.
pub fn shell_norms(a: &DecayMatrix, tag: &NormTag) -> Result<Vec<f64>> {
    let range = a.geometry().band_range(Metric::OneNorm);
    let kmax = usize::BITS - 1 - range.max(1).leading_zeros();
    let mut out = Vec::with_capacity(kmax as usize + 2);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    out.push(norm(
        &a.map_reduced(|m| if m.iter().all(|&x| x == 0) { one } else { zero }),
        tag,
    )?);
    for k in 0..=kmax {
        let (lo, hi) = (1i64 << k, 1i64 << (k + 1));
        let shell = a.map_reduced(|m| {
            let s: i64 = m.iter().map(|x| x.abs()).sum();
            if lo <= s && s < hi {
                one
            } else {
                zero
            }
        });
        out.push(norm(&shell, tag)?);
    }
    Ok(out)
}

/// `max(||A_hat(0)||, max_k 2^{rk} ||S_k||)`
pub fn lp_block_norm(a: &DecayMatrix, r: f64, tag: &NormTag) -> Result<f64> {
    check_r(r)?;
    check_solid(tag)?;
    let shells = shell_norms(a, tag)?;
    Ok(shells
        .iter()
        .skip(1)
        .enumerate()
        .map(|(k, s)| 2f64.powf(r * k as f64) * s)
        .fold(shells[0], f64::max))
}

/// One rung of a Jackson ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonRow {
    pub n: usize,
    pub vdp_error: f64,
    /// Grid estimate of the second-order modulus at `h = 1/n`.
    pub modulus_estimate: f64,
}

/// `n = 1, 2, 4, ...` while `2n+1` stays inside the band range.
pub fn jackson_ladder(a: &DecayMatrix) -> Vec<usize> {
    let range = a.geometry().band_range(Metric::InfNorm);
    std::iter::successors(Some(1usize), |n| Some(n * 2))
        .take_while(|n| 2 * n + 1 <= range)
        .collect()
}

/// `(n, ||A - vdp_mean(A, n)||, omega^2_{1/n}(A))` along the dyadic ladder.
pub fn jackson_profile(a: &DecayMatrix, tag: &NormTag, grid: &TGrid) -> Result<Vec<JacksonRow>> {
    check_solid(tag)?;
    jackson_ladder(a)
        .into_iter()
        .map(|n| {
            let vdp_error = norm(&(a - &vdp_mean(a, n)?), tag)?;
            let modulus_estimate = modulus_of_smoothness(a, 1.0 / n as f64, 2, tag, grid)?;
            Ok(JacksonRow {
                n,
                vdp_error,
                modulus_estimate,
            })
        })
        .collect()
}
