use serde::{Deserialize, Serialize};

use super::generators::{GeneratorKind, GeneratorSpec, LaurentTerm};
use crate::error::{DecayError, Result};
use crate::matrix_core::{IndexGeometry, Metric};
use crate::smoothness::DEFAULT_DYADIC_LEVELS;

fn torus(n: usize, d: usize) -> IndexGeometry {
    IndexGeometry::torus(n, d).expect("valid default geometry")
}

/// Experiment selection and parameters; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Jaffard(JaffardConfig),
    Anisotropic(AnisotropicConfig),
    BandedApproxInverse(BandedApproxConfig),
    HzCd(HzCdConfig),
    QuotientRule(QuotientRuleConfig),
    JacksonBernstein(JacksonBernsteinConfig),
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::Jaffard(_) => "jaffard",
            ExperimentConfig::Anisotropic(_) => "anisotropic",
            ExperimentConfig::BandedApproxInverse(_) => "banded_approx_inverse",
            ExperimentConfig::HzCd(_) => "hz_cd",
            ExperimentConfig::QuotientRule(_) => "quotient_rule",
            ExperimentConfig::JacksonBernstein(_) => "jackson_bernstein",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(DecayError::InvalidParameter(msg.into()));
        let check_common = |r: f64, eps: f64, seeds: &[u64], tol: f64| {
            if !(r > 0.0 && r.is_finite()) {
                return bad("r must be > 0");
            }
            if !(0.0..1.0).contains(&eps) {
                return bad("epsilon must lie in [0, 1)");
            }
            if seeds.is_empty() {
                return bad("at least one seed is required");
            }
            if !(tol >= 0.0 && tol.is_finite()) {
                return bad("tolerance must be >= 0");
            }
            Ok(())
        };
        match self {
            ExperimentConfig::Jaffard(c) => {
                check_common(c.r, c.epsilon, &c.seeds, c.tol)?;
                if c.k_min < 0 || c.k_max.is_some_and(|k| k < c.k_min) {
                    return bad("fit range must satisfy 0 <= k_min <= k_max");
                }
                Ok(())
            }
            ExperimentConfig::Anisotropic(c) => {
                check_common(c.r, c.epsilon, &c.seeds, c.tol)?;
                if c.alpha.len() != c.geometry.dim() {
                    return bad("alpha needs one exponent per axis");
                }
                if c.geometry.dim() < 2 {
                    return bad("anisotropic runs need d >= 2");
                }
                if c.k_min < 1 || c.k_max < c.k_min {
                    return bad("fit range must satisfy 1 <= k_min <= k_max");
                }
                Ok(())
            }
            ExperimentConfig::BandedApproxInverse(c) => {
                check_common(c.r, c.epsilon, &c.seeds, c.tol)?;
                if c.ladder.len() < 3 {
                    return bad("the bandwidth ladder needs at least 3 rungs");
                }
                Ok(())
            }
            ExperimentConfig::HzCd(c) => {
                check_common(c.r, c.epsilon, &c.seeds, c.tol)?;
                if c.k_max.is_some_and(|k| k < c.k_min + 2) {
                    return bad("the shell range needs at least 3 shells");
                }
                Ok(())
            }
            ExperimentConfig::QuotientRule(c) => {
                c.generator.validate()?;
                if !(c.slack >= 0.0) {
                    return bad("slack must be >= 0");
                }
                Ok(())
            }
            ExperimentConfig::JacksonBernstein(c) => {
                if c.rs.is_empty() || c.rs.iter().any(|r| !(*r > 0.0 && *r <= 2.0)) {
                    return bad("smoothness orders must lie in (0, 2]");
                }
                if !(c.s > 1.0) {
                    return bad("base exponent s must exceed 1");
                }
                if c.radius < 16 {
                    return bad("window radius must be at least 16");
                }
                if c.modulus_levels.0 > c.modulus_levels.1 || c.modulus_levels.1 > c.grid_levels {
                    return bad("modulus levels must be increasing and covered by the grid");
                }
                Ok(())
            }
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JaffardConfig {
    pub geometry: IndexGeometry,
    pub r: f64,
    pub epsilon: f64,
    pub seeds: Vec<u64>,
    pub tol: f64,
    pub k_min: i64,
    /// Defaults to the largest difference of the geometry.
    pub k_max: Option<i64>,
}

impl Default for JaffardConfig {
    fn default() -> Self {
        Self {
            geometry: torus(257, 1),
            r: 2.5,
            epsilon: 0.5,
            seeds: default_seeds(),
            tol: 0.3,
            k_min: 2,
            k_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnisotropicConfig {
    pub geometry: IndexGeometry,
    pub r: f64,
    pub alpha: Vec<u32>,
    pub epsilon: f64,
    pub seeds: Vec<u64>,
    pub tol: f64,
    /// Diagonals with `k_min <= |m|_inf <= k_max` enter the fit.
    pub k_min: i64,
    pub k_max: i64,
}

impl Default for AnisotropicConfig {
    fn default() -> Self {
        Self {
            geometry: torus(33, 2),
            r: 2.5,
            alpha: vec![1, 0],
            epsilon: 0.5,
            seeds: default_seeds(),
            tol: 0.4,
            k_min: 2,
            k_max: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandedApproxConfig {
    pub geometry: IndexGeometry,
    pub r: f64,
    pub epsilon: f64,
    pub seeds: Vec<u64>,
    pub tol: f64,
    /// Bandwidths `N` at which `E_N` is evaluated.
    pub ladder: Vec<usize>,
    pub metric: Metric,
}

impl Default for BandedApproxConfig {
    fn default() -> Self {
        Self {
            geometry: torus(257, 1),
            r: 2.5,
            epsilon: 0.5,
            seeds: default_seeds(),
            tol: 0.3,
            ladder: vec![2, 3, 4, 6, 8, 11, 16, 22, 32],
            metric: Metric::OneNorm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HzCdConfig {
    pub geometry: IndexGeometry,
    pub r: f64,
    pub epsilon: f64,
    pub seeds: Vec<u64>,
    pub tol: f64,
    /// First dyadic shell in the exponent fit.
    pub k_min: usize,
    /// Defaults to the outermost complete shell.
    pub k_max: Option<usize>,
}

impl Default for HzCdConfig {
    fn default() -> Self {
        Self {
            geometry: torus(257, 1),
            r: 1.5,
            epsilon: 0.5,
            seeds: default_seeds(),
            tol: 0.3,
            k_min: 1,
            k_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuotientRuleConfig {
    pub generator: GeneratorSpec,
    pub slack: f64,
}

impl Default for QuotientRuleConfig {
    fn default() -> Self {
        use num_complex::Complex64;
        Self {
            generator: GeneratorSpec::new(
                torus(65, 1),
                GeneratorKind::Laurent {
                    terms: vec![
                        LaurentTerm::new(vec![0], Complex64::new(1.0, 0.0)),
                        LaurentTerm::new(vec![1], Complex64::new(0.5, 0.0)),
                    ],
                },
            ),
            slack: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JacksonBernsteinConfig {
    /// The family lives on `Window(radius)` in one dimension.
    pub radius: usize,
    pub s: f64,
    pub rs: Vec<f64>,
    pub tol: f64,
    pub grid_levels: u32,
    /// Bandwidths for the approximation-error ladder.
    pub approx_ladder: Vec<usize>,
    /// `h = 2^{-j}` for `j` in this inclusive range.
    pub modulus_levels: (u32, u32),
}

impl Default for JacksonBernsteinConfig {
    fn default() -> Self {
        Self {
            radius: 128,
            s: 1.5,
            rs: vec![0.5, 1.0, 1.5],
            tol: 0.2,
            grid_levels: DEFAULT_DYADIC_LEVELS,
            approx_ladder: vec![1, 2, 4, 8, 16, 32, 64],
            modulus_levels: (2, 7),
        }
    }
}
