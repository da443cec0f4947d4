use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};
use crate::matrix_core::{DecayMatrix, DiffIndex};

pub const DEFAULT_DYADIC_LEVELS: u32 = 12;

fn default_levels() -> u32 {
    DEFAULT_DYADIC_LEVELS
}

/// Finite set of modulation parameters used to estimate sups over `t`.
///
/// Probes are, in order: `m / (2 |m|_2^2)` for each `m` in `targeted_support`,
/// then `2^{-j} e_i` for `j = 0..=dyadic_levels` and each axis `i`, then `extra`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    #[serde(default = "default_levels")]
    pub dyadic_levels: u32,
    #[serde(default)]
    pub targeted_support: Vec<DiffIndex>,
    #[serde(default)]
    pub extra: Vec<Vec<f64>>,
}

/// A probe point with its 1-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub t: Vec<f64>,
    pub norm1: f64,
}

impl Probe {
    fn new(t: Vec<f64>) -> Self {
        let norm1 = t.iter().map(|x| x.abs()).sum();
        Self { t, norm1 }
    }
}

impl Default for TGrid {
    fn default() -> Self {
        Self::dyadic(DEFAULT_DYADIC_LEVELS)
    }
}

impl TGrid {
    pub fn dyadic(levels: u32) -> Self {
        Self {
            dyadic_levels: levels,
            targeted_support: Vec::new(),
            extra: Vec::new(),
        }
    }

    /// Dyadic probes plus targeted probes at every nonzero diagonal of `a`.
    pub fn targeted(a: &DecayMatrix, levels: u32) -> Self {
        let support = a
            .diagonal_support(0.0)
            .into_iter()
            .filter(|m| !m.is_zero())
            .collect();
        Self {
            dyadic_levels: levels,
            targeted_support: support,
            extra: Vec::new(),
        }
    }

    pub fn with_extra(mut self, t: Vec<f64>) -> Self {
        self.extra.push(t);
        self
    }

    /// `m / (2 |m|_2^2)`, the point where `m.t = 1/2`.
    pub fn targeted_probe(m: &DiffIndex) -> Vec<f64> {
        let n2 = 2.0 * m.norm2_sq() as f64;
        m.as_slice().iter().map(|&x| x as f64 / n2).collect()
    }

    /// The probe list for dimension `d`, in deterministic order.
    pub fn probes(&self, d: usize) -> Result<Vec<Probe>> {
        let mut out = Vec::new();
        for m in &self.targeted_support {
            if m.dim() != d || m.is_zero() {
                return Err(DecayError::InvalidParameter(format!(
                    "targeted difference {m} must be nonzero with {d} components"
                )));
            }
            out.push(Probe::new(Self::targeted_probe(m)));
        }
        out.extend(self.dyadic_probes(d).map(Probe::new));
        for t in &self.extra {
            if t.len() != d || t.iter().any(|x| !x.is_finite()) || t.iter().all(|&x| x == 0.0) {
                return Err(DecayError::InvalidParameter(format!(
                    "extra probe {t:?} must be finite, nonzero and have {d} components"
                )));
            }
            out.push(Probe::new(t.clone()));
        }
        if out.is_empty() {
            return Err(DecayError::EmptyGrid { h: f64::INFINITY });
        }
        Ok(out)
    }

    fn dyadic_probes(&self, d: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..=self.dyadic_levels).flat_map(move |j| {
            (0..d).map(move |i| {
                let mut t = vec![0.0; d];
                t[i] = 0.5f64.powi(j as i32);
                t
            })
        })
    }

    /// The smallest dyadic shell `2^{-J} e_i`.
    pub(crate) fn finest_shell(&self, d: usize) -> Vec<Vec<f64>> {
        let h = 0.5f64.powi(self.dyadic_levels as i32);
        (0..d)
            .map(|i| {
                let mut t = vec![0.0; d];
                t[i] = h;
                t
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_order_and_count() {
        let g = TGrid {
            dyadic_levels: 2,
            targeted_support: vec![DiffIndex::new(vec![1, 1])],
            extra: vec![vec![0.3, 0.0]],
        };
        let p = g.probes(2).unwrap();
        assert_eq!(p.len(), 1 + 3 * 2 + 1);
        assert_eq!(p[0].t, vec![0.25, 0.25]);
        assert_eq!(p[0].norm1, 0.5);
        assert_eq!(p[1].t, vec![1.0, 0.0]);
        assert_eq!(p[6].t, vec![0.0, 0.25]);
    }

    #[test]
    fn targeted_probe_hits_half_period() {
        let m = DiffIndex::new(vec![3, -2]);
        let t = TGrid::targeted_probe(&m);
        let dot: f64 = m.as_slice().iter().zip(&t).map(|(&a, b)| a as f64 * b).sum();
        assert!((dot - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_json_roundtrip() {
        let g = TGrid::dyadic(5).with_extra(vec![0.1]);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"dyadic_levels":5,"targeted_support":[],"extra":[[0.1]]}"#);
        assert_eq!(serde_json::from_str::<TGrid>(&s).unwrap(), g);
        let d: TGrid = serde_json::from_str("{}").unwrap();
        assert_eq!(d.dyadic_levels, DEFAULT_DYADIC_LEVELS);
    }

    #[test]
    fn invalid_probes_are_rejected() {
        let g = TGrid::dyadic(1).with_extra(vec![0.0]);
        assert!(g.probes(1).is_err());
        let g = TGrid {
            targeted_support: vec![DiffIndex::zero(1)],
            ..TGrid::dyadic(1)
        };
        assert!(g.probes(1).is_err());
    }
}
