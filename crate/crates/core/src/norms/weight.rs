use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};
use crate::matrix_core::{DiffIndex, DiffLayout, IndexGeometry};

/// Even, normalized, submultiplicative weight on difference indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `v_r(m) = (1 + |m|)^r`
    Polynomial { r: f64 },
    /// `(1 + |m|)^r * prod_j (1 + |m_j|)^{alpha_j}`
    Anisotropic { r: f64, alpha: Vec<u32> },
    Table(WeightTable),
}

/// A tabulated weight over every difference of one geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    geometry: IndexGeometry,
    /// Lexicographic over `geometry.diff_indices()`.
    values: Vec<f64>,
}

const TABLE_SLACK: f64 = 1e-12;

impl Weight {
    pub fn polynomial(r: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(DecayError::InvalidParameter(format!(
                "polynomial weight exponent must be >= 0, got {r}"
            )));
        }
        Ok(Weight::Polynomial { r })
    }

    pub fn anisotropic(r: f64, alpha: Vec<u32>) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(DecayError::InvalidParameter(format!(
                "anisotropic weight exponent must be >= 0, got {r}"
            )));
        }
        Ok(Weight::Anisotropic { r, alpha })
    }

    /// Tabulated weight; checks `v(0) = 1`, evenness, positivity and
    /// submultiplicativity over all pairs of differences of `geometry`.
    pub fn table(geometry: IndexGeometry, values: Vec<(DiffIndex, f64)>) -> Result<Self> {
        let lay = DiffLayout::reduced(&geometry);
        let mut dense = vec![f64::NAN; lay.count()];
        for (m, v) in values {
            let key = lay.key_of(m.as_slice()).ok_or(DecayError::DiffOutOfRange {
                index: m.0.clone(),
                radius: geometry.diff_radius(),
            })?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(DecayError::InvalidParameter(format!(
                    "weight value at {m} must be positive and finite"
                )));
            }
            dense[key] = v;
        }
        if let Some(key) = dense.iter().position(|v| v.is_nan()) {
            return Err(DecayError::InvalidParameter(format!(
                "weight table misses difference {}",
                lay.diff_of(key)
            )));
        }
        let zero = lay.key_of(&vec![0; geometry.dim()]).unwrap();
        if (dense[zero] - 1.0).abs() > TABLE_SLACK {
            return Err(DecayError::InvalidParameter("weight must satisfy v(0) = 1".into()));
        }
        let diffs = geometry.diff_indices();
        for (key, m) in diffs.iter().enumerate() {
            let neg: Vec<i64> = m.0.iter().map(|x| -x).collect();
            let nk = lay.key_of(&neg).unwrap();
            if (dense[key] - dense[nk]).abs() > TABLE_SLACK * dense[key] {
                return Err(DecayError::InvalidParameter(format!(
                    "weight is not even at {m}"
                )));
            }
        }
        for (k1, m1) in diffs.iter().enumerate() {
            for (k2, m2) in diffs.iter().enumerate() {
                let sum: Vec<i64> = m1
                    .0
                    .iter()
                    .zip(&m2.0)
                    .map(|(a, b)| geometry.reduce(a + b))
                    .collect();
                let Some(ks) = lay.key_of(&sum) else { continue };
                if dense[ks] > dense[k1] * dense[k2] * (1.0 + TABLE_SLACK) {
                    return Err(DecayError::InvalidParameter(format!(
                        "weight is not submultiplicative: v({}) > v({m1}) v({m2})",
                        DiffIndex(sum)
                    )));
                }
            }
        }
        Ok(Weight::Table(WeightTable {
            geometry,
            values: dense,
        }))
    }

    /// `v(m)`. Table weights return `NaN` for differences outside their geometry.
    pub fn eval(&self, m: &[i64]) -> f64 {
        match self {
            Weight::Polynomial { r } => poly(m, *r),
            Weight::Anisotropic { r, alpha } => {
                let mut v = poly(m, *r);
                for (x, &a) in m.iter().zip(alpha) {
                    v *= (1.0 + x.abs() as f64).powi(a as i32);
                }
                v
            }
            Weight::Table(t) => {
                let lay = DiffLayout::reduced(&t.geometry);
                lay.key_of(m).map_or(f64::NAN, |k| t.values[k])
            }
        }
    }

    pub(crate) fn check_geometry(&self, g: &IndexGeometry) -> Result<()> {
        match self {
            Weight::Table(t) => t.geometry.check_same(g),
            Weight::Anisotropic { alpha, .. } if alpha.len() != g.dim() => {
                Err(DecayError::InvalidParameter(format!(
                    "anisotropic weight has {} exponents for dimension {}",
                    alpha.len(),
                    g.dim()
                )))
            }
            _ => Ok(()),
        }
    }
}

/// `(1 + |m|_1)^r`
pub(crate) fn poly(m: &[i64], r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let a: i64 = m.iter().map(|x| x.abs()).sum();
    (1.0 + a as f64).powf(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_weight_values() {
        let w = Weight::polynomial(2.0).unwrap();
        assert_eq!(w.eval(&[0]), 1.0);
        assert_eq!(w.eval(&[3]), 16.0);
        assert_eq!(w.eval(&[-3]), 16.0);
        assert_eq!(w.eval(&[1, -2]), 16.0);
        assert!(Weight::polynomial(-1.0).is_err());
    }

    #[test]
    fn anisotropic_weight_values() {
        let w = Weight::anisotropic(1.0, vec![1, 0]).unwrap();
        assert_eq!(w.eval(&[2, 1]), 4.0 * 3.0);
        assert_eq!(w.eval(&[0, 3]), 4.0);
    }

    #[test]
    fn table_weight_is_validated() {
        let g = IndexGeometry::torus(5, 1).unwrap();
        let good: Vec<_> = g
            .diff_indices()
            .into_iter()
            .map(|m| {
                let v = (1.0 + m.norm1() as f64).powf(1.5);
                (m, v)
            })
            .collect();
        let w = Weight::table(g, good.clone()).unwrap();
        assert_eq!(w.eval(&[2]), 3f64.powf(1.5));

        // super-exponential growth breaks submultiplicativity: v(2) > v(1)^2
        let bad: Vec<_> = good
            .iter()
            .map(|(m, _)| (m.clone(), [1.0, 2.0, 5.0][m.norm1() as usize]))
            .collect();
        assert!(Weight::table(g, bad).is_err());

        let mut odd = good.clone();
        odd[0].1 = 7.0; // m = -2 differs from m = 2
        assert!(Weight::table(g, odd).is_err());

        let missing = good[1..].to_vec();
        assert!(Weight::table(g, missing).is_err());
    }
}
