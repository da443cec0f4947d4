use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{diagonal_sups, operator_norm};
use crate::error::Result;
use crate::matrix_core::{DecayMatrix, DiffIndex, DiffLayout, IndexGeometry};

/// Norm applied to each side diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerDiagonal {
    MaxEntry,
    OperatorL2,
}

/// `m -> ||A_hat(m)||` over every difference of a geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SideDiagonalProfile {
    geometry: IndexGeometry,
    per_diag: PerDiagonal,
    /// Lexicographic over `geometry.diff_indices()`.
    values: Vec<f64>,
}

impl SideDiagonalProfile {
    /// Build from explicit values; missing differences are zero.
    pub fn from_values(
        geometry: IndexGeometry,
        per_diag: PerDiagonal,
        values: impl IntoIterator<Item = (DiffIndex, f64)>,
    ) -> Result<Self> {
        let lay = DiffLayout::reduced(&geometry);
        let mut dense = vec![0.0; lay.count()];
        for (m, v) in values {
            geometry.check_diff(&m)?;
            if !(v >= 0.0 && v.is_finite()) {
                return Err(crate::DecayError::InvalidParameter(format!(
                    "profile value at {m} must be finite and >= 0"
                )));
            }
            dense[lay.key_of(m.as_slice()).unwrap()] = v;
        }
        Ok(Self {
            geometry,
            per_diag,
            values: dense,
        })
    }

    pub fn geometry(&self) -> &IndexGeometry {
        &self.geometry
    }

    pub fn per_diag(&self) -> PerDiagonal {
        self.per_diag
    }

    /// Value at `m`; zero outside the difference range.
    pub fn get(&self, m: &[i64]) -> f64 {
        DiffLayout::reduced(&self.geometry)
            .key_of(m)
            .map_or(0.0, |k| self.values[k])
    }

    /// All `(m, value)` pairs in lexicographic order of `m`.
    pub fn iter(&self) -> impl Iterator<Item = (DiffIndex, f64)> + '_ {
        let lay = DiffLayout::reduced(&self.geometry);
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (lay.diff_of(k), v))
    }

    /// Pairs with a nonzero value.
    pub fn nonzero(&self) -> Vec<(DiffIndex, f64)> {
        self.iter().filter(|(_, v)| *v != 0.0).collect()
    }

    /// Maximum value on each shell `|m|_1 = s`.
    pub fn shell_maxima(&self) -> BTreeMap<i64, f64> {
        let mut out = BTreeMap::new();
        for (m, v) in self.iter() {
            let e = out.entry(m.norm1()).or_insert(0.0f64);
            *e = e.max(v);
        }
        out
    }
}

/// Profile of the side diagonals of `a` under `per_diag`.
pub fn diagonal_profile(a: &DecayMatrix, per_diag: PerDiagonal) -> Result<SideDiagonalProfile> {
    let g = *a.geometry();
    let lay = DiffLayout::reduced(&g);
    let values = match per_diag {
        PerDiagonal::MaxEntry => diagonal_sups(a, &lay),
        PerDiagonal::OperatorL2 => g
            .diff_indices()
            .iter()
            .map(|m| operator_norm(&a.side_diagonal(m)?))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(SideDiagonalProfile {
        geometry: g,
        per_diag,
        values,
    })
}
