//! Finite index models of Z^d.
//!
//! Both geometries index the same centered box `{-h, ..., h}^d` and order it
//! lexicographically (axis 0 most significant). They differ only in how the
//! difference `k - l` of two indices is measured:
//!
//! - `Torus(N)`: differences are reduced per axis to the centered residue in
//!   `{-(N-1)/2, ..., (N-1)/2}`. Matrices over the torus form a closed algebra.
//! - `Window(n)`: differences are taken literally and lie in `{-2n, ..., 2n}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Torus,
    Window,
}

/// Metric used to measure bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `|m|_1`
    #[serde(rename = "one")]
    OneNorm,
    /// `|m|_inf`
    #[default]
    #[serde(rename = "inf")]
    InfNorm,
}

impl Metric {
    pub fn measure(self, m: &[i64]) -> i64 {
        match self {
            Metric::OneNorm => m.iter().map(|x| x.abs()).sum(),
            Metric::InfNorm => m.iter().map(|x| x.abs()).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct IndexGeometry {
    kind: GeometryKind,
    d: usize,
    size: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGeometry {
    kind: GeometryKind,
    d: usize,
    size: usize,
}

impl TryFrom<RawGeometry> for IndexGeometry {
    type Error = DecayError;

    fn try_from(raw: RawGeometry) -> Result<Self> {
        IndexGeometry::new(raw.kind, raw.d, raw.size)
    }
}

impl From<IndexGeometry> for RawGeometry {
    fn from(g: IndexGeometry) -> Self {
        RawGeometry {
            kind: g.kind,
            d: g.d,
            size: g.size,
        }
    }
}

/// Largest supported dimension count of the index box (`side^d` must stay dense-storable).
const MAX_DIM: usize = 4;

impl IndexGeometry {
    pub fn new(kind: GeometryKind, d: usize, size: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(DecayError::InvalidGeometry(format!(
                "dimension {d} not in 1..={MAX_DIM}"
            )));
        }
        match kind {
            GeometryKind::Torus if size < 3 || size % 2 == 0 => {
                return Err(DecayError::InvalidGeometry(format!(
                    "torus period must be odd and >= 3, got {size}"
                )))
            }
            GeometryKind::Window if size < 1 => {
                return Err(DecayError::InvalidGeometry(
                    "window radius must be >= 1".into(),
                ))
            }
            _ => {}
        }
        Ok(Self { kind, d, size })
    }

    pub fn torus(period: usize, d: usize) -> Result<Self> {
        Self::new(GeometryKind::Torus, d, period)
    }

    pub fn window(radius: usize, d: usize) -> Result<Self> {
        Self::new(GeometryKind::Window, d, radius)
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Torus period or window radius, as given at construction.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_torus(&self) -> bool {
        self.kind == GeometryKind::Torus
    }

    /// Number of indices per axis.
    pub fn side(&self) -> usize {
        match self.kind {
            GeometryKind::Torus => self.size,
            GeometryKind::Window => 2 * self.size + 1,
        }
    }

    /// Positions along an axis run over `-half..=half`.
    pub fn half(&self) -> i64 {
        (self.side() as i64 - 1) / 2
    }

    /// Total number of indices (matrix dimension).
    pub fn len(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest `|m_j|` a (reduced) difference can have.
    pub fn diff_radius(&self) -> i64 {
        match self.kind {
            GeometryKind::Torus => self.half(),
            GeometryKind::Window => 2 * self.half(),
        }
    }

    /// Largest bandwidth that is not trivially the whole matrix.
    pub fn band_range(&self, metric: Metric) -> usize {
        let r = self.diff_radius() as usize;
        match metric {
            Metric::InfNorm => r,
            Metric::OneNorm => r * self.d,
        }
    }

    /// Centered position of the flat index `idx`.
    pub fn position(&self, idx: usize) -> Vec<i64> {
        let side = self.side();
        let h = self.half();
        let mut out = vec![0; self.d];
        let mut rest = idx;
        for j in (0..self.d).rev() {
            out[j] = (rest % side) as i64 - h;
            rest /= side;
        }
        out
    }

    /// Flat index of a centered position, if inside the box.
    pub fn flat_index(&self, pos: &[i64]) -> Option<usize> {
        if pos.len() != self.d {
            return None;
        }
        let h = self.half();
        let side = self.side();
        let mut idx = 0usize;
        for &p in pos {
            if p < -h || p > h {
                return None;
            }
            idx = idx * side + (p + h) as usize;
        }
        Some(idx)
    }

    /// Reduce a single-axis difference to the representative used by the metrics.
    pub fn reduce(&self, raw: i64) -> i64 {
        match self.kind {
            GeometryKind::Torus => {
                let n = self.size as i64;
                let h = self.half();
                (raw + h).rem_euclid(n) - h
            }
            GeometryKind::Window => raw,
        }
    }

    /// Reduced difference `k - l` of two flat indices.
    pub fn diff(&self, k: usize, l: usize) -> DiffIndex {
        let pk = self.position(k);
        let pl = self.position(l);
        DiffIndex(
            pk.iter()
                .zip(&pl)
                .map(|(a, b)| self.reduce(a - b))
                .collect(),
        )
    }

    pub fn contains_diff(&self, m: &DiffIndex) -> bool {
        m.dim() == self.d && m.0.iter().all(|x| x.abs() <= self.diff_radius())
    }

    pub(crate) fn check_diff(&self, m: &DiffIndex) -> Result<()> {
        if self.contains_diff(m) {
            Ok(())
        } else {
            Err(DecayError::DiffOutOfRange {
                index: m.0.clone(),
                radius: self.diff_radius(),
            })
        }
    }

    /// All difference indices of the geometry in lexicographic order.
    pub fn diff_indices(&self) -> Vec<DiffIndex> {
        let layout = DiffLayout::reduced(self);
        (0..layout.count()).map(|k| layout.diff_of(k)).collect()
    }

    pub fn check_same(&self, other: &IndexGeometry) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(DecayError::GeometryMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for IndexGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            GeometryKind::Torus => "torus",
            GeometryKind::Window => "window",
        };
        write!(f, "{kind}:{}", self.size)?;
        if self.d != 1 {
            write!(f, "^{}", self.d)?;
        }
        Ok(())
    }
}

/// A difference `k - l` of two indices (reduced on the torus).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiffIndex(pub Vec<i64>);

impl DiffIndex {
    pub fn new(m: impl Into<Vec<i64>>) -> Self {
        DiffIndex(m.into())
    }

    pub fn zero(d: usize) -> Self {
        DiffIndex(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    /// `|m|`, the 1-norm.
    pub fn norm1(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn norm_inf(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn norm2_sq(&self) -> i64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
}

impl From<i64> for DiffIndex {
    fn from(m: i64) -> Self {
        DiffIndex(vec![m])
    }
}

impl fmt::Display for DiffIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Dense enumeration of a box of differences `{-radius..=radius}^d`, used to
/// tabulate per-diagonal quantities without hashing in the inner loops.
#[derive(Debug, Clone)]
pub(crate) struct DiffLayout {
    d: usize,
    radius: i64,
    width: usize,
    /// Centered positions, `len * d`.
    coords: Vec<i64>,
    /// `Some(N)` when differences are reduced modulo `N`.
    period: Option<i64>,
    half: i64,
}

impl DiffLayout {
    /// Differences as measured by the norms (reduced on the torus).
    pub(crate) fn reduced(g: &IndexGeometry) -> Self {
        let period = g.is_torus().then_some(g.size() as i64);
        Self::build(g, g.diff_radius(), period)
    }

    /// Literal position differences `k - l`.
    pub(crate) fn positional(g: &IndexGeometry) -> Self {
        Self::build(g, 2 * g.half(), None)
    }

    fn build(g: &IndexGeometry, radius: i64, period: Option<i64>) -> Self {
        let n = g.len();
        let d = g.dim();
        let mut coords = Vec::with_capacity(n * d);
        for idx in 0..n {
            coords.extend(g.position(idx));
        }
        Self {
            d,
            radius,
            width: (2 * radius + 1) as usize,
            coords,
            period,
            half: g.half(),
        }
    }

    pub(crate) fn count(&self) -> usize {
        self.width.pow(self.d as u32)
    }

    #[inline]
    fn axis_diff(&self, k: usize, l: usize, j: usize) -> i64 {
        let raw = self.coords[k * self.d + j] - self.coords[l * self.d + j];
        match self.period {
            Some(n) => (raw + self.half).rem_euclid(n) - self.half,
            None => raw,
        }
    }

    /// Table key of the difference between flat indices `k` and `l`.
    #[inline]
    pub(crate) fn key(&self, k: usize, l: usize) -> usize {
        let mut key = 0usize;
        for j in 0..self.d {
            key = key * self.width + (self.axis_diff(k, l, j) + self.radius) as usize;
        }
        key
    }

    pub(crate) fn key_of(&self, m: &[i64]) -> Option<usize> {
        if m.len() != self.d {
            return None;
        }
        let mut key = 0usize;
        for &x in m {
            if x.abs() > self.radius {
                return None;
            }
            key = key * self.width + (x + self.radius) as usize;
        }
        Some(key)
    }

    pub(crate) fn diff_of(&self, mut key: usize) -> DiffIndex {
        let mut out = vec![0; self.d];
        for j in (0..self.d).rev() {
            out[j] = (key % self.width) as i64 - self.radius;
            key /= self.width;
        }
        DiffIndex(out)
    }

    /// Tabulate `f` over every difference in the box.
    pub(crate) fn tabulate<T>(&self, mut f: impl FnMut(&[i64]) -> T) -> Vec<T> {
        let mut buf = vec![0i64; self.d];
        (0..self.count())
            .map(|mut key| {
                for j in (0..self.d).rev() {
                    buf[j] = (key % self.width) as i64 - self.radius;
                    key /= self.width;
                }
                f(&buf)
            })
            .collect()
    }
}
