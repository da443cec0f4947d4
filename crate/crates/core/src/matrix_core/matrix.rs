use std::collections::BTreeSet;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::geometry::{DiffIndex, DiffLayout, IndexGeometry, Metric};
use crate::error::{DecayError, Result};

/// Condition estimates above this are reported as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Dense complex matrix over an [`IndexGeometry`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayMatrix {
    geometry: IndexGeometry,
    data: Vec<Complex64>,
}

impl DecayMatrix {
    pub fn zeros(geometry: IndexGeometry) -> Self {
        let n = geometry.len();
        Self {
            geometry,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(geometry: IndexGeometry) -> Self {
        let mut a = Self::zeros(geometry);
        let n = geometry.len();
        for k in 0..n {
            a.data[k * n + k] = Complex64::new(1.0, 0.0);
        }
        a
    }

    /// Build from row-major entries, rejecting NaN/Inf.
    pub fn from_entries(geometry: IndexGeometry, data: Vec<Complex64>) -> Result<Self> {
        let n = geometry.len();
        if data.len() != n * n {
            return Err(DecayError::EntryCount {
                expected: n * n,
                got: data.len(),
            });
        }
        if let Some(position) = data.iter().position(|z| !z.is_finite()) {
            return Err(DecayError::NonFinite { position });
        }
        Ok(Self { geometry, data })
    }

    /// `A(k,l) = f(pos(k), pos(l))` over centered positions.
    pub fn from_fn(
        geometry: IndexGeometry,
        mut f: impl FnMut(&[i64], &[i64]) -> Complex64,
    ) -> Self {
        let n = geometry.len();
        let pos: Vec<Vec<i64>> = (0..n).map(|i| geometry.position(i)).collect();
        let mut data = Vec::with_capacity(n * n);
        for pk in &pos {
            for pl in &pos {
                data.push(f(pk, pl));
            }
        }
        Self { geometry, data }
    }

    /// Toeplitz (circulant on the torus) matrix `A(k,l) = a(k - l)` with the reduced difference.
    pub fn toeplitz(geometry: IndexGeometry, f: impl FnMut(&[i64]) -> Complex64) -> Self {
        let lay = DiffLayout::reduced(&geometry);
        let table = lay.tabulate(f);
        let n = geometry.len();
        let mut data = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                data.push(table[lay.key(k, l)]);
            }
        }
        Self { geometry, data }
    }

    pub fn geometry(&self) -> &IndexGeometry {
        &self.geometry
    }

    /// Matrix dimension (number of rows).
    pub fn dim(&self) -> usize {
        self.geometry.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.data[k * self.dim() + l]
    }

    pub fn set(&mut self, k: usize, l: usize, value: Complex64) {
        let n = self.dim();
        self.data[k * n + l] = value;
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        let n = self.dim();
        &self.data[k * n..(k + 1) * n]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DecayMatrix) -> f64 {
        assert_eq!(self.geometry, other.geometry, "geometry mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> DecayMatrix {
        self.map(|z| z * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> DecayMatrix {
        DecayMatrix {
            geometry: self.geometry,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Multiply every entry by a factor depending on its reduced difference.
    pub(crate) fn map_reduced(&self, f: impl FnMut(&[i64]) -> Complex64) -> DecayMatrix {
        self.map_by_layout(&DiffLayout::reduced(&self.geometry), f)
    }

    /// Multiply every entry by a factor depending on its positional difference `k - l`.
    pub(crate) fn map_positional(&self, f: impl FnMut(&[i64]) -> Complex64) -> DecayMatrix {
        self.map_by_layout(&DiffLayout::positional(&self.geometry), f)
    }

    fn map_by_layout(
        &self,
        lay: &DiffLayout,
        f: impl FnMut(&[i64]) -> Complex64,
    ) -> DecayMatrix {
        let table = lay.tabulate(f);
        let n = self.dim();
        let mut data = self.data.clone();
        for k in 0..n {
            for l in 0..n {
                data[k * n + l] *= table[lay.key(k, l)];
            }
        }
        DecayMatrix {
            geometry: self.geometry,
            data,
        }
    }

    /// The `m`-th side diagonal: entries with `k - l = m`, zero elsewhere.
    pub fn side_diagonal(&self, m: &DiffIndex) -> Result<DecayMatrix> {
        self.geometry.check_diff(m)?;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Ok(self.map_reduced(|x| if x == m.as_slice() { one } else { zero }))
    }

    /// Differences whose side diagonal has an entry of modulus above `threshold`.
    pub fn diagonal_support(&self, threshold: f64) -> BTreeSet<DiffIndex> {
        let lay = DiffLayout::reduced(&self.geometry);
        let mut best = vec![0.0f64; lay.count()];
        let n = self.dim();
        for k in 0..n {
            for l in 0..n {
                let key = lay.key(k, l);
                best[key] = best[key].max(self.data[k * n + l].norm());
            }
        }
        best.iter()
            .enumerate()
            .filter(|(_, &v)| v > threshold)
            .map(|(key, _)| lay.diff_of(key))
            .collect()
    }

    /// Keep the entries with `|k - l| <= bandwidth` in `metric`.
    pub fn band_truncate(&self, bandwidth: usize, metric: Metric) -> DecayMatrix {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        self.map_reduced(|m| {
            if metric.measure(m) as usize <= bandwidth {
                one
            } else {
                zero
            }
        })
    }

    pub fn multiply(&self, other: &DecayMatrix) -> Result<DecayMatrix> {
        self.geometry.check_same(&other.geometry)?;
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let row_out = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row_b = &other.data[k * n..(k + 1) * n];
                for (c, b) in row_out.iter_mut().zip(row_b) {
                    *c += a * b;
                }
            }
        }
        Ok(DecayMatrix {
            geometry: self.geometry,
            data: out,
        })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> DecayMatrix {
        let n = self.dim();
        let mut data = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                data.push(self.data[l * n + k].conj());
            }
        }
        DecayMatrix {
            geometry: self.geometry,
            data,
        }
    }

    /// Dense inverse via LU with partial pivoting.
    ///
    /// Fails with [`DecayError::Singular`] when the factorization breaks down or
    /// the 1-norm condition number exceeds [`MAX_CONDITION`].
    pub fn invert(&self) -> Result<DecayMatrix> {
        let n = self.dim();
        let m = DMatrix::from_row_slice(n, n, &self.data);
        let inv = m
            .lu()
            .try_inverse()
            .ok_or(DecayError::Singular {
                condition: f64::INFINITY,
            })?;
        let mut data = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                data.push(inv[(k, l)]);
            }
        }
        let out = DecayMatrix {
            geometry: self.geometry,
            data,
        };
        let condition = self.norm_one() * out.norm_one();
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(DecayError::Singular { condition });
        }
        Ok(out)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let n = self.dim();
        let mut cols = vec![0.0; n];
        for k in 0..n {
            for (c, z) in cols.iter_mut().zip(self.row(k)) {
                *c += z.norm();
            }
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    /// `y = A x`
    pub(crate) fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        for (k, yk) in y.iter_mut().enumerate().take(n) {
            *yk = self.row(k).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `y = A^* x`
    pub(crate) fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (k, xk) in x.iter().enumerate() {
            for (v, a) in y.iter_mut().zip(self.row(k)) {
                *v += a.conj() * xk;
            }
        }
    }

    fn zip_with(&self, other: &DecayMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> DecayMatrix {
        assert_eq!(self.geometry, other.geometry, "geometry mismatch");
        DecayMatrix {
            geometry: self.geometry,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Add for &DecayMatrix {
    type Output = DecayMatrix;
    fn add(self, rhs: &DecayMatrix) -> DecayMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &DecayMatrix {
    type Output = DecayMatrix;
    fn sub(self, rhs: &DecayMatrix) -> DecayMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &DecayMatrix {
    type Output = DecayMatrix;
    fn neg(self) -> DecayMatrix {
        self.map(|z| -z)
    }
}

/// Matrix product; panics on geometry mismatch (use [`DecayMatrix::multiply`] to get an error).
impl Mul for &DecayMatrix {
    type Output = DecayMatrix;
    fn mul(self, rhs: &DecayMatrix) -> DecayMatrix {
        self.multiply(rhs).expect("geometry mismatch")
    }
}

impl Mul<f64> for &DecayMatrix {
    type Output = DecayMatrix;
    fn mul(self, rhs: f64) -> DecayMatrix {
        self.map(|z| z * rhs)
    }
}

impl Mul<Complex64> for &DecayMatrix {
    type Output = DecayMatrix;
    fn mul(self, rhs: Complex64) -> DecayMatrix {
        self.scale(rhs)
    }
}
