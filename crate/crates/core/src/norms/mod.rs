//! Norms of the decay algebras.
//!
//! All differences are measured with the 1-norm `|m| = sum_j |m_j|`, reduced
//! per axis on the torus. Sups and sums run over the finite geometry only.

mod profile;
mod spectral;
mod weight;

use std::fmt;

use log::warn;

pub use profile::{diagonal_profile, PerDiagonal, SideDiagonalProfile};
pub use spectral::operator_norm;
pub use weight::{Weight, WeightTable};

use crate::error::{DecayError, Result};
use crate::matrix_core::{DecayMatrix, DiffLayout, IndexGeometry};
use weight::poly;

/// Which algebra norm to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum NormTag {
    /// Spectral norm on `l^2`.
    OperatorL2,
    /// `sup_{k,l} |A(k,l)| (1+|k-l|)^r`
    Jaffard(f64),
    /// Weighted row/column sum norm.
    Schur(f64),
    /// Weighted `l^1` norm of the per-diagonal suprema.
    ConvDom(f64),
    /// Base norm of `A(k,l) v(k-l)`.
    Weighted { base: Box<NormTag>, weight: Weight },
}

/// Maximum nesting of `Weighted` tags.
pub const MAX_WEIGHT_DEPTH: usize = 2;

impl NormTag {
    pub fn weighted(base: NormTag, weight: Weight) -> Result<Self> {
        let tag = NormTag::Weighted {
            base: Box::new(base),
            weight,
        };
        tag.validate()?;
        Ok(tag)
    }

    /// Number of nested `Weighted` layers.
    pub fn weight_depth(&self) -> usize {
        match self {
            NormTag::Weighted { base, .. } => 1 + base.weight_depth(),
            _ => 0,
        }
    }

    /// Solid norms depend only on the moduli of the entries, monotonically.
    pub fn is_solid(&self) -> bool {
        match self {
            NormTag::OperatorL2 => false,
            NormTag::Weighted { base, .. } => base.is_solid(),
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DecayError::InvalidParameter(msg));
        match self {
            NormTag::OperatorL2 => Ok(()),
            NormTag::Jaffard(r) if !(*r > 0.0 && r.is_finite()) => {
                bad(format!("Jaffard exponent must be > 0, got {r}"))
            }
            NormTag::Schur(r) | NormTag::ConvDom(r) if !(*r >= 0.0 && r.is_finite()) => {
                bad(format!("exponent must be >= 0, got {r}"))
            }
            NormTag::Weighted { base, weight } => {
                if self.weight_depth() > MAX_WEIGHT_DEPTH {
                    return bad(format!(
                        "weighted tags nest at most {MAX_WEIGHT_DEPTH} deep"
                    ));
                }
                if let Weight::Polynomial { r } | Weight::Anisotropic { r, .. } = weight {
                    if !(*r >= 0.0 && r.is_finite()) {
                        return bad(format!("weight exponent must be >= 0, got {r}"));
                    }
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    fn check_geometry(&self, g: &IndexGeometry) -> Result<()> {
        if let NormTag::Jaffard(r) = self {
            if *r <= g.dim() as f64 {
                warn!(
                    "Jaffard exponent {r} <= d = {}: the norm is defined but not submultiplicative",
                    g.dim()
                );
            }
        }
        match self {
            NormTag::Weighted { base, weight } => {
                weight.check_geometry(g)?;
                base.check_geometry(g)
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for NormTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormTag::OperatorL2 => write!(f, "opl2"),
            NormTag::Jaffard(r) => write!(f, "jaffard:{r}"),
            NormTag::Schur(r) => write!(f, "schur:{r}"),
            NormTag::ConvDom(r) => write!(f, "cd:{r}"),
            NormTag::Weighted { base, weight } => match weight {
                Weight::Polynomial { r } => write!(f, "weighted:{base}:poly:{r}"),
                Weight::Anisotropic { r, alpha } => {
                    write!(f, "weighted:{base}:aniso:{r}")?;
                    for a in alpha {
                        write!(f, ",{a}")?;
                    }
                    Ok(())
                }
                Weight::Table(_) => write!(f, "weighted:{base}:table"),
            },
        }
    }
}

enum Kernel {
    Operator,
    Sup,
    RowCol,
    DiagSum,
}

/// Flatten a tag into a base kernel and the product of all weights.
fn resolve<'a>(tag: &'a NormTag, weights: &mut Vec<WeightFactor<'a>>) -> Kernel {
    match tag {
        NormTag::OperatorL2 => Kernel::Operator,
        NormTag::Jaffard(r) => {
            weights.push(WeightFactor::Poly(*r));
            Kernel::Sup
        }
        NormTag::Schur(r) => {
            weights.push(WeightFactor::Poly(*r));
            Kernel::RowCol
        }
        NormTag::ConvDom(r) => {
            weights.push(WeightFactor::Poly(*r));
            Kernel::DiagSum
        }
        NormTag::Weighted { base, weight } => {
            weights.push(WeightFactor::General(weight));
            resolve(base, weights)
        }
    }
}

enum WeightFactor<'a> {
    Poly(f64),
    General(&'a Weight),
}

impl WeightFactor<'_> {
    fn eval(&self, m: &[i64]) -> f64 {
        match self {
            WeightFactor::Poly(r) => poly(m, *r),
            WeightFactor::General(w) => w.eval(m),
        }
    }
}

/// Evaluate the norm selected by `tag`.
pub fn norm(a: &DecayMatrix, tag: &NormTag) -> Result<f64> {
    tag.validate()?;
    tag.check_geometry(a.geometry())?;
    let mut factors = Vec::new();
    let kernel = resolve(tag, &mut factors);
    let lay = DiffLayout::reduced(a.geometry());
    let table = lay.tabulate(|m| factors.iter().map(|w| w.eval(m)).product::<f64>());
    Ok(match kernel {
        Kernel::Operator => {
            if factors.is_empty() {
                operator_norm(a)?
            } else {
                let weighted = a.map_reduced(|m| {
                    num_complex::Complex64::new(factors.iter().map(|w| w.eval(m)).product(), 0.0)
                });
                operator_norm(&weighted)?
            }
        }
        Kernel::Sup => sup_kernel(a, &lay, &table),
        Kernel::RowCol => rowcol_kernel(a, &lay, &table),
        Kernel::DiagSum => diagsum_kernel(a, &lay, &table),
    })
}

fn sup_kernel(a: &DecayMatrix, lay: &DiffLayout, table: &[f64]) -> f64 {
    let n = a.dim();
    let mut best = 0.0f64;
    for k in 0..n {
        for (l, z) in a.row(k).iter().enumerate() {
            best = best.max(z.norm() * table[lay.key(k, l)]);
        }
    }
    best
}

fn rowcol_kernel(a: &DecayMatrix, lay: &DiffLayout, table: &[f64]) -> f64 {
    let n = a.dim();
    let mut cols = vec![0.0f64; n];
    let mut best_row = 0.0f64;
    for k in 0..n {
        let mut row = 0.0;
        for (l, z) in a.row(k).iter().enumerate() {
            let v = z.norm() * table[lay.key(k, l)];
            row += v;
            cols[l] += v;
        }
        best_row = best_row.max(row);
    }
    cols.into_iter().fold(best_row, f64::max)
}

/// Per-diagonal suprema of `|A|`, indexed by layout key.
pub(crate) fn diagonal_sups(a: &DecayMatrix, lay: &DiffLayout) -> Vec<f64> {
    let n = a.dim();
    let mut sups = vec![0.0f64; lay.count()];
    for k in 0..n {
        for (l, z) in a.row(k).iter().enumerate() {
            let key = lay.key(k, l);
            sups[key] = sups[key].max(z.norm());
        }
    }
    sups
}

fn diagsum_kernel(a: &DecayMatrix, lay: &DiffLayout, table: &[f64]) -> f64 {
    diagonal_sups(a, lay)
        .iter()
        .zip(table)
        .map(|(s, w)| s * w)
        .sum()
}

pub fn jaffard_norm(a: &DecayMatrix, r: f64) -> f64 {
    assert!(r > 0.0, "Jaffard exponent must be positive");
    norm(a, &NormTag::Jaffard(r)).expect("solid norms do not fail")
}

pub fn schur_norm(a: &DecayMatrix, r: f64) -> f64 {
    assert!(r >= 0.0, "Schur exponent must be nonnegative");
    norm(a, &NormTag::Schur(r)).expect("solid norms do not fail")
}

pub fn convdom_norm(a: &DecayMatrix, r: f64) -> f64 {
    assert!(r >= 0.0, "convolution-dominated exponent must be nonnegative");
    norm(a, &NormTag::ConvDom(r)).expect("solid norms do not fail")
}

/// Norm of a `Weighted` tag; any other tag is rejected.
pub fn weighted_norm(a: &DecayMatrix, tag: &NormTag) -> Result<f64> {
    match tag {
        NormTag::Weighted { .. } => norm(a, tag),
        other => Err(DecayError::InvalidParameter(format!(
            "expected a weighted tag, got {other}"
        ))),
    }
}

/// `C_r = 2^r * sum_m (1+|m|)^{-r}` over the difference set of `g`, a bound
/// for `||AB||_{J_r} / (||A||_{J_r} ||B||_{J_r})`.
pub fn jaffard_product_constant(g: &IndexGeometry, r: f64) -> f64 {
    let sum: f64 = g
        .diff_indices()
        .iter()
        .map(|m| 1.0 / poly(m.as_slice(), r))
        .sum();
    2f64.powf(r) * sum
}
