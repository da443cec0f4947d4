//! Commutator derivations, the modulation group and Hölder-Zygmund norms.
//!
//! Derivations and modulations act on the positional difference `k - l` of
//! centered indices, i.e. `delta_j(A) = [X_j, A]` with `X_j = diag(2 pi i k_j)`
//! and `chi_t(A) = U_t A U_t^*` with `U_t = diag(e^{2 pi i k.t})`. On a window
//! this is the literal difference; on a torus it keeps the Leibniz rule and the
//! group law exact.

mod grid;
mod hz;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use grid::{Probe, TGrid, DEFAULT_DYADIC_LEVELS};
pub use hz::{
    continuity_defect, fourier_coefficient, hz_norm, hz_seminorm, modulus_of_smoothness,
    probe_values, HZParams,
};

use crate::error::{DecayError, Result};
use crate::matrix_core::DecayMatrix;
use crate::norms::{norm, NormTag};

/// Largest total order accepted for derivation powers.
pub const MAX_ORDER: u32 = 8;

/// Uniform bound of the modulation group on every supported norm.
pub const GROUP_BOUND: f64 = 1.0;

/// Multi-index `alpha` with `|alpha| <= MAX_ORDER`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex(Vec<u32>);

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = DecayError;

    fn try_from(alpha: Vec<u32>) -> Result<Self> {
        MultiIndex::new(alpha)
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(m: MultiIndex) -> Self {
        m.0
    }
}

impl MultiIndex {
    pub fn new(alpha: Vec<u32>) -> Result<Self> {
        let order: u32 = alpha.iter().sum();
        if order > MAX_ORDER {
            return Err(DecayError::OrderCap {
                order,
                cap: MAX_ORDER,
            });
        }
        Ok(Self(alpha))
    }

    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    /// `e_axis`
    pub fn unit(d: usize, axis: usize) -> Self {
        let mut a = vec![0; d];
        a[axis] = 1;
        Self(a)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|alpha| = sum_j alpha_j`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `alpha! = prod_j alpha_j!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(f64::from).product::<f64>())
            .product()
    }

    /// `C(alpha, beta) = prod_j C(alpha_j, beta_j)`, zero unless `beta <= alpha`.
    pub fn binomial(&self, beta: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&beta.0)
            .map(|(&a, &b)| {
                if b > a {
                    0.0
                } else {
                    (0..b).map(|i| f64::from(a - i) / f64::from(i + 1)).product()
                }
            })
            .product()
    }

    /// Every `beta <= alpha` componentwise.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::new()];
        for &a in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<u32>| {
                    (0..=a).map(move |b| {
                        let mut p = prefix.clone();
                        p.push(b);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// `alpha - beta`; panics unless `beta <= alpha`.
    pub fn minus(&self, beta: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&beta.0)
                .map(|(a, b)| a.checked_sub(*b).expect("beta <= alpha"))
                .collect(),
        )
    }

    /// All multi-indices in `d` variables of total order exactly `k`.
    pub fn of_order(d: usize, k: u32) -> Result<Vec<MultiIndex>> {
        if k > MAX_ORDER {
            return Err(DecayError::OrderCap {
                order: k,
                cap: MAX_ORDER,
            });
        }
        fn rec(d: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if d == 1 {
                prefix.push(k);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in (0..=k).rev() {
                prefix.push(a);
                rec(d - 1, k - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(d, k, &mut Vec::new(), &mut out);
        Ok(out)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn check_axis(a: &DecayMatrix, axis: usize) -> Result<()> {
    let dim = a.geometry().dim();
    if axis >= dim {
        return Err(DecayError::AxisOutOfRange { axis, dim });
    }
    Ok(())
}

fn check_point(a: &DecayMatrix, t: &[f64]) -> Result<()> {
    let d = a.geometry().dim();
    if t.len() != d {
        return Err(DecayError::InvalidParameter(format!(
            "probe has {} components, geometry has dimension {d}",
            t.len()
        )));
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(DecayError::InvalidParameter("probe must be finite".into()));
    }
    Ok(())
}

fn phase(m: &[i64], t: &[f64]) -> Complex64 {
    let dot: f64 = m.iter().zip(t).map(|(&a, b)| a as f64 * b).sum();
    Complex64::from_polar(1.0, 2.0 * PI * dot)
}

/// `delta_j(A)(k,l) = 2 pi i (k_j - l_j) A(k,l)`, axis counted from 0.
pub fn commutator_derivation(a: &DecayMatrix, axis: usize) -> Result<DecayMatrix> {
    check_axis(a, axis)?;
    Ok(a.map_positional(|m| Complex64::new(0.0, 2.0 * PI * m[axis] as f64)))
}

/// `delta^alpha(A)`, the entrywise multiplier `prod_j (2 pi i (k_j - l_j))^{alpha_j}`.
pub fn derivation_power(a: &DecayMatrix, alpha: &MultiIndex) -> Result<DecayMatrix> {
    if alpha.dim() != a.geometry().dim() {
        return Err(DecayError::InvalidParameter(format!(
            "multi-index {alpha} does not match dimension {}",
            a.geometry().dim()
        )));
    }
    if alpha.order() == 0 {
        return Ok(a.clone());
    }
    let twopi_i = Complex64::new(0.0, 2.0 * PI);
    Ok(a.map_positional(|m| {
        m.iter()
            .zip(alpha.as_slice())
            .map(|(&x, &e)| (twopi_i * x as f64).powu(e))
            .product()
    }))
}

/// `sum_{|alpha| <= order} ||delta^alpha(A)|| / alpha!` in the base norm.
pub fn derived_norm(a: &DecayMatrix, order: u32, base: &NormTag) -> Result<f64> {
    let d = a.geometry().dim();
    let mut total = 0.0;
    for k in 0..=order {
        for alpha in MultiIndex::of_order(d, k)? {
            total += norm(&derivation_power(a, &alpha)?, base)? / alpha.factorial();
        }
    }
    Ok(total)
}

/// `chi_t(A)(k,l) = e^{2 pi i (k-l).t} A(k,l)`
pub fn modulate(a: &DecayMatrix, t: &[f64]) -> Result<DecayMatrix> {
    check_point(a, t)?;
    Ok(a.map_positional(|m| phase(m, t)))
}

/// `Delta_t^order A`, entrywise factor `(e^{2 pi i m.t} - 1)^order`.
pub fn finite_difference(a: &DecayMatrix, t: &[f64], order: u32) -> Result<DecayMatrix> {
    check_point(a, t)?;
    if !(1..=2).contains(&order) {
        return Err(DecayError::InvalidParameter(format!(
            "finite difference order must be 1 or 2, got {order}"
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(a.map_positional(|m| (phase(m, t) - one).powu(order)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::{DiffIndex, IndexGeometry};
    use crate::norms::{convdom_norm, operator_norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random(g: IndexGeometry, seed: u64) -> DecayMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DecayMatrix::from_fn(g, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn rel(x: &DecayMatrix, y: &DecayMatrix) -> f64 {
        x.max_abs_diff(y) / x.max_abs().max(y.max_abs()).max(1.0)
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(MultiIndex::of_order(2, 2).unwrap().len(), 3);
        assert_eq!(MultiIndex::of_order(3, 2).unwrap().len(), 6);
        let a = MultiIndex::new(vec![2, 1]).unwrap();
        assert_eq!(a.below().len(), 6);
        assert_eq!(a.factorial(), 2.0);
        assert_eq!(a.binomial(&MultiIndex::new(vec![1, 1]).unwrap()), 2.0);
        assert!(MultiIndex::new(vec![5, 4]).is_err());
    }

    #[test]
    fn derivation_of_identity_vanishes() {
        let g = IndexGeometry::torus(5, 2).unwrap();
        let id = DecayMatrix::identity(g);
        for axis in 0..2 {
            assert_eq!(commutator_derivation(&id, axis).unwrap().max_abs(), 0.0);
        }
        assert!(commutator_derivation(&id, 2).is_err());
    }

    #[test]
    fn derivation_of_side_diagonal() {
        let g = IndexGeometry::window(3, 1).unwrap();
        let a = random(g, 1);
        let m = DiffIndex::from(2);
        let s = a.side_diagonal(&m).unwrap();
        let got = commutator_derivation(&s, 0).unwrap();
        let want = s.scale(c(0.0, 2.0 * PI * 2.0));
        assert!(rel(&got, &want) < 1e-14);
    }

    #[test]
    fn derivation_is_a_commutator() {
        let g = IndexGeometry::torus(7, 1).unwrap();
        let a = random(g, 2);
        let x = DecayMatrix::from_fn(g, |k, l| {
            if k == l {
                c(0.0, 2.0 * PI * k[0] as f64)
            } else {
                c(0.0, 0.0)
            }
        });
        let comm = &(&x * &a) - &(&a * &x);
        assert!(rel(&commutator_derivation(&a, 0).unwrap(), &comm) < 1e-13);
    }

    #[test]
    fn leibniz_rule_on_torus() {
        let g = IndexGeometry::torus(9, 1).unwrap();
        let (a, b) = (random(g, 3), random(g, 4));
        let lhs = commutator_derivation(&(&a * &b), 0).unwrap();
        let rhs = &(&a * &commutator_derivation(&b, 0).unwrap())
            + &(&commutator_derivation(&a, 0).unwrap() * &b);
        assert!(rel(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn general_leibniz_rule() {
        let g = IndexGeometry::torus(5, 2).unwrap();
        let (a, b) = (random(g, 5), random(g, 6));
        let alpha = MultiIndex::new(vec![2, 1]).unwrap();
        let lhs = derivation_power(&(&a * &b), &alpha).unwrap();
        let mut rhs = DecayMatrix::zeros(g);
        for beta in alpha.below() {
            let term = &derivation_power(&a, &beta).unwrap()
                * &derivation_power(&b, &alpha.minus(&beta)).unwrap();
            rhs = &rhs + &(&term * alpha.binomial(&beta));
        }
        assert!(rel(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn derivation_powers_commute() {
        let g = IndexGeometry::torus(5, 2).unwrap();
        let a = random(g, 7);
        let xy = commutator_derivation(&commutator_derivation(&a, 0).unwrap(), 1).unwrap();
        let yx = commutator_derivation(&commutator_derivation(&a, 1).unwrap(), 0).unwrap();
        let pow = derivation_power(&a, &MultiIndex::new(vec![1, 1]).unwrap()).unwrap();
        assert!(rel(&xy, &yx) < 1e-12);
        assert!(rel(&xy, &pow) < 1e-12);
        assert_eq!(derivation_power(&a, &MultiIndex::zero(2)).unwrap(), a);
    }

    #[test]
    fn derived_norm_brackets_weighted_convdom() {
        let g = IndexGeometry::window(5, 1).unwrap();
        for seed in 0..4 {
            let a = random(g, seed);
            let d = derived_norm(&a, 1, &NormTag::ConvDom(0.0)).unwrap();
            let v1 = convdom_norm(&a, 1.0);
            assert!(v1 <= d && d <= (1.0 + 2.0 * PI) * v1);
            assert_eq!(derived_norm(&a, 0, &NormTag::ConvDom(0.0)).unwrap(), convdom_norm(&a, 0.0));
        }
        let z = DecayMatrix::zeros(g);
        assert_eq!(derived_norm(&z, 2, &NormTag::Jaffard(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn modulation_group_law_and_invariance() {
        let g = IndexGeometry::torus(7, 2).unwrap();
        let a = random(g, 8);
        let (s, t) = ([0.13, -0.4], [0.31, 0.07]);
        let lhs = modulate(&modulate(&a, &s).unwrap(), &t).unwrap();
        let rhs = modulate(&a, &[s[0] + t[0], s[1] + t[1]]).unwrap();
        assert!(rel(&lhs, &rhs) < 1e-12);
        assert_eq!(modulate(&a, &[0.0, 0.0]).unwrap(), a);

        let m = modulate(&a, &t).unwrap();
        for tag in [NormTag::Jaffard(2.0), NormTag::Schur(1.0), NormTag::ConvDom(0.5)] {
            let (x, y) = (norm(&a, &tag).unwrap(), norm(&m, &tag).unwrap());
            assert!((x - y).abs() <= 1e-12 * x);
        }
        let (x, y) = (operator_norm(&a).unwrap(), operator_norm(&m).unwrap());
        assert!((x - y).abs() <= 1e-10 * x * GROUP_BOUND);
    }

    #[test]
    fn modulation_fixes_diagonal_matrices() {
        let g = IndexGeometry::torus(5, 1).unwrap();
        let a = DecayMatrix::from_fn(g, |k, l| if k == l { c(k[0] as f64, 1.0) } else { c(0.0, 0.0) });
        assert_eq!(modulate(&a, &[0.37]).unwrap(), a);
    }

    #[test]
    fn finite_differences() {
        let g = IndexGeometry::torus(7, 1).unwrap();
        let a = random(g, 9);
        let t = [0.21];
        assert_eq!(finite_difference(&a, &[0.0], 1).unwrap().max_abs(), 0.0);
        let d1 = &modulate(&a, &t).unwrap() - &a;
        assert!(rel(&finite_difference(&a, &t, 1).unwrap(), &d1) < 1e-14);
        let d2 = &(&modulate(&a, &[0.42]).unwrap() - &(&modulate(&a, &t).unwrap() * 2.0)) + &a;
        assert!(rel(&finite_difference(&a, &t, 2).unwrap(), &d2) < 1e-14);
        assert!(finite_difference(&a, &t, 3).is_err());
    }

    #[test]
    fn second_difference_factor_modulus() {
        let g = IndexGeometry::window(4, 1).unwrap();
        let m = 3i64;
        let a = DecayMatrix::toeplitz(g, |x| if x[0] == m { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let t = 0.137;
        let d = finite_difference(&a, &[t], 2).unwrap();
        let want = 4.0 * (PI * m as f64 * t).sin().powi(2);
        assert!((d.max_abs() - want).abs() < 1e-14);
    }

    #[test]
    fn second_difference_product_rule() {
        let g = IndexGeometry::torus(9, 1).unwrap();
        let (a, b) = (random(g, 10), random(g, 11));
        let t = [0.173];
        let lhs = finite_difference(&(&a * &b), &t, 2).unwrap();
        let psi2 = modulate(&a, &[2.0 * t[0]]).unwrap();
        let da = finite_difference(&a, &t, 1).unwrap();
        let db = finite_difference(&b, &t, 1).unwrap();
        let d2a = finite_difference(&a, &t, 2).unwrap();
        let d2b = finite_difference(&b, &t, 2).unwrap();
        let rhs = &(&(&psi2 * &d2b) + &(&(&modulate(&da, &t).unwrap() * &db) * 2.0)) + &(&d2a * &b);
        assert!(rel(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn quotient_rule_on_torus() {
        let g = IndexGeometry::torus(9, 1).unwrap();
        let b = random(g, 12);
        let a = &DecayMatrix::identity(g) + &(&b * (0.4 / operator_norm(&b).unwrap()));
        let inv = a.invert().unwrap();
        let lhs = commutator_derivation(&inv, 0).unwrap();
        let rhs = -&(&(&inv * &commutator_derivation(&a, 0).unwrap()) * &inv);
        assert!(rel(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn bernstein_and_mean_value_inequalities() {
        let g = IndexGeometry::window(6, 2).unwrap();
        let sigma = 2usize;
        let a = random(g, 13).band_truncate(sigma, crate::Metric::InfNorm);
        let c0 = convdom_norm(&a, 0.0);
        for alpha in [vec![1, 0], vec![1, 1], vec![0, 3]] {
            let alpha = MultiIndex::new(alpha).unwrap();
            let lhs = convdom_norm(&derivation_power(&a, &alpha).unwrap(), 0.0);
            assert!(lhs <= (2.0 * PI * sigma as f64).powi(alpha.order() as i32) * c0 * (1.0 + 1e-12));
        }
        for t in [[0.01, -0.02], [0.1, 0.05], [0.3, 0.0]] {
            let lhs = convdom_norm(&finite_difference(&a, &t, 1).unwrap(), 0.0);
            let t1 = t[0].abs() + t[1].abs();
            assert!(lhs <= 2.0 * PI * sigma as f64 * t1 * c0 * (1.0 + 1e-12));
        }
    }
}
