use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};
use crate::matrix_core::{DecayMatrix, DiffIndex, DiffLayout, IndexGeometry};
use crate::norms::operator_norm;

/// Symbols with modulus at or below this are treated as vanishing.
pub const SYMBOL_FLOOR: f64 = 1e-8;

/// One coefficient `a(m)` of a Laurent symbol, stored as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentTerm {
    pub m: DiffIndex,
    pub value: [f64; 2],
}

impl LaurentTerm {
    pub fn new(m: impl Into<Vec<i64>>, value: Complex64) -> Self {
        Self {
            m: DiffIndex::new(m),
            value: [value.re, value.im],
        }
    }

    pub fn coefficient(&self) -> Complex64 {
        Complex64::new(self.value[0], self.value[1])
    }
}

/// Matrix families with prescribed off-diagonal behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `A(k,l) = a(k - l)`
    Laurent { terms: Vec<LaurentTerm> },
    /// `I + eps B / ||B||` with `B(k,l) = u (1+|k-l|)^{-r}`, `u` uniform on the unit disc.
    JaffardRandom { r: f64, seed: u64, epsilon: f64 },
    /// As `JaffardRandom`, damped additionally by `prod_j (1+|k_j-l_j|)^{-alpha_j}`.
    Anisotropic {
        r: f64,
        alpha: Vec<u32>,
        seed: u64,
        epsilon: f64,
    },
    /// `Gamma(k,-k) = (1+|2k|)^{-r}`, zero elsewhere.
    Gamma { r: f64 },
    /// `I + eps B / ||B||`, where each dyadic shell of `B` carries total
    /// per-diagonal mass `2^{-rk}` spread evenly, with random phases.
    HzCdSharp { r: f64, seed: u64, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub geometry: IndexGeometry,
    #[serde(flatten)]
    pub kind: GeneratorKind,
}

impl GeneratorSpec {
    pub fn new(geometry: IndexGeometry, kind: GeneratorKind) -> Self {
        Self { geometry, kind }
    }

    /// `epsilon` of the perturbative families.
    pub fn epsilon(&self) -> Option<f64> {
        match self.kind {
            GeneratorKind::JaffardRandom { epsilon, .. }
            | GeneratorKind::Anisotropic { epsilon, .. }
            | GeneratorKind::HzCdSharp { epsilon, .. } => Some(epsilon),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DecayError::InvalidParameter(msg));
        let positive = |r: f64| r > 0.0 && r.is_finite();
        if let Some(eps) = self.epsilon() {
            if !(0.0..1.0).contains(&eps) {
                return bad(format!("epsilon must lie in [0, 1), got {eps}"));
            }
        }
        match &self.kind {
            GeneratorKind::Laurent { terms } => {
                let mut seen = std::collections::BTreeSet::new();
                for t in terms {
                    self.geometry.check_diff(&t.m)?;
                    if !t.coefficient().is_finite() {
                        return bad(format!("coefficient at {} is not finite", t.m));
                    }
                    if !seen.insert(t.m.clone()) {
                        return bad(format!("coefficient at {} given twice", t.m));
                    }
                }
                Ok(())
            }
            GeneratorKind::JaffardRandom { r, .. }
            | GeneratorKind::Gamma { r }
            | GeneratorKind::HzCdSharp { r, .. }
                if !positive(*r) =>
            {
                bad(format!("decay exponent must be > 0, got {r}"))
            }
            GeneratorKind::Anisotropic { r, alpha, .. } => {
                if !positive(*r) {
                    return bad(format!("decay exponent must be > 0, got {r}"));
                }
                if alpha.len() != self.geometry.dim() {
                    return bad(format!(
                        "{} axis exponents for dimension {}",
                        alpha.len(),
                        self.geometry.dim()
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn unit_disc(rng: &mut ChaCha8Rng) -> Complex64 {
    let rho: f64 = rng.gen::<f64>().sqrt();
    let theta = 2.0 * PI * rng.gen::<f64>();
    Complex64::from_polar(rho, theta)
}

fn poly_decay(m: &[i64], r: f64) -> f64 {
    let a: i64 = m.iter().map(|x| x.abs()).sum();
    (1.0 + a as f64).powf(-r)
}

/// Random entries `u(k,l) * w(k-l)` drawn row-major from `seed`.
fn random_weighted(g: IndexGeometry, seed: u64, w: impl Fn(&[i64]) -> f64) -> DecayMatrix {
    let lay = DiffLayout::reduced(&g);
    let table = lay.tabulate(|m| w(m));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.len();
    let data = (0..n * n)
        .map(|i| unit_disc(&mut rng) * table[lay.key(i / n, i % n)])
        .collect();
    DecayMatrix::from_entries(g, data).expect("finite entries")
}

/// `I + eps B / ||B||`, returning the matrix and `1 / ||B||`.
fn perturb_identity(b: DecayMatrix, epsilon: f64) -> Result<(DecayMatrix, f64)> {
    let g = *b.geometry();
    let nb = operator_norm(&b)?;
    if nb == 0.0 {
        return Err(DecayError::Degenerate("perturbation is zero".into()));
    }
    let scaled = b.scale(Complex64::new(epsilon / nb, 0.0));
    Ok((&DecayMatrix::identity(g) + &scaled, 1.0 / nb))
}

/// Number of differences in each shell `2^k <= |m|_1 < 2^{k+1}`.
pub fn shell_cardinalities(g: &IndexGeometry) -> BTreeMap<u32, usize> {
    let mut out = BTreeMap::new();
    for m in g.diff_indices() {
        let a = m.norm1();
        if a > 0 {
            *out.entry(a.ilog2()).or_insert(0) += 1;
        }
    }
    out
}

/// The sharp family and its construction constant `1 / ||B||`, so that
/// `lp_block_norm(A - I, r, cd:0) = eps * constant`.
pub fn generate_hzcd(
    geometry: IndexGeometry,
    r: f64,
    seed: u64,
    epsilon: f64,
) -> Result<(DecayMatrix, f64)> {
    let card = shell_cardinalities(&geometry);
    let lay = DiffLayout::reduced(&geometry);
    let table = lay.tabulate(|m| {
        let a: i64 = m.iter().map(|x| x.abs()).sum();
        if a == 0 {
            0.0
        } else {
            let k = a.ilog2();
            2f64.powf(-r * f64::from(k)) / card[&k] as f64
        }
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = geometry.len();
    let data = (0..n * n)
        .map(|i| {
            let phase = 2.0 * PI * rng.gen::<f64>();
            Complex64::from_polar(table[lay.key(i / n, i % n)], phase)
        })
        .collect();
    let b = DecayMatrix::from_entries(geometry, data)?;
    perturb_identity(b, epsilon)
}

/// Build the matrix described by `spec`. The same spec always yields the same bits.
pub fn generate(spec: &GeneratorSpec) -> Result<DecayMatrix> {
    spec.validate()?;
    let g = spec.geometry;
    if spec.epsilon() == Some(0.0) {
        return Ok(DecayMatrix::identity(g));
    }
    match &spec.kind {
        GeneratorKind::Laurent { terms } => {
            let lay = DiffLayout::reduced(&g);
            let mut coeffs = vec![Complex64::new(0.0, 0.0); lay.count()];
            for t in terms {
                coeffs[lay.key_of(t.m.as_slice()).unwrap()] = t.coefficient();
            }
            Ok(DecayMatrix::toeplitz(g, |m| coeffs[lay.key_of(m).unwrap()]))
        }
        GeneratorKind::JaffardRandom { r, seed, epsilon } => {
            let b = random_weighted(g, *seed, |m| poly_decay(m, *r));
            Ok(perturb_identity(b, *epsilon)?.0)
        }
        GeneratorKind::Anisotropic {
            r,
            alpha,
            seed,
            epsilon,
        } => {
            let b = random_weighted(g, *seed, |m| {
                let mut w = poly_decay(m, *r);
                for (x, &a) in m.iter().zip(alpha) {
                    w *= (1.0 + x.abs() as f64).powi(-(a as i32));
                }
                w
            });
            Ok(perturb_identity(b, *epsilon)?.0)
        }
        GeneratorKind::Gamma { r } => Ok(DecayMatrix::from_fn(g, |k, l| {
            if k.iter().zip(l).all(|(a, b)| *a == -b) {
                let twice: Vec<i64> = k.iter().map(|x| 2 * x).collect();
                Complex64::new(poly_decay(&twice, *r), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })),
        GeneratorKind::HzCdSharp { r, seed, epsilon } => {
            Ok(generate_hzcd(g, *r, *seed, *epsilon)?.0)
        }
    }
}

/// Inverse of the circulant with symbol `sum_m a(m) e^{2 pi i m.x}`, computed by
/// sampling the symbol on the torus grid and transforming `1/f` back.
pub fn laurent_inverse_oracle(terms: &[LaurentTerm], geometry: IndexGeometry) -> Result<DecayMatrix> {
    if !geometry.is_torus() {
        return Err(DecayError::InvalidGeometry(
            "the circulant oracle needs a torus geometry".into(),
        ));
    }
    GeneratorSpec::new(
        geometry,
        GeneratorKind::Laurent {
            terms: terms.to_vec(),
        },
    )
    .validate()?;
    let d = geometry.dim();
    let period = geometry.size() as i64;
    let points: Vec<Vec<i64>> = (0..geometry.len())
        .map(|i| {
            let mut p = geometry.position(i);
            p.iter_mut().for_each(|x| *x = x.rem_euclid(period));
            p
        })
        .collect();
    let angle = |m: &[i64], j: &[i64]| {
        let dot: i64 = m.iter().zip(j).map(|(a, b)| a * b).sum();
        2.0 * PI * (dot.rem_euclid(period)) as f64 / period as f64
    };
    let symbol: Vec<Complex64> = points
        .iter()
        .map(|j| {
            terms
                .iter()
                .map(|t| t.coefficient() * Complex64::from_polar(1.0, angle(t.m.as_slice(), j)))
                .sum()
        })
        .collect();
    let (lo, hi) = symbol
        .iter()
        .map(|z| z.norm())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo <= SYMBOL_FLOOR {
        return Err(DecayError::Singular {
            condition: if lo == 0.0 { f64::INFINITY } else { hi / lo },
        });
    }
    let recip: Vec<Complex64> = symbol.iter().map(|f| f.inv()).collect();
    let scale = (period as f64).powi(d as i32);
    let lay = DiffLayout::reduced(&geometry);
    let coeffs = lay.tabulate(|m| {
        points
            .iter()
            .zip(&recip)
            .map(|(j, g)| g * Complex64::from_polar(1.0, -angle(m, j)))
            .sum::<Complex64>()
            / scale
    });
    Ok(DecayMatrix::toeplitz(geometry, |m| coeffs[lay.key_of(m).unwrap()]))
}
