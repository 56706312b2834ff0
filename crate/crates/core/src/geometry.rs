//! Tangent-bundle geometry in a non-holonomic frame.
//!
//! Index conventions, fixed throughout the crate:
//!
//! * `Υ^s_i` is the `s`-th coordinate component of frame vector `Υ_i`,
//!   so `Υ_i = Σ_s Υ^s_i ∂/∂x^s`.
//! * `c^k_ij` are the structure constants, `[Υ_i, Υ_j] = Σ_k c^k_ij Υ_k`.
//! * `Γ^k_ij`: the first lower index `i` is the differentiation direction,
//!   `∇_{Υ_i} Υ_j = Σ_k Γ^k_ij Υ_k`.
//! * `T^k_ij = Γ^k_ij - Γ^k_ji - c^k_ij`.
//! * `R^p_kij` is the `p`-component of `R(Υ_i, Υ_j) Υ_k`.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::array::ExprArray;
use crate::error::{Error, Result};
use crate::expr::{Evaluator, ScalarExpr, DIM};
use crate::linalg::{self, ExprMatrix};
use crate::residual::{self, label, Probe, Residual, Slot};
use crate::sampling::SampleSet;

const DEGENERATE_DET: f64 = 1e-9;
const REAL_EPS: f64 = 1e-12;
const INVERSE_EPS: f64 = 1e-10;

type Square = [[ScalarExpr; DIM]; DIM];

fn to_matrix(m: &Square) -> ExprMatrix {
    m.iter().map(|row| row.to_vec()).collect()
}

fn from_matrix(m: ExprMatrix) -> Square {
    let mut rows = m.into_iter().map(|row| {
        let mut it = row.into_iter();
        std::array::from_fn(|_| it.next().expect("4 columns"))
    });
    std::array::from_fn(|_| rows.next().expect("4 rows"))
}

/// Tangent frame `Υ_0..Υ_3` together with the sample set it was validated on.
#[derive(Debug, Clone)]
pub struct FrameField {
    /// `vectors[i][s] = Υ^s_i`
    vectors: Square,
    /// Dual coframe: `Σ_s coframe[k][s] Υ^s_i = δ^k_i`.
    coframe: Square,
    samples: SampleSet,
}

impl FrameField {
    /// `vectors[i]` lists the coordinate components of `Υ_i`.
    ///
    /// Fails if any component is complex, if `|det Υ| <= 1e-9` at a sample
    /// point, or if the determinant changes sign across the sample set (the
    /// frame then degenerates somewhere inside the sampled domain).
    pub fn new(vectors: Square, samples: SampleSet) -> Result<Self> {
        let mut sign = None;
        let mut first = None;
        for p in &samples {
            let mut ev = Evaluator::new(*p);
            let mut m = Matrix4::<f64>::zeros();
            for (i, vector) in vectors.iter().enumerate() {
                for (s, comp) in vector.iter().enumerate() {
                    let v = ev.eval(comp)?;
                    if v.im.abs() > REAL_EPS {
                        return Err(Error::ComplexFrame { point: *p });
                    }
                    m[(s, i)] = v.re;
                }
            }
            let det = m.determinant();
            if !(det.abs() > DEGENERATE_DET) {
                return Err(Error::DegenerateFrame {
                    point: *p,
                    det: det.abs(),
                });
            }
            match sign {
                None => {
                    sign = Some(det.signum());
                    first = Some(*p);
                }
                Some(s) if s != det.signum() => {
                    return Err(Error::FrameSignChange {
                        a: first.expect("set with sign"),
                        b: *p,
                    })
                }
                _ => {}
            }
        }
        // columns of the coordinate matrix are the frame vectors
        let by_coord: ExprMatrix = (0..DIM)
            .map(|s| (0..DIM).map(|i| vectors[i][s].clone()).collect())
            .collect();
        let (inv, _) = linalg::inverse(&by_coord);
        Ok(Self {
            vectors,
            coframe: from_matrix(inv),
            samples,
        })
    }

    /// The holonomic frame `Υ_i = ∂/∂x^i`.
    pub fn coordinate(samples: SampleSet) -> Self {
        let id = from_matrix(linalg::identity(DIM));
        Self {
            vectors: id.clone(),
            coframe: id,
            samples,
        }
    }

    /// `Υ^coord_vector`
    pub fn component(&self, vector: usize, coord: usize) -> &ScalarExpr {
        &self.vectors[vector][coord]
    }

    pub fn vectors(&self) -> &Square {
        &self.vectors
    }

    /// Component `k` of the dual basis along `dx^s`.
    pub fn coframe(&self, k: usize, s: usize) -> &ScalarExpr {
        &self.coframe[k][s]
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    /// Same frame, validated against a different sample set.
    pub fn with_samples(&self, samples: SampleSet) -> Result<Self> {
        Self::new(self.vectors.clone(), samples)
    }

    /// `L_{Υ_k}(f) = Σ_s Υ^s_k ∂f/∂x^s`
    pub fn lie(&self, f: &ScalarExpr, k: usize) -> ScalarExpr {
        (0..DIM).map(|s| &self.vectors[k][s] * f.diff(s)).sum()
    }
}

/// Directional derivative of `f` along frame vector `Υ_k`.
pub fn lie_derivative(f: &ScalarExpr, frame: &FrameField, k: usize) -> ScalarExpr {
    frame.lie(f, k)
}

/// `c^k_ij`, stored at `[k, i, j]`.
#[derive(Debug, Clone)]
pub struct StructureConstants(ExprArray<3>);

impl StructureConstants {
    pub fn get(&self, k: usize, i: usize, j: usize) -> &ScalarExpr {
        self.0.get([k, i, j])
    }

    pub fn array(&self) -> &ExprArray<3> {
        &self.0
    }

    pub fn is_identically_zero(&self) -> bool {
        self.0.indexed().all(|(_, e)| e.is_zero())
    }

    /// Antisymmetry in the lower pair and realness at the sample points.
    pub fn check(&self, samples: &SampleSet) -> Result<Vec<Residual>> {
        let mut antisym = Vec::new();
        let mut imag = Vec::new();
        for ([k, i, j], e) in self.0.indexed() {
            imag.push(Slot::new(label("c", &[k, i, j]), Probe::Imag(e.clone())));
            if i <= j {
                antisym.push((label("c", &[k, i, j]), e + self.get(k, j, i)));
            }
        }
        Ok(vec![
            residual::scan_values(
                "structure_constants.antisymmetric",
                "eq2.4",
                samples,
                antisym,
            )?,
            residual::scan("structure_constants.real", "eq2.4", samples, imag)?,
        ])
    }
}

/// Expands the commutators of the frame vectors back in the frame:
/// `c^k_ij = Σ_s θ^k_s (L_{Υ_i} Υ^s_j - L_{Υ_j} Υ^s_i)` with `θ` the coframe.
pub fn structure_constants(frame: &FrameField) -> StructureConstants {
    let mut c = ExprArray::zeros([DIM, DIM, DIM]);
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            let bracket: Vec<ScalarExpr> = (0..DIM)
                .map(|s| frame.lie(frame.component(j, s), i) - frame.lie(frame.component(i, s), j))
                .collect();
            for k in 0..DIM {
                let ckij: ScalarExpr = (0..DIM).map(|s| frame.coframe(k, s) * &bracket[s]).sum();
                c.set([k, j, i], -&ckij);
                c.set([k, i, j], ckij);
            }
        }
    }
    StructureConstants(c)
}

/// Expected metric signature as counts of positive and negative eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
}

impl Signature {
    /// `(+,-,-,-)`
    pub const LORENTZ: Signature = Signature {
        positive: 1,
        negative: 3,
    };
}

impl Default for Signature {
    fn default() -> Self {
        Self::LORENTZ
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let signs: Vec<&str> = std::iter::repeat_n("+", self.positive)
            .chain(std::iter::repeat_n("-", self.negative))
            .collect();
        f.write_str(&signs.join(","))
    }
}

impl std::str::FromStr for Signature {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut sig = Signature {
            positive: 0,
            negative: 0,
        };
        for c in s.chars().filter(|c| !c.is_whitespace() && *c != ',') {
            match c {
                '+' => sig.positive += 1,
                '-' => sig.negative += 1,
                other => return Err(format!("unexpected `{other}` in signature")),
            }
        }
        if sig.positive + sig.negative != DIM {
            return Err(format!("signature must have {DIM} signs, got `{s}`"));
        }
        Ok(sig)
    }
}

/// Frame-relative metric components `g_ij` and their inverse `g^ij`.
#[derive(Debug, Clone)]
pub struct MetricField {
    g: Square,
    inv: Square,
    signature: Signature,
}

impl MetricField {
    pub fn new(g: Square, samples: &SampleSet) -> Result<Self> {
        Self::with_signature(g, samples, Signature::LORENTZ)
    }

    /// Validates symmetry, realness, invertibility and the eigenvalue
    /// signature at every sample point.
    pub fn with_signature(g: Square, samples: &SampleSet, signature: Signature) -> Result<Self> {
        let (inv, _) = linalg::inverse(&to_matrix(&g));
        let inv = from_matrix(inv);
        for p in samples {
            let mut ev = Evaluator::new(*p);
            let mut gm = Matrix4::<f64>::zeros();
            for i in 0..DIM {
                for j in 0..DIM {
                    let a = ev.eval(&g[i][j])?;
                    let b = ev.eval(&g[j][i])?;
                    if a.im.abs() > REAL_EPS || (a - b).norm() > REAL_EPS * (1.0 + a.norm()) {
                        return Err(Error::AsymmetricMetric { point: *p });
                    }
                    gm[(i, j)] = a.re;
                }
            }
            let mut im = Matrix4::<f64>::zeros();
            for i in 0..DIM {
                for j in 0..DIM {
                    im[(i, j)] = ev
                        .eval(&inv[i][j])
                        .map_err(|_| Error::SingularMetric { point: *p })?
                        .re;
                }
            }
            let err = (gm * im - Matrix4::identity()).abs().max();
            if !(err <= INVERSE_EPS) {
                return Err(Error::SingularMetric { point: *p });
            }
            let eig = SymmetricEigen::new(gm).eigenvalues;
            let found = Signature {
                positive: eig.iter().filter(|&&v| v > 0.0).count(),
                negative: eig.iter().filter(|&&v| v < 0.0).count(),
            };
            if found != signature {
                return Err(Error::Signature {
                    point: *p,
                    expected: signature.to_string(),
                    found: found.to_string(),
                });
            }
        }
        Ok(Self { g, inv, signature })
    }

    /// Builds the symmetric matrix from its upper triangle `upper(i, j)`, `i <= j`.
    pub fn from_upper(
        upper: impl Fn(usize, usize) -> ScalarExpr,
        samples: &SampleSet,
        signature: Signature,
    ) -> Result<Self> {
        let g = std::array::from_fn(|i| std::array::from_fn(|j| upper(i.min(j), i.max(j))));
        Self::with_signature(g, samples, signature)
    }

    /// `g_ij`
    pub fn lower(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.g[i][j]
    }

    /// `g^ij`
    pub fn upper(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.inv[i][j]
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    /// `Σ_j g_ij g^jk - δ_i^k` for every slot; should vanish.
    pub fn check_inverse(&self, samples: &SampleSet) -> Result<Residual> {
        let mut values = Vec::new();
        for i in 0..DIM {
            for k in 0..DIM {
                let prod: ScalarExpr = (0..DIM).map(|j| &self.g[i][j] * &self.inv[j][k]).sum();
                let delta = if i == k { 1.0 } else { 0.0 };
                values.push((label("g.ginv", &[i, k]), prod - ScalarExpr::real(delta)));
            }
        }
        Ok(
            residual::scan_values("metric.inverse", "def2.2", samples, values)?
                .with_tolerance(residual::TOL_CONSTANT),
        )
    }
}

/// `Γ^k_ij`, stored at `[k, i, j]`.
#[derive(Debug, Clone)]
pub struct GammaField(ExprArray<3>);

impl GammaField {
    pub fn new(components: ExprArray<3>) -> Result<Self> {
        if components.dims() != [DIM, DIM, DIM] {
            return Err(Error::Shape(format!(
                "connection components must be 4x4x4, got {:?}",
                components.dims()
            )));
        }
        Ok(Self(components))
    }

    pub fn zero() -> Self {
        Self(ExprArray::zeros([DIM, DIM, DIM]))
    }

    pub fn from_fn(f: impl FnMut([usize; 3]) -> ScalarExpr) -> Self {
        Self(ExprArray::from_fn([DIM, DIM, DIM], f))
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &ScalarExpr {
        self.0.get([k, i, j])
    }

    pub fn array(&self) -> &ExprArray<3> {
        &self.0
    }

    /// `|Im Γ^k_ij|` over the sample set.
    pub fn check_real(&self, samples: &SampleSet) -> Result<Residual> {
        let slots = self
            .0
            .indexed()
            .map(|(idx, e)| Slot::new(label("Gamma", &idx), Probe::Imag(e.clone())))
            .collect();
        Ok(residual::scan("gamma.real", "eq2.7", samples, slots)?)
    }
}

/// Components of the unique real, torsion-free, metric-compatible connection.
///
/// With the index conventions of this module the Koszul formula reads
///
/// ```text
/// Γ^k_ij = ½ Σ_r g^kr (L_i g_jr + L_j g_ri - L_r g_ij)
///        + ½ c^k_ij - ½ Σ_rs g^kr c^s_ir g_sj - ½ Σ_rs g^kr c^s_jr g_si
/// ```
///
/// The signs of the three `c` terms are forced: they make the antisymmetric
/// part `Γ^k_ij - Γ^k_ji` equal `c^k_ij` and keep `∇g = 0`.
pub fn christoffel(metric: &MetricField, frame: &FrameField, c: &StructureConstants) -> GammaField {
    // lie[i][j][r] = L_i(g_jr)
    let lie: Vec<Vec<Vec<ScalarExpr>>> = (0..DIM)
        .map(|i| {
            (0..DIM)
                .map(|j| (0..DIM).map(|r| frame.lie(metric.lower(j, r), i)).collect())
                .collect()
        })
        .collect();
    // lowered[a][b][c] = Σ_s g_as c^s_bc
    let lowered: Vec<Vec<Vec<ScalarExpr>>> = (0..DIM)
        .map(|a| {
            (0..DIM)
                .map(|b| {
                    (0..DIM)
                        .map(|cc| (0..DIM).map(|s| metric.lower(a, s) * c.get(s, b, cc)).sum())
                        .collect()
                })
                .collect()
        })
        .collect();
    let half = ScalarExpr::real(0.5);
    GammaField::from_fn(|[k, i, j]| {
        let sum: ScalarExpr = (0..DIM)
            .map(|r| {
                let bracket = &lie[i][j][r] + &lie[j][r][i] - &lie[r][i][j] + &lowered[r][i][j]
                    - &lowered[j][i][r]
                    - &lowered[i][j][r];
                metric.upper(k, r) * bracket
            })
            .sum();
        &half * sum
    })
}

/// `T^k_ij = Γ^k_ij - Γ^k_ji - c^k_ij`, stored at `[k, i, j]`.
pub fn torsion(gamma: &GammaField, c: &StructureConstants) -> ExprArray<3> {
    ExprArray::from_fn([DIM, DIM, DIM], |[k, i, j]| {
        gamma.get(k, i, j) - gamma.get(k, j, i) - c.get(k, i, j)
    })
}

/// `R^p_kij`, stored at `[p, k, i, j]`:
///
/// ```text
/// R^p_kij = L_i Γ^p_jk - L_j Γ^p_ik + Σ_h (Γ^p_ih Γ^h_jk - Γ^p_jh Γ^h_ik) - Σ_h c^h_ij Γ^p_hk
/// ```
pub fn tangent_curvature(
    gamma: &GammaField,
    frame: &FrameField,
    c: &StructureConstants,
) -> ExprArray<4> {
    ExprArray::from_fn([DIM, DIM, DIM, DIM], |[p, k, i, j]| {
        if i == j {
            return ScalarExpr::zero();
        }
        let quad: ScalarExpr = (0..DIM)
            .map(|h| {
                gamma.get(p, i, h) * gamma.get(h, j, k) - gamma.get(p, j, h) * gamma.get(h, i, k)
            })
            .sum();
        let anholonomic: ScalarExpr = (0..DIM).map(|h| c.get(h, i, j) * gamma.get(p, h, k)).sum();
        frame.lie(gamma.get(p, j, k), i) - frame.lie(gamma.get(p, i, k), j) + quad - anholonomic
    })
}

/// `T^k_ij` should vanish for the metric connection.
pub fn check_torsion_free(
    gamma: &GammaField,
    c: &StructureConstants,
    samples: &SampleSet,
) -> Result<Residual> {
    let t = torsion(gamma, c);
    let values = t.indexed().map(|(idx, e)| (label("T", &idx), e.clone()));
    Ok(residual::scan_values("torsion", "eq2.8", samples, values)?)
}

/// Antisymmetry of `R^p_kij` in `i, j` and reality of its components.
pub fn check_tangent_curvature(r: &ExprArray<4>, samples: &SampleSet) -> Result<Vec<Residual>> {
    let mut antisym = Vec::new();
    let mut imag = Vec::new();
    for ([p, k, i, j], e) in r.indexed() {
        imag.push(Slot::new(label("R", &[p, k, i, j]), Probe::Imag(e.clone())));
        if i < j {
            antisym.push((label("R", &[p, k, i, j]), e + r.get([p, k, j, i])));
        }
    }
    Ok(vec![
        residual::scan_values(
            "tangent_curvature.antisymmetric",
            "eq2.10",
            samples,
            antisym,
        )?,
        residual::scan("tangent_curvature.real", "eq2.13", samples, imag)?,
    ])
}
