//! The U(1), SU(2) and SU(3) bundles: Hermitian and skew metric tensors,
//! orthonormality, concordance of a connection with those tensors, su(q)
//! membership, gauge (bundle frame) transformations and field strengths.
//!
//! Bundle indices are 0-based in code and 1-based in residual labels.
//! `D_{ij̄}` is stored as a tensor of type `(0,1|0,1|0,0)`, the skew tensor
//! `d` as `(0,q|0,0|0,0)` and its inverse as `(q,0|0,0|0,0)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::array::ExprArray;
use crate::error::{Error, Result};
use crate::expr::{Evaluator, ScalarExpr, DIM};
use crate::geometry::{FrameField, StructureConstants};
use crate::linalg::{self, ExprMatrix};
use crate::residual::{self, Probe, Residual, Slot, TOL_CONSTANT};
use crate::sampling::SampleSet;
use crate::tensor::{
    covariant_differential, potential_curvature, ConnectionTriple, Potential, TensorField,
    TensorType,
};

const CHECK_EPS: f64 = 1e-10;
const DEGENERATE: f64 = 1e-12;
/// Threshold for the non-abelian gauge covariance of the field strength.
pub const TOL_COVARIANCE: f64 = 1e-8;

fn tag(q: usize, tags: [&'static str; 3]) -> &'static str {
    tags[q - 1]
}

fn rank_ok(q: usize) -> Result<()> {
    if (1..=3).contains(&q) {
        Ok(())
    } else {
        Err(Error::UnsupportedRank(q))
    }
}

/// 1-based bundle label with optional trailing tangent indices.
fn blabel(prefix: &str, bundle: &[usize], tangent: &[usize]) -> String {
    let parts: Vec<String> = bundle
        .iter()
        .map(|i| (i + 1).to_string())
        .chain(tangent.iter().map(|k| k.to_string()))
        .collect();
    format!("{prefix}[{}]", parts.join(","))
}

/// Sign of the permutation `idx` of `0..3`, zero on repeats.
fn levi_civita(idx: [usize; 3]) -> f64 {
    let [i, j, k] = idx;
    if i == j || j == k || i == k {
        return 0.0;
    }
    let inversions = (i > j) as u8 + (i > k) as u8 + (j > k) as u8;
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn delta(a: usize, b: usize) -> ScalarExpr {
    if a == b {
        ScalarExpr::one()
    } else {
        ScalarExpr::zero()
    }
}

/// Skew metric data supplied for a bundle.
#[derive(Debug, Clone)]
pub enum Skew {
    /// Rank 1 bundles carry none.
    None,
    /// `d_ij` for rank 2.
    Pair(ExprMatrix),
    /// The independent component `d_123` for rank 3.
    Triple(ScalarExpr),
}

#[derive(Debug, Clone)]
pub struct BundleStructure {
    q: usize,
    hermitian: TensorField,
    skew: Option<TensorField>,
    skew_upper: Option<TensorField>,
}

impl BundleStructure {
    /// Validates, at every sample point, that `D` is Hermitian and positive
    /// definite and that `d` is antisymmetric and nondegenerate.
    pub fn new(hermitian: ExprMatrix, skew: Skew, samples: &SampleSet) -> Result<Self> {
        let q = hermitian.len();
        rank_ok(q)?;
        if !linalg::is_square(&hermitian, q) {
            return Err(Error::Shape(format!("hermitian metric must be {q}x{q}")));
        }
        let d_ty = TensorType::new(0, 1, 0, 1, 0, 0)?;
        let h = TensorField::from_fn(d_ty, q, |idx| hermitian[idx[0]][idx[1]].clone())?;
        let (skew, skew_upper) = match (q, skew) {
            (1, Skew::None) => (None, None),
            (2, Skew::Pair(d)) => {
                if !linalg::is_square(&d, 2) {
                    return Err(Error::RankMismatch {
                        expected: 2,
                        found: d.len(),
                    });
                }
                let lower = TensorField::from_fn(TensorType::new(0, 2, 0, 0, 0, 0)?, 2, |idx| {
                    d[idx[0]][idx[1]].clone()
                })?;
                // d^{ij} with Σ_k d^{ik} d_{jk} = δ^i_j: the transposed inverse
                let (inv, _) = linalg::inverse(&d);
                let upper = TensorField::from_fn(TensorType::new(2, 0, 0, 0, 0, 0)?, 2, |idx| {
                    inv[idx[1]][idx[0]].clone()
                })?;
                (Some(lower), Some(upper))
            }
            (3, Skew::Triple(d123)) => {
                let inv = ScalarExpr::one() / &d123;
                let lower = TensorField::from_fn(TensorType::new(0, 3, 0, 0, 0, 0)?, 3, |idx| {
                    ScalarExpr::real(levi_civita([idx[0], idx[1], idx[2]])) * &d123
                })?;
                let upper = TensorField::from_fn(TensorType::new(3, 0, 0, 0, 0, 0)?, 3, |idx| {
                    ScalarExpr::real(levi_civita([idx[0], idx[1], idx[2]])) * &inv
                })?;
                (Some(lower), Some(upper))
            }
            (q, _) => {
                return Err(Error::Shape(format!(
                    "skew tensor data does not match bundle rank {q}"
                )))
            }
        };
        let b = Self {
            q,
            hermitian: h,
            skew,
            skew_upper,
        };
        b.validate(samples)?;
        Ok(b)
    }

    pub fn u1(d11: ScalarExpr, samples: &SampleSet) -> Result<Self> {
        Self::new(vec![vec![d11]], Skew::None, samples)
    }

    pub fn su2(hermitian: ExprMatrix, d: ExprMatrix, samples: &SampleSet) -> Result<Self> {
        if hermitian.len() != 2 {
            return Err(Error::RankMismatch {
                expected: 2,
                found: hermitian.len(),
            });
        }
        Self::new(hermitian, Skew::Pair(d), samples)
    }

    pub fn su3(hermitian: ExprMatrix, d123: ScalarExpr, samples: &SampleSet) -> Result<Self> {
        if hermitian.len() != 3 {
            return Err(Error::RankMismatch {
                expected: 3,
                found: hermitian.len(),
            });
        }
        Self::new(hermitian, Skew::Triple(d123), samples)
    }

    /// Orthonormal data of the given rank.
    pub fn orthonormal(q: usize, samples: &SampleSet) -> Result<Self> {
        let id = linalg::identity(q);
        match q {
            1 => Self::u1(ScalarExpr::one(), samples),
            2 => Self::su2(id, canonical_pair(), samples),
            3 => Self::su3(id, ScalarExpr::one(), samples),
            q => Err(Error::UnsupportedRank(q)),
        }
    }

    fn validate(&self, samples: &SampleSet) -> Result<()> {
        let q = self.q;
        for pt in samples {
            let mut ev = Evaluator::new(*pt);
            let mut m = DMatrix::<Complex64>::zeros(q, q);
            for i in 0..q {
                for j in 0..q {
                    m[(i, j)] = ev.eval(self.hermitian_entry(i, j))?;
                }
            }
            if (&m - m.adjoint())
                .iter()
                .any(|z| z.norm() > CHECK_EPS * (1.0 + m.norm()))
            {
                return Err(Error::NonHermitian { point: *pt });
            }
            let eig = SymmetricEigen::new(m).eigenvalues;
            if !eig.iter().all(|&v| v > 0.0) {
                return Err(Error::NonpositiveHermitian { point: *pt });
            }
            if let Some(d) = &self.skew {
                for (idx, e) in d.indexed() {
                    let v = ev.eval(e)?;
                    for a in 0..q {
                        for b in (a + 1)..q {
                            let mut swapped = idx.clone();
                            swapped.swap(a, b);
                            if (v + ev.eval(d.get(&swapped))?).norm() > CHECK_EPS * (1.0 + v.norm())
                            {
                                return Err(Error::AsymmetricSkew { point: *pt });
                            }
                        }
                    }
                }
                let top: Vec<usize> = (0..q).collect();
                if !(ev.eval(d.get(&top))?.norm() > DEGENERATE) {
                    return Err(Error::DegenerateSkew { point: *pt });
                }
            }
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `D_{ij̄}`
    pub fn hermitian_entry(&self, i: usize, j: usize) -> &ScalarExpr {
        self.hermitian.get(&[i, j])
    }

    pub fn hermitian(&self) -> &TensorField {
        &self.hermitian
    }

    /// `d_{i..}` of type `(0,q|0,0|0,0)`; absent for rank 1.
    pub fn skew(&self) -> Option<&TensorField> {
        self.skew.as_ref()
    }

    /// The inverse skew tensor `d^{i..}`; absent for rank 1.
    pub fn skew_upper(&self) -> Option<&TensorField> {
        self.skew_upper.as_ref()
    }

    fn require_skew(&self, what: &'static str) -> Result<(&TensorField, &TensorField)> {
        match (&self.skew, &self.skew_upper) {
            (Some(d), Some(u)) => Ok((d, u)),
            _ => Err(Error::NotApplicable { what, q: self.q }),
        }
    }

    /// `D_{ij̄} - conj(D_{jī})`, identically zero for validated data.
    pub fn check_hermitian(&self, samples: &SampleSet) -> Result<Residual> {
        let slots = (0..self.q)
            .flat_map(|i| (0..self.q).map(move |j| (i, j)))
            .map(|(i, j)| {
                Slot::new(
                    blabel("D-conj(D^T)", &[i, j], &[]),
                    Probe::ConjDiff(
                        self.hermitian_entry(i, j).clone(),
                        self.hermitian_entry(j, i).clone(),
                    ),
                )
            })
            .collect();
        Ok(residual::scan(
            "bundle.hermitian",
            tag(self.q, ["eq1.5", "eq1.6", "eq1.7"]),
            samples,
            slots,
        )?
        .with_tolerance(TOL_CONSTANT))
    }
}

/// `d_ij = [[0, 1], [-1, 0]]`
pub fn canonical_pair() -> ExprMatrix {
    vec![
        vec![ScalarExpr::zero(), ScalarExpr::one()],
        vec![-ScalarExpr::one(), ScalarExpr::zero()],
    ]
}

/// `Σ_ij D_{ij̄} conj(X^j̄) Y^i`
pub fn hermitian_form(b: &BundleStructure, x: &TensorField, y: &TensorField) -> Result<ScalarExpr> {
    for s in [x, y] {
        if s.ttype() != TensorType::SECTION {
            return Err(Error::Shape(format!(
                "expected a section, got type {}",
                s.ttype()
            )));
        }
        if s.q() != b.q {
            return Err(Error::RankMismatch {
                expected: b.q,
                found: s.q(),
            });
        }
    }
    let q = b.q;
    Ok((0..q)
        .flat_map(|i| (0..q).map(move |j| (i, j)))
        .map(|(i, j)| b.hermitian_entry(i, j) * x.get(&[j]).conj() * y.get(&[i]))
        .sum())
}

/// Deviation of `D` and `d` from their orthonormal-frame values.
pub fn check_orthonormal(b: &BundleStructure, samples: &SampleSet) -> Result<Residual> {
    let q = b.q;
    let mut values = Vec::new();
    for i in 0..q {
        for j in 0..q {
            values.push((
                blabel("D-I", &[i, j], &[]),
                b.hermitian_entry(i, j) - delta(i, j),
            ));
        }
    }
    match q {
        2 => {
            let (d, _) = b.require_skew("orthonormality")?;
            let canon = canonical_pair();
            for i in 0..2 {
                for j in 0..2 {
                    values.push((blabel("d-d0", &[i, j], &[]), d.get(&[i, j]) - &canon[i][j]));
                }
            }
        }
        3 => {
            let (d, _) = b.require_skew("orthonormality")?;
            values.push((
                blabel("d-1", &[0, 1, 2], &[]),
                d.get(&[0, 1, 2]) - ScalarExpr::one(),
            ));
        }
        _ => {}
    }
    Ok(residual::scan_values(
        "bundle.orthonormal",
        tag(q, ["def1.2", "def1.3", "def1.4"]),
        samples,
        values,
    )?
    .with_tolerance(TOL_CONSTANT))
}

/// Components of the inverse skew tensor `d^{i..}` in storage order.
pub fn inverse_skew(b: &BundleStructure) -> Result<&TensorField> {
    Ok(b.require_skew("inverse skew tensor")?.1)
}

/// Algebraic compatibility of `D` and `d`:
///
/// ```text
/// q = 2:  Σ_ij d^{ij} D_{iī} D_{jj̄} - conj(d_{īj̄})
/// q = 3:  Σ_ijk d^{ijk} D_{iī} D_{jj̄} D_{kk̄} - conj(d_{īj̄k̄})
/// ```
pub fn d_concordance(b: &BundleStructure, samples: &SampleSet) -> Result<Residual> {
    let (d, up) = b.require_skew("skew concordance")?;
    let q = b.q;
    let dims = vec![q; q];
    let mut values = Vec::new();
    for bar in crate::tensor::multi_indices(&dims) {
        let lhs: ScalarExpr = crate::tensor::multi_indices(&dims)
            .map(|plain| {
                let mut term = up.get(&plain).clone();
                for (p, bb) in plain.iter().zip(&bar) {
                    term = term * b.hermitian_entry(*p, *bb);
                }
                term
            })
            .sum();
        values.push((blabel("dDD-conj(d)", &bar, &[]), lhs - d.get(&bar).conj()));
    }
    Ok(residual::scan_values(
        "bundle.skew_concordance",
        tag(q, ["", "eq1.9", "eq1.10"]),
        samples,
        values,
    )?
    .with_tolerance(TOL_CONSTANT))
}

/// `∇D` and, for ranks 2 and 3, `∇d` at the frame's sample points.
pub fn connection_concordance(
    b: &BundleStructure,
    conn: &ConnectionTriple,
    frame: &FrameField,
) -> Result<Vec<Residual>> {
    if conn.q() != b.q {
        return Err(Error::RankMismatch {
            expected: b.q,
            found: conn.q(),
        });
    }
    let q = b.q;
    let samples = frame.samples();
    let nabla = |t: &TensorField, prefix: &str| -> Result<Vec<(String, ScalarExpr)>> {
        let dt = covariant_differential(t, conn, frame)?;
        Ok(dt
            .indexed()
            .map(|(idx, e)| {
                let (bundle, tangent) = idx.split_at(idx.len() - 1);
                (blabel(prefix, bundle, tangent), e.clone())
            })
            .collect())
    };
    let mut out = vec![residual::scan_values(
        "concordance.hermitian",
        tag(q, ["eq3.1", "eq4.1", "eq5.1"]),
        samples,
        nabla(&b.hermitian, "nabla_D")?,
    )?];
    if let Some(d) = &b.skew {
        out.push(residual::scan_values(
            "concordance.skew",
            tag(q, ["", "eq4.2", "eq5.2"]),
            samples,
            nabla(d, "nabla_d")?,
        )?);
    }
    Ok(out)
}

/// `Re A^1_k1` forced by concordance: `L_k(D_11) / (2 D_11)`.
pub fn u1_real_part(b: &BundleStructure, frame: &FrameField, k: usize) -> Result<ScalarExpr> {
    if b.q != 1 {
        return Err(Error::NotApplicable {
            what: "the U(1) real-part formula",
            q: b.q,
        });
    }
    let d11 = b.hermitian_entry(0, 0);
    for pt in frame.samples() {
        let v = d11.eval(pt)?;
        if !(v.re > 0.0) {
            return Err(Error::NonpositiveHermitian { point: *pt });
        }
    }
    Ok(frame.lie(d11, k) / (ScalarExpr::real(2.0) * d11))
}

/// `|Re A^1_k1 - L_k(D_11) / (2 D_11)|` for every `k`.
pub fn check_u1_real_part(
    b: &BundleStructure,
    conn: &ConnectionTriple,
    frame: &FrameField,
) -> Result<Residual> {
    let mut slots = Vec::new();
    for k in 0..DIM {
        let want = u1_real_part(b, frame, k)?;
        slots.push(Slot::new(
            blabel("ReA", &[0, 0], &[k]),
            Probe::RealDiff(conn.a().get(k, 0, 0).clone(), want),
        ));
    }
    Ok(residual::scan(
        "u1.real_part",
        "eq3.2",
        frame.samples(),
        slots,
    )?)
}

/// Skew-Hermitian and traceless residuals of each `A_k`:
/// `conj(A^i_kj) + A^j_ki` and `Σ_i A^i_ki`.
pub fn su_algebra_check(conn: &ConnectionTriple, samples: &SampleSet) -> Result<Vec<Residual>> {
    let q = conn.q();
    if q < 2 {
        return Err(Error::NotApplicable {
            what: "su(q) membership",
            q,
        });
    }
    let a = conn.a();
    let mut skew = Vec::new();
    let mut trace = Vec::new();
    for k in 0..DIM {
        for i in 0..q {
            for j in 0..q {
                skew.push((
                    blabel("A+A^H", &[i, j], &[k]),
                    a.get(k, i, j).conj() + a.get(k, j, i),
                ));
            }
        }
        trace.push((
            format!("trA[{k}]"),
            (0..q).map(|i| a.get(k, i, i).clone()).sum(),
        ));
    }
    let t = tag(q, ["", "eq4.3", "eq5.3"]);
    Ok(vec![
        residual::scan_values("su.skew_hermitian", t, samples, skew)?.with_tolerance(TOL_CONSTANT),
        residual::scan_values("su.traceless", t, samples, trace)?.with_tolerance(TOL_CONSTANT),
    ])
}

/// The two contraction identities of a completely skew rank-3 tensor:
///
/// ```text
/// Σ_k d_ijk d^abk  = δ^a_i δ^b_j - δ^a_j δ^b_i
/// Σ_jk d_ijk d^ajk = 2 δ^a_i
/// ```
pub fn epsilon_identities(b: &BundleStructure, samples: &SampleSet) -> Result<Vec<Residual>> {
    if b.q != 3 {
        return Err(Error::NotApplicable {
            what: "the rank-3 contraction identities",
            q: b.q,
        });
    }
    let (d, up) = b.require_skew("the rank-3 contraction identities")?;
    let mut first = Vec::new();
    let mut second = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for a in 0..3 {
                for bb in 0..3 {
                    let lhs: ScalarExpr = (0..3)
                        .map(|k| d.get(&[i, j, k]) * up.get(&[a, bb, k]))
                        .sum();
                    let rhs = delta(a, i) * delta(bb, j) - delta(a, j) * delta(bb, i);
                    first.push((blabel("dd-dd", &[i, j, a, bb], &[]), lhs - rhs));
                }
            }
        }
    }
    for i in 0..3 {
        for a in 0..3 {
            let lhs: ScalarExpr = (0..3)
                .flat_map(|j| (0..3).map(move |k| (j, k)))
                .map(|(j, k)| d.get(&[i, j, k]) * up.get(&[a, j, k]))
                .sum();
            second.push((
                blabel("dd-2", &[i, a], &[]),
                lhs - ScalarExpr::real(2.0) * delta(a, i),
            ));
        }
    }
    Ok(vec![
        residual::scan_values("epsilon.pair", "eps5.1", samples, first)?
            .with_tolerance(TOL_CONSTANT),
        residual::scan_values("epsilon.full", "eps5.2", samples, second)?
            .with_tolerance(TOL_CONSTANT),
    ])
}

/// Change of bundle frame `Ψ̃_i = Σ_j S^j_i Ψ_j`, with `T = S⁻¹`.
#[derive(Debug, Clone)]
pub struct GaugeMap {
    q: usize,
    s: ExprMatrix,
    t: ExprMatrix,
    phase: Option<ScalarExpr>,
}

impl GaugeMap {
    /// Rank 1 map `S = e^{iφ}`; `φ` must be real at the sample points.
    pub fn phase(phi: ScalarExpr, samples: &SampleSet) -> Result<Self> {
        for pt in samples {
            if phi.eval(pt)?.im.abs() > DEGENERATE {
                return Err(Error::NotUnitary { point: *pt });
            }
        }
        let i_phi = ScalarExpr::i() * &phi;
        Ok(Self {
            q: 1,
            s: vec![vec![i_phi.exp()]],
            t: vec![vec![(-i_phi).exp()]],
            phase: Some(phi),
        })
    }

    /// Rank 2 or 3 map from its matrix `S^i_j` (row `i`). Validates at the
    /// sample points that `S` is invertible, unitary and of unit determinant.
    pub fn matrix(s: ExprMatrix, samples: &SampleSet) -> Result<Self> {
        let q = s.len();
        if !(2..=3).contains(&q) {
            return Err(Error::UnsupportedRank(q));
        }
        if !linalg::is_square(&s, q) {
            return Err(Error::Shape(format!("gauge matrix must be {q}x{q}")));
        }
        let (t, det) = linalg::inverse(&s);
        for pt in samples {
            let mut ev = Evaluator::new(*pt);
            let det_v = ev.eval(&det)?;
            if !(det_v.norm() > 1e-9) {
                return Err(Error::DegenerateMap { point: *pt });
            }
            let sv = linalg::eval_matrix(&mut ev, &s)?;
            let tv = linalg::eval_matrix(&mut ev, &t)?;
            let id = DMatrix::<Complex64>::identity(q, q);
            if (&sv * &tv - &id).iter().any(|z| z.norm() > CHECK_EPS) {
                return Err(Error::DegenerateMap { point: *pt });
            }
            if (&sv * sv.adjoint() - &id)
                .iter()
                .any(|z| z.norm() > CHECK_EPS)
            {
                return Err(Error::NotUnitary { point: *pt });
            }
            if (det_v - 1.0).norm() > CHECK_EPS {
                return Err(Error::NotSpecial { point: *pt });
            }
        }
        Ok(Self {
            q,
            s,
            t,
            phase: None,
        })
    }

    pub fn identity(q: usize) -> Result<Self> {
        rank_ok(q)?;
        if q == 1 {
            return Ok(Self {
                q,
                s: linalg::identity(1),
                t: linalg::identity(1),
                phase: Some(ScalarExpr::zero()),
            });
        }
        Ok(Self {
            q,
            s: linalg::identity(q),
            t: linalg::identity(q),
            phase: None,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `S^i_j`
    pub fn s(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.s[i][j]
    }

    /// `T^i_j`, the symbolic inverse.
    pub fn t(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.t[i][j]
    }

    pub fn phase_angle(&self) -> Option<&ScalarExpr> {
        self.phase.as_ref()
    }

    /// `S T - I`, `S S^H - I` and (ranks 2, 3) `det S - 1`.
    pub fn check(&self, samples: &SampleSet) -> Result<Vec<Residual>> {
        let q = self.q;
        let t = tag(q, ["eq3.3", "eq4.4", "eq5.4"]);
        let st = linalg::matmul(&self.s, &self.t);
        let ssh = linalg::matmul(&self.s, &linalg::conj_transpose(&self.s));
        let mut inverse = Vec::new();
        let mut unitary = Vec::new();
        for i in 0..q {
            for j in 0..q {
                inverse.push((blabel("ST-I", &[i, j], &[]), &st[i][j] - delta(i, j)));
                unitary.push((blabel("SS^H-I", &[i, j], &[]), &ssh[i][j] - delta(i, j)));
            }
        }
        let mut out = vec![
            residual::scan_values("gauge.inverse", t, samples, inverse)?
                .with_tolerance(TOL_CONSTANT),
            residual::scan_values("gauge.unitary", t, samples, unitary)?
                .with_tolerance(TOL_CONSTANT),
        ];
        if q > 1 {
            let det = linalg::det(&self.s) - ScalarExpr::one();
            out.push(
                residual::scan_values("gauge.special", t, samples, [("detS-1".to_string(), det)])?
                    .with_tolerance(TOL_CONSTANT),
            );
        }
        Ok(out)
    }
}

/// `θ^i_kj = Σ_a S^i_a L_k(T^a_j)`
pub fn theta_params(map: &GaugeMap, frame: &FrameField) -> Potential {
    let q = map.q;
    Potential::from_fn(q, |k, i, j| {
        (0..q)
            .map(|a| &map.s[i][a] * frame.lie(&map.t[a][j], k))
            .sum()
    })
    .expect("rank validated")
}

/// The equivalent form `θ^i_kj = -Σ_a L_k(S^i_a) T^a_j`.
pub fn theta_params_alt(map: &GaugeMap, frame: &FrameField) -> Potential {
    let q = map.q;
    Potential::from_fn(q, |k, i, j| {
        -(0..q)
            .map(|a| frame.lie(&map.s[i][a], k) * &map.t[a][j])
            .sum::<ScalarExpr>()
    })
    .expect("rank validated")
}

/// Agreement of the two expressions for the theta-parameters.
pub fn check_theta(map: &GaugeMap, frame: &FrameField) -> Result<Residual> {
    let a = theta_params(map, frame);
    let b = theta_params_alt(map, frame);
    let slots = a
        .array()
        .indexed()
        .map(|([k, i, j], e)| {
            Slot::new(
                blabel("theta-theta'", &[i, j], &[k]),
                Probe::Diff(e.clone(), b.get(k, i, j).clone()),
            )
        })
        .collect();
    Ok(residual::scan(
        "gauge.theta",
        tag(map.q, ["eq3.6", "eq4.8", "eq5.8"]),
        frame.samples(),
        slots,
    )?
    .with_tolerance(TOL_CONSTANT))
}

/// Connection components in the new bundle frame.
///
/// Rank 1 phase maps use `A = Ã - i L_k(φ)`; matrix maps use
/// `A^i_kj = Σ_ab S^i_a T^b_j Ã^a_kb + θ^i_kj`. `Ā` transforms with the
/// conjugate map, so real triples stay real. `Γ` is unchanged.
pub fn gauge_transform(
    conn: &ConnectionTriple,
    map: &GaugeMap,
    frame: &FrameField,
) -> Result<ConnectionTriple> {
    let q = map.q;
    if conn.q() != q {
        return Err(Error::RankMismatch {
            expected: q,
            found: conn.q(),
        });
    }
    let (a, abar) = match &map.phase {
        Some(phi) => {
            let shift: Vec<ScalarExpr> = (0..DIM)
                .map(|k| ScalarExpr::i() * frame.lie(phi, k))
                .collect();
            (
                Potential::from_fn(1, |k, _, _| conn.a().get(k, 0, 0) - &shift[k])?,
                Potential::from_fn(1, |k, _, _| conn.abar().get(k, 0, 0) - shift[k].conj())?,
            )
        }
        None => {
            let theta = theta_params(map, frame);
            let rotate = |p: &Potential, conj: bool| {
                let pick = |e: &ScalarExpr| if conj { e.conj() } else { e.clone() };
                Potential::from_fn(q, |k, i, j| {
                    let mut acc = pick(theta.get(k, i, j));
                    for aa in 0..q {
                        for bb in 0..q {
                            let coeff = pick(&map.s[i][aa]) * pick(&map.t[bb][j]);
                            acc = acc + coeff * p.get(k, aa, bb);
                        }
                    }
                    acc
                })
            };
            (rotate(conn.a(), false)?, rotate(conn.abar(), true)?)
        }
    };
    ConnectionTriple::new(conn.gamma().clone(), a, abar)
}

/// `ψ^i = Σ_j S^i_j ψ̃^j`
pub fn section_transform(psi_tilde: &TensorField, map: &GaugeMap) -> Result<TensorField> {
    if psi_tilde.ttype() != TensorType::SECTION {
        return Err(Error::Shape(format!(
            "expected a section, got type {}",
            psi_tilde.ttype()
        )));
    }
    if psi_tilde.q() != map.q {
        return Err(Error::RankMismatch {
            expected: map.q,
            found: psi_tilde.q(),
        });
    }
    let q = map.q;
    TensorField::from_fn(TensorType::SECTION, q, |idx| {
        (0..q)
            .map(|j| &map.s[idx[0]][j] * psi_tilde.get(&[j]))
            .sum()
    })
}

/// Bundle data in the new frame: `D_{ab̄} = Σ T^i_a conj(T^j_b) D̃_{ij̄}` and
/// `d_{a..} = Σ T^i_a .. d̃_{i..}`.
pub fn transform_bundle(
    b: &BundleStructure,
    map: &GaugeMap,
    samples: &SampleSet,
) -> Result<BundleStructure> {
    let q = b.q;
    if map.q != q {
        return Err(Error::RankMismatch {
            expected: q,
            found: map.q,
        });
    }
    let t = &map.t;
    let hermitian: ExprMatrix = (0..q)
        .map(|a| {
            (0..q)
                .map(|bb| {
                    (0..q)
                        .flat_map(|i| (0..q).map(move |j| (i, j)))
                        .map(|(i, j)| &t[i][a] * t[j][bb].conj() * b.hermitian_entry(i, j))
                        .sum()
                })
                .collect()
        })
        .collect();
    let skew = match (&b.skew, q) {
        (None, _) => Skew::None,
        (Some(d), 2) => Skew::Pair(
            (0..2)
                .map(|a| {
                    (0..2)
                        .map(|bb| {
                            (0..2)
                                .flat_map(|i| (0..2).map(move |j| (i, j)))
                                .map(|(i, j)| &t[i][a] * &t[j][bb] * d.get(&[i, j]))
                                .sum()
                        })
                        .collect()
                })
                .collect(),
        ),
        (Some(d), _) => Skew::Triple(linalg::det(t) * d.get(&[0, 1, 2])),
    };
    BundleStructure::new(hermitian, skew, samples)
}

/// `𝔯^p_kij` of a connection triple, stored at `[p, k, i, j]`.
#[derive(Debug, Clone)]
pub struct BundleCurvature {
    q: usize,
    components: ExprArray<4>,
}

impl BundleCurvature {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn get(&self, p: usize, k: usize, i: usize, j: usize) -> &ScalarExpr {
        self.components.get([p, k, i, j])
    }

    pub fn array(&self) -> &ExprArray<4> {
        &self.components
    }

    /// Rank 1 only: the purely tangent tensor `𝔯_ij = 𝔯^1_1ij`.
    pub fn collapsed(&self) -> Option<ExprArray<2>> {
        (self.q == 1).then(|| ExprArray::from_fn([DIM, DIM], |[i, j]| self.get(0, 0, i, j).clone()))
    }
}

pub fn bundle_curvature(
    conn: &ConnectionTriple,
    frame: &FrameField,
    c: &StructureConstants,
) -> BundleCurvature {
    BundleCurvature {
        q: conn.q(),
        components: potential_curvature(conn.a(), frame, c),
    }
}

/// Rank 1 field strength `𝔯_ij = L_i A_j - L_j A_i - Σ_h c^h_ij A_h`, where
/// `A_k = A^1_k1`. Equal to [`BundleCurvature::collapsed`], computed without
/// the commutator term.
pub fn abelian_field_strength(
    a: &Potential,
    frame: &FrameField,
    c: &StructureConstants,
) -> Result<ExprArray<2>> {
    if a.q() != 1 {
        return Err(Error::NotApplicable {
            what: "the abelian field strength",
            q: a.q(),
        });
    }
    Ok(ExprArray::from_fn([DIM, DIM], |[i, j]| {
        if i == j {
            return ScalarExpr::zero();
        }
        let anholonomic: ScalarExpr = (0..DIM).map(|h| c.get(h, i, j) * a.get(h, 0, 0)).sum();
        frame.lie(a.get(j, 0, 0), i) - frame.lie(a.get(i, 0, 0), j) - anholonomic
    }))
}

/// Field strength after a gauge transformation against the transformed
/// original: `Σ_ab S^p_a T^b_k 𝔯̃^a_bij` for matrix maps, plain invariance
/// of `𝔯_ij` for rank 1.
pub fn check_gauge_covariance(
    original: &ConnectionTriple,
    map: &GaugeMap,
    frame: &FrameField,
    c: &StructureConstants,
) -> Result<Residual> {
    let transformed = gauge_transform(original, map, frame)?;
    let q = map.q;
    let samples = frame.samples();
    if q == 1 {
        let before = abelian_field_strength(original.a(), frame, c)?;
        let after = abelian_field_strength(transformed.a(), frame, c)?;
        let slots = after
            .indexed()
            .map(|([i, j], e)| {
                Slot::new(
                    format!("r[{i},{j}]"),
                    Probe::Diff(e.clone(), before.get([i, j]).clone()),
                )
            })
            .collect();
        return Ok(
            residual::scan("gauge.field_strength", "eq3.8", samples, slots)?
                .with_tolerance(TOL_CONSTANT),
        );
    }
    let before = bundle_curvature(original, frame, c);
    let after = bundle_curvature(&transformed, frame, c);
    let mut slots = Vec::new();
    for ([p, k, i, j], e) in after.components.indexed() {
        let mut want = ScalarExpr::zero();
        for a in 0..q {
            for b in 0..q {
                want = want + &map.s[p][a] * &map.t[b][k] * before.get(a, b, i, j);
            }
        }
        slots.push(Slot::new(
            blabel("r-SrT", &[p, k], &[i, j]),
            Probe::Diff(e.clone(), want),
        ));
    }
    Ok(residual::scan(
        "gauge.covariance",
        tag(q, ["", "eq4.9", "eq5.9"]),
        samples,
        slots,
    )?
    .with_tolerance(TOL_COVARIANCE))
}

#[cfg(test)]
mod tests;
