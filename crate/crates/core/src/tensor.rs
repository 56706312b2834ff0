//! Frame-relative tensor fields of type `(ε,η|σ,ζ|m,n)` and the covariant
//! differential of a connection triple `(Γ, A, Ā)`.
//!
//! Components are stored densely in row-major order with the slot groups
//! laid out as: bundle uppers, bundle lowers, conjugate uppers, conjugate
//! lowers, tangent uppers, tangent lowers. Bundle indices run over `0..q`
//! (printed 1-based), tangent indices over `0..4`.

use std::fmt;

use crate::array::ExprArray;
use crate::error::{Error, Result};
use crate::expr::{ScalarExpr, DIM};
use crate::geometry::{tangent_curvature, FrameField, GammaField, MetricField, StructureConstants};
use crate::linalg::ExprMatrix;
use crate::residual::{self, label, Probe, Residual, Slot};
use crate::sampling::SampleSet;

pub const MAX_RANK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorType {
    pub bundle_upper: usize,
    pub bundle_lower: usize,
    pub conj_upper: usize,
    pub conj_lower: usize,
    pub tangent_upper: usize,
    pub tangent_lower: usize,
}

impl TensorType {
    pub fn new(
        bundle_upper: usize,
        bundle_lower: usize,
        conj_upper: usize,
        conj_lower: usize,
        tangent_upper: usize,
        tangent_lower: usize,
    ) -> Result<Self> {
        let t = Self {
            bundle_upper,
            bundle_lower,
            conj_upper,
            conj_lower,
            tangent_upper,
            tangent_lower,
        };
        if t.rank() > MAX_RANK {
            return Err(Error::RankTooLarge(t.rank()));
        }
        Ok(t)
    }

    pub const SCALAR: TensorType = TensorType {
        bundle_upper: 0,
        bundle_lower: 0,
        conj_upper: 0,
        conj_lower: 0,
        tangent_upper: 0,
        tangent_lower: 0,
    };

    /// A bundle vector, type `(1,0|0,0|0,0)`.
    pub const SECTION: TensorType = TensorType {
        bundle_upper: 1,
        ..Self::SCALAR
    };

    pub fn rank(&self) -> usize {
        self.bundle_slots() + self.tangent_upper + self.tangent_lower
    }

    pub fn bundle_slots(&self) -> usize {
        self.bundle_upper + self.bundle_lower + self.conj_upper + self.conj_lower
    }

    /// Type of `τ(X)`: bundle and conjugate-bundle groups exchanged.
    pub fn conjugated(&self) -> Self {
        Self {
            bundle_upper: self.conj_upper,
            bundle_lower: self.conj_lower,
            conj_upper: self.bundle_upper,
            conj_lower: self.bundle_lower,
            ..*self
        }
    }

    /// Type of `∇X`: one more tangent lower slot.
    pub fn differentiated(&self) -> Result<Self> {
        Self::new(
            self.bundle_upper,
            self.bundle_lower,
            self.conj_upper,
            self.conj_lower,
            self.tangent_upper,
            self.tangent_lower + 1,
        )
    }

    /// Dimension of every slot, in storage order.
    pub fn dims(&self, q: usize) -> Vec<usize> {
        let mut d = vec![q; self.bundle_slots()];
        d.extend(std::iter::repeat_n(
            DIM,
            self.tangent_upper + self.tangent_lower,
        ));
        d
    }

    fn groups(&self) -> [(SlotGroup, std::ops::Range<usize>); 6] {
        let mut start = 0;
        let mut next = |len: usize| {
            let r = start..start + len;
            start += len;
            r
        };
        [
            (SlotGroup::BundleUpper, next(self.bundle_upper)),
            (SlotGroup::BundleLower, next(self.bundle_lower)),
            (SlotGroup::ConjUpper, next(self.conj_upper)),
            (SlotGroup::ConjLower, next(self.conj_lower)),
            (SlotGroup::TangentUpper, next(self.tangent_upper)),
            (SlotGroup::TangentLower, next(self.tangent_lower)),
        ]
    }
}

impl fmt::Display for TensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{}|{},{}|{},{})",
            self.bundle_upper,
            self.bundle_lower,
            self.conj_upper,
            self.conj_lower,
            self.tangent_upper,
            self.tangent_lower
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlotGroup {
    BundleUpper,
    BundleLower,
    ConjUpper,
    ConjLower,
    TangentUpper,
    TangentLower,
}

fn check_rank(q: usize) -> Result<()> {
    if (1..=3).contains(&q) {
        Ok(())
    } else {
        Err(Error::UnsupportedRank(q))
    }
}

/// Row-major multi-index iteration over `dims`.
pub(crate) fn multi_indices(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = dims.iter().product();
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; dims.len()];
        for axis in (0..dims.len()).rev() {
            idx[axis] = flat % dims[axis];
            flat /= dims[axis];
        }
        idx
    })
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for axis in (0..dims.len().saturating_sub(1)).rev() {
        s[axis] = s[axis + 1] * dims[axis + 1];
    }
    s
}

#[derive(Debug, Clone)]
pub struct TensorField {
    ttype: TensorType,
    q: usize,
    components: Vec<ScalarExpr>,
}

impl TensorField {
    pub fn new(ttype: TensorType, q: usize, components: Vec<ScalarExpr>) -> Result<Self> {
        check_rank(q)?;
        let want: usize = ttype.dims(q).iter().product();
        if components.len() != want {
            return Err(Error::Shape(format!(
                "type {ttype} over rank {q} needs {want} components, got {}",
                components.len()
            )));
        }
        Ok(Self {
            ttype,
            q,
            components,
        })
    }

    pub fn from_fn(
        ttype: TensorType,
        q: usize,
        mut f: impl FnMut(&[usize]) -> ScalarExpr,
    ) -> Result<Self> {
        check_rank(q)?;
        let dims = ttype.dims(q);
        let components = multi_indices(&dims).map(|idx| f(&idx)).collect();
        Ok(Self {
            ttype,
            q,
            components,
        })
    }

    pub fn scalar(q: usize, f: ScalarExpr) -> Result<Self> {
        Self::new(TensorType::SCALAR, q, vec![f])
    }

    pub fn ttype(&self) -> TensorType {
        self.ttype
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dims(&self) -> Vec<usize> {
        self.ttype.dims(self.q)
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    pub fn get(&self, idx: &[usize]) -> &ScalarExpr {
        let dims = self.dims();
        assert_eq!(idx.len(), dims.len(), "index rank");
        let flat = idx.iter().zip(dims.iter()).fold(0, |acc, (&i, &d)| {
            assert!(i < d, "index {i} out of range {d}");
            acc * d + i
        });
        &self.components[flat]
    }

    /// Components paired with their multi-index, in storage order.
    pub fn indexed(&self) -> impl Iterator<Item = (Vec<usize>, &ScalarExpr)> + '_ {
        let dims = self.dims();
        multi_indices(&dims)
            .collect::<Vec<_>>()
            .into_iter()
            .zip(self.components.iter())
    }
}

/// Complex conjugation `τ`: conjugates every component and exchanges the
/// bundle and conjugate-bundle index groups. Tangent slots are untouched.
pub fn tau_conjugate(x: &TensorField) -> TensorField {
    let t = x.ttype;
    let out_type = t.conjugated();
    let (bu, bl, cu, cl) = (t.bundle_upper, t.bundle_lower, t.conj_upper, t.conj_lower);
    TensorField::from_fn(out_type, x.q, |idx| {
        // new layout: [old cu | old cl | old bu | old bl | tangent]
        let (new_bu, rest) = idx.split_at(cu);
        let (new_bl, rest) = rest.split_at(cl);
        let (new_cu, rest) = rest.split_at(bu);
        let (new_cl, tangent) = rest.split_at(bl);
        let old: Vec<usize> = new_cu
            .iter()
            .chain(new_cl)
            .chain(new_bu)
            .chain(new_bl)
            .chain(tangent)
            .copied()
            .collect();
        x.get(&old).conj()
    })
    .expect("rank already validated")
}

/// Bundle components `A^i_kj` of a connection, stored at `[k, i, j]`.
#[derive(Debug, Clone)]
pub struct Potential {
    q: usize,
    data: ExprArray<3>,
}

impl Potential {
    pub fn new(q: usize, data: ExprArray<3>) -> Result<Self> {
        check_rank(q)?;
        if data.dims() != [DIM, q, q] {
            return Err(Error::Shape(format!(
                "potential over rank {q} must be 4x{q}x{q}, got {:?}",
                data.dims()
            )));
        }
        Ok(Self { q, data })
    }

    pub fn zero(q: usize) -> Result<Self> {
        Self::new(q, ExprArray::zeros([DIM, q, q]))
    }

    /// `f(k, i, j)` gives `A^i_kj`.
    pub fn from_fn(q: usize, mut f: impl FnMut(usize, usize, usize) -> ScalarExpr) -> Result<Self> {
        Self::new(q, ExprArray::from_fn([DIM, q, q], |[k, i, j]| f(k, i, j)))
    }

    /// One `q×q` matrix `(A_k)^i_j` per tangent index `k`.
    pub fn from_matrices(q: usize, matrices: &[ExprMatrix]) -> Result<Self> {
        if matrices.len() != DIM {
            return Err(Error::Shape(format!(
                "expected {DIM} potential matrices, got {}",
                matrices.len()
            )));
        }
        for m in matrices {
            if !crate::linalg::is_square(m, q) {
                return Err(Error::Shape(format!("potential matrices must be {q}x{q}")));
            }
        }
        Self::from_fn(q, |k, i, j| matrices[k][i][j].clone())
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `A^i_kj`
    pub fn get(&self, k: usize, i: usize, j: usize) -> &ScalarExpr {
        self.data.get([k, i, j])
    }

    pub fn matrix(&self, k: usize) -> ExprMatrix {
        (0..self.q)
            .map(|i| (0..self.q).map(|j| self.get(k, i, j).clone()).collect())
            .collect()
    }

    pub fn array(&self) -> &ExprArray<3> {
        &self.data
    }

    pub fn conj(&self) -> Self {
        Self {
            q: self.q,
            data: self.data.map(ScalarExpr::conj),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.data.indexed().all(|(_, e)| e.is_zero())
    }
}

/// The components `(Γ, A, Ā)` that define a covariant differential.
#[derive(Debug, Clone)]
pub struct ConnectionTriple {
    gamma: GammaField,
    a: Potential,
    abar: Potential,
}

impl ConnectionTriple {
    /// Arbitrary triple; `Ā` is not required to be `conj(A)`.
    pub fn new(gamma: GammaField, a: Potential, abar: Potential) -> Result<Self> {
        if a.q != abar.q {
            return Err(Error::RankMismatch {
                expected: a.q,
                found: abar.q,
            });
        }
        Ok(Self { gamma, a, abar })
    }

    /// Real connection: `Ā = conj(A)` by construction. Reality of `Γ` is a
    /// property of the caller's data; see [`reality_check`].
    pub fn real(gamma: GammaField, a: Potential) -> Self {
        let abar = a.conj();
        Self { gamma, a, abar }
    }

    /// `(Γ, 0, 0)` over a rank-1 bundle, for tensors without bundle slots.
    pub fn tangent_only(gamma: GammaField) -> Self {
        Self::real(gamma, Potential::zero(1).expect("rank 1"))
    }

    pub fn q(&self) -> usize {
        self.a.q
    }

    pub fn gamma(&self) -> &GammaField {
        &self.gamma
    }

    pub fn a(&self) -> &Potential {
        &self.a
    }

    pub fn abar(&self) -> &Potential {
        &self.abar
    }
}

/// The covariant differential `∇X`, of type `(ε,η|σ,ζ|m,n+1)` with the new
/// tangent slot last:
///
/// ```text
/// ∇_k X = L_k X + Σ_upper A^i_kv X^..v.. - Σ_lower A^w_kj X_..w..
///               + Σ_conj upper Ā X - Σ_conj lower Ā X
///               + Σ_tangent upper Γ^h_kv X - Σ_tangent lower Γ^w_kh X
/// ```
///
/// Fails with [`Error::RankMismatch`] when `x` carries bundle slots and its
/// rank differs from the connection's.
pub fn covariant_differential(
    x: &TensorField,
    conn: &ConnectionTriple,
    frame: &FrameField,
) -> Result<TensorField> {
    let t = x.ttype;
    if t.bundle_slots() > 0 && x.q != conn.q() {
        return Err(Error::RankMismatch {
            expected: conn.q(),
            found: x.q,
        });
    }
    let out_type = t.differentiated()?;
    let q = x.q;
    let dims = t.dims(q);
    let stride = strides(&dims);
    let groups = t.groups();
    let (a, abar, gamma) = (&conn.a, &conn.abar, &conn.gamma);

    let out_dims = out_type.dims(q);
    let mut components = Vec::with_capacity(out_dims.iter().product());
    for idx in multi_indices(&out_dims) {
        let (base, k) = (&idx[..dims.len()], idx[dims.len()]);
        let flat: usize = base.iter().zip(&stride).map(|(i, s)| i * s).sum();
        let at = |slot: usize, value: usize| {
            &x.components[flat + value * stride[slot] - base[slot] * stride[slot]]
        };

        let mut acc = frame.lie(&x.components[flat], k);
        for (group, range) in groups.iter().cloned() {
            for slot in range {
                let cur = base[slot];
                let (range_len, upper) = match group {
                    SlotGroup::BundleUpper | SlotGroup::ConjUpper => (q, true),
                    SlotGroup::BundleLower | SlotGroup::ConjLower => (q, false),
                    SlotGroup::TangentUpper => (DIM, true),
                    SlotGroup::TangentLower => (DIM, false),
                };
                let coeff = |v: usize| -> &ScalarExpr {
                    match (group, upper) {
                        (SlotGroup::BundleUpper, _) => a.get(k, cur, v),
                        (SlotGroup::BundleLower, _) => a.get(k, v, cur),
                        (SlotGroup::ConjUpper, _) => abar.get(k, cur, v),
                        (SlotGroup::ConjLower, _) => abar.get(k, v, cur),
                        (SlotGroup::TangentUpper, _) => gamma.get(cur, k, v),
                        (SlotGroup::TangentLower, _) => gamma.get(v, k, cur),
                    }
                };
                let correction: ScalarExpr = (0..range_len).map(|v| coeff(v) * at(slot, v)).sum();
                acc = if upper {
                    acc + correction
                } else {
                    acc - correction
                };
            }
        }
        components.push(acc);
    }
    TensorField::new(out_type, q, components)
}

/// Bundle curvature of a potential, `𝔯^p_kij` stored at `[p, k, i, j]`:
///
/// ```text
/// 𝔯^p_kij = L_i A^p_jk - L_j A^p_ik + Σ_h (A^p_ih A^h_jk - A^p_jh A^h_ik) - Σ_h c^h_ij A^p_hk
/// ```
pub fn potential_curvature(
    a: &Potential,
    frame: &FrameField,
    c: &StructureConstants,
) -> ExprArray<4> {
    let q = a.q;
    ExprArray::from_fn([q, q, DIM, DIM], |[p, k, i, j]| {
        if i == j {
            return ScalarExpr::zero();
        }
        let commutator: ScalarExpr = (0..q)
            .map(|h| a.get(i, p, h) * a.get(j, h, k) - a.get(j, p, h) * a.get(i, h, k))
            .sum();
        let anholonomic: ScalarExpr = (0..DIM).map(|h| c.get(h, i, j) * a.get(h, p, k)).sum();
        frame.lie(a.get(j, p, k), i) - frame.lie(a.get(i, p, k), j) + commutator - anholonomic
    })
}

/// Residuals of the reality relations of a connection triple at the frame's
/// sample points, in order:
///
/// 1. `connection.conjugate`: `Ā - conj(A)`
/// 2. `gamma.real`: `Im Γ`
/// 3. `tangent_curvature.real`: `Im R^p_kij`
/// 4. `bundle_curvature.conjugate`: `𝔯̄ - conj(𝔯)`, both curvatures
///    evaluated independently
pub fn reality_check(
    conn: &ConnectionTriple,
    frame: &FrameField,
    c: &StructureConstants,
) -> Result<Vec<Residual>> {
    let samples = frame.samples();
    let conj_slots = conn
        .abar
        .data
        .indexed()
        .map(|([k, i, j], e)| {
            Slot::new(
                label("Abar-conj(A)", &[k, i + 1, j + 1]),
                Probe::ConjDiff(e.clone(), conn.a.get(k, i, j).clone()),
            )
        })
        .collect();
    let r = tangent_curvature(&conn.gamma, frame, c);
    let r_slots = r
        .indexed()
        .map(|(idx, e)| Slot::new(label("R", &idx), Probe::Imag(e.clone())))
        .collect();
    let curv = potential_curvature(&conn.a, frame, c);
    let curv_bar = potential_curvature(&conn.abar, frame, c);
    let curv_slots = curv_bar
        .indexed()
        .map(|([p, k, i, j], e)| {
            Slot::new(
                label("rbar-conj(r)", &[p + 1, k + 1, i, j]),
                Probe::ConjDiff(e.clone(), curv.get([p, k, i, j]).clone()),
            )
        })
        .collect();
    Ok(vec![
        residual::scan("connection.conjugate", "eq2.7", samples, conj_slots)?,
        conn.gamma.check_real(samples)?,
        residual::scan("tangent_curvature.real", "eq2.13", samples, r_slots)?,
        residual::scan("bundle_curvature.conjugate", "eq2.14", samples, curv_slots)?,
    ])
}

/// `∇g`, the covariant differential of the metric, should vanish.
pub fn check_metricity(
    metric: &MetricField,
    gamma: &GammaField,
    frame: &FrameField,
    samples: &SampleSet,
) -> Result<Residual> {
    let g = metric_tensor(metric);
    let conn = ConnectionTriple::tangent_only(gamma.clone());
    let dg = covariant_differential(&g, &conn, frame)?;
    let values = dg
        .indexed()
        .map(|(idx, e)| (label("nabla_g", &idx), e.clone()));
    Ok(residual::scan_values(
        "metricity",
        "def2.2",
        samples,
        values,
    )?)
}

/// The metric as a tensor of type `(0,0|0,0|0,2)`.
pub fn metric_tensor(metric: &MetricField) -> TensorField {
    let t = TensorType::new(0, 0, 0, 0, 0, 2).expect("rank 2");
    TensorField::from_fn(t, 1, |idx| metric.lower(idx[0], idx[1]).clone()).expect("rank 1")
}

#[cfg(test)]
mod tests;
