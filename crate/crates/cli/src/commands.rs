//! Command dispatch: each command assembles a [`Report`] from checks on a
//! validated [`Scenario`].

use gck_core::array::ExprArray;
use gck_core::bundles::{
    abelian_field_strength, bundle_curvature, check_gauge_covariance, check_orthonormal,
    check_theta, check_u1_real_part, connection_concordance, d_concordance, epsilon_identities,
    gauge_transform, hermitian_form, section_transform, su_algebra_check, transform_bundle,
    GaugeMap,
};
use gck_core::expr::{Evaluator, DIM};
use gck_core::geometry::{check_tangent_curvature, check_torsion_free, tangent_curvature, torsion};
use gck_core::residual::{self, Probe, Residual, Slot, TOL_CONSTANT};
use gck_core::tensor::{
    check_metricity, covariant_differential, potential_curvature, reality_check, tau_conjugate,
    ConnectionTriple, TensorField, TensorType,
};
use gck_core::{ChartPoint, ScalarExpr};
use thiserror::Error;

use crate::report::{Record, Report};
use crate::scenario::{block_name, Bundle, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Validate,
    Gamma,
    Torsion,
    Curvature,
    BundleCheck,
    GaugeApply,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Gamma => "gamma",
            Command::Torsion => "torsion",
            Command::Curvature => "curvature",
            Command::BundleCheck => "bundle-check",
            Command::GaugeApply => "gauge-apply",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("`{command}` needs {what}")]
    MissingBlock {
        command: &'static str,
        what: &'static str,
    },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: gck_core::Error,
    },
}

type Result<T> = std::result::Result<T, RunError>;

fn ctx<T>(context: &str, r: gck_core::Result<T>) -> Result<T> {
    r.map_err(|source| RunError::Core {
        context: context.to_string(),
        source,
    })
}

fn eval_ctx<T>(context: &str, r: std::result::Result<T, gck_core::expr::EvalError>) -> Result<T> {
    ctx(context, r.map_err(gck_core::Error::from))
}

/// Every equation and definition tag a full `report` covers.
pub const REQUIRED_TAGS: &[&str] = &[
    "eq1.2", "eq1.3", "eq1.4", "eq1.5", "eq1.6", "eq1.7", "eq1.8", "eq1.9", "eq1.10", "def1.1",
    "def1.2", "def1.3", "def1.4", "eq2.1", "eq2.2", "eq2.3", "eq2.4", "eq2.5", "eq2.6", "eq2.7",
    "eq2.8", "eq2.9", "eq2.10", "eq2.11", "eq2.12", "eq2.13", "eq2.14", "def2.1", "def2.2",
    "eq3.1", "eq3.2", "eq3.3", "eq3.4", "eq3.5", "eq3.6", "eq3.7", "eq3.8", "def3.1", "eq4.1",
    "eq4.2", "eq4.3", "eq4.4", "eq4.5", "eq4.6", "eq4.7", "eq4.8", "eq4.9", "def4.1", "eq5.1",
    "eq5.2", "eq5.3", "eq5.4", "eq5.5", "eq5.6", "eq5.7", "eq5.8", "eq5.9", "def5.1", "eps5.1",
    "eps5.2",
];

/// The scenario block a tag's checks depend on.
fn requirement(tag: &str) -> &'static str {
    match tag {
        "eq1.8" => "an [su2] or [su3] block",
        "eq2.1" | "eq2.5" | "eq2.11" | "eq2.12" | "eq2.14" | "def2.1" => "a bundle block",
        "eq1.2" | "eq1.5" | "def1.2" | "eq3.1" | "eq3.2" | "eq3.7" | "def3.1" => "a [u1] block",
        "eq1.3" | "eq1.6" | "eq1.9" | "def1.3" | "eq4.1" | "eq4.2" | "eq4.3" | "def4.1" => {
            "an [su2] block"
        }
        "eq1.4" | "eq1.7" | "eq1.10" | "def1.4" | "eq5.1" | "eq5.2" | "eq5.3" | "def5.1"
        | "eps5.1" | "eps5.2" => "an [su3] block",
        t if t.starts_with("eq3.") => "a [gauge.u1] block",
        t if t.starts_with("eq4.") => "a [gauge.su2] block",
        t if t.starts_with("eq5.") => "a [gauge.su3] block",
        _ => "a block this scenario does not provide",
    }
}

fn by_rank(q: usize, tags: [&'static str; 3]) -> &'static str {
    tags[q - 1]
}

/// A fixed smooth complex section used to probe the differential rules.
fn probe_section(q: usize) -> TensorField {
    TensorField::from_fn(TensorType::SECTION, q, |idx| {
        let j = idx[0];
        let next = ScalarExpr::var((j + 1) % DIM);
        let grow = (ScalarExpr::real(0.5) * ScalarExpr::var(j)).exp();
        let twist = ScalarExpr::one()
            + ScalarExpr::i() * ScalarExpr::real((j + 1) as f64 / 3.0) * next.sin();
        grow * twist
    })
    .expect("rank validated at load")
}

/// A fixed smooth complex scalar used by the Leibniz rule.
fn probe_scalar() -> ScalarExpr {
    ScalarExpr::one()
        + ScalarExpr::var(1)
        + ScalarExpr::i() * ScalarExpr::var(0) * ScalarExpr::var(2)
}

fn bundle_label(prefix: &str, bundle: &[usize], tangent: &[usize]) -> String {
    let parts: Vec<String> = bundle
        .iter()
        .map(|i| (i + 1).to_string())
        .chain(tangent.iter().map(|i| i.to_string()))
        .collect();
    format!("{prefix}[{}]", parts.join(","))
}

fn tangent_label(prefix: &str, idx: &[usize]) -> String {
    bundle_label(prefix, &[], idx)
}

struct Runner<'a> {
    s: &'a Scenario,
    report: Report,
}

impl<'a> Runner<'a> {
    fn record(&mut self, r: &Residual) {
        let rec = Record::from_residual(r, self.s.tolerance);
        self.report.push(rec);
    }

    fn record_as(&mut self, r: &Residual, tag: &str, prefix: &str) {
        let rec = Record::tagged(r, tag, self.s.tolerance).prefixed(prefix);
        self.report.push(rec);
    }

    fn push(&mut self, r: Record) {
        self.report.push(r);
    }

    fn geometry(&mut self) -> Result<()> {
        let s = self.s;
        let samples = &s.samples;

        // coframe duality, which is the linear independence of the frame
        let mut dual = Vec::new();
        for k in 0..DIM {
            for i in 0..DIM {
                let sum: ScalarExpr = (0..DIM)
                    .map(|x| s.frame.coframe(k, x) * s.frame.component(i, x))
                    .sum();
                let delta = if k == i { 1.0 } else { 0.0 };
                dual.push((
                    tangent_label("theta.Y-delta", &[k, i]),
                    sum - ScalarExpr::real(delta),
                ));
            }
        }
        let r = eval_ctx(
            "frame",
            residual::scan_values("frame.coframe", "def1.1", samples, dual),
        )?
        .with_tolerance(TOL_CONSTANT);
        self.record_as(&r, "def1.1,eq2.3", "");

        for r in ctx("structure constants", s.c.check(samples))? {
            self.record(&r);
        }
        let r = ctx("metric", s.metric.check_inverse(samples))?;
        self.record(&r);
        let r = ctx("lie derivative", lie_against_difference(s))?;
        self.record(&r);

        // the extended domain: ∇ of the inverse metric, type (0,0|0,0|2,0)
        let tangent = ConnectionTriple::tangent_only(s.gamma.clone());
        let upper = TensorType::new(0, 0, 0, 0, 2, 0).expect("rank 2");
        let ginv = TensorField::from_fn(upper, 1, |idx| s.metric.upper(idx[0], idx[1]).clone())
            .expect("rank 1");
        let d = ctx(
            "inverse metric",
            covariant_differential(&ginv, &tangent, &s.frame),
        )?;
        let values = d
            .indexed()
            .map(|(idx, e)| (tangent_label("nabla_ginv", &idx), e.clone()));
        let r = eval_ctx(
            "inverse metric",
            residual::scan_values("nabla.inverse_metric", "eq2.2", samples, values),
        )?;
        self.record(&r);

        let r = ctx(
            "metricity",
            check_metricity(&s.metric, &s.gamma, &s.frame, samples),
        )?;
        self.record_as(&r, "def2.2,eq2.9", "");
        let r = ctx("torsion", check_torsion_free(&s.gamma, &s.c, samples))?;
        self.record_as(&r, "def2.2,eq2.8", "");
        let r = ctx("gamma", s.gamma.check_real(samples))?;
        self.record(&r);
        let curv = tangent_curvature(&s.gamma, &s.frame, &s.c);
        for r in ctx("tangent curvature", check_tangent_curvature(&curv, samples))? {
            self.record(&r);
        }
        Ok(())
    }

    /// Reality relations, the differential rules and curvature symmetries
    /// of one bundle's connection.
    fn bundle_geometry(&mut self, b: &Bundle, prefix: &str) -> Result<()> {
        let s = self.s;
        let samples = &s.samples;
        let q = b.structure.q();
        let conn = &b.conn;
        let context = format!("[{}] connection", block_name(q));

        let reality = ctx(&context, reality_check(conn, &s.frame, &s.c))?;
        // gamma and tangent curvature reality are reported by the geometry pass
        for r in reality
            .iter()
            .filter(|r| matches!(r.tag, "eq2.7" | "eq2.14"))
        {
            if r.name != "gamma.real" {
                self.record_as(r, r.tag, prefix);
            }
        }

        let psi = probe_section(q);
        let dpsi = ctx(&context, covariant_differential(&psi, conn, &s.frame))?;

        let f = probe_scalar();
        let fpsi = TensorField::from_fn(TensorType::SECTION, q, |idx| &f * psi.get(idx))
            .expect("rank validated");
        let dfpsi = ctx(&context, covariant_differential(&fpsi, conn, &s.frame))?;
        let mut leibniz = Vec::new();
        for i in 0..q {
            for k in 0..DIM {
                let want = s.frame.lie(&f, k) * psi.get(&[i]) + &f * dpsi.get(&[i, k]);
                leibniz.push(Slot::new(
                    bundle_label("nabla(f.psi)", &[i], &[k]),
                    Probe::Diff(dfpsi.get(&[i, k]).clone(), want),
                ));
            }
        }
        let r = eval_ctx(
            &context,
            residual::scan("nabla.leibniz", "eq2.1", samples, leibniz),
        )?;
        self.record_as(&r, "eq2.1", prefix);

        let d_herm = ctx(
            &context,
            covariant_differential(b.structure.hermitian(), conn, &s.frame),
        )?;
        let norm = ctx(&context, hermitian_form(&b.structure, &psi, &psi))?;
        let mut product = Vec::new();
        for k in 0..DIM {
            let mut rhs = ScalarExpr::zero();
            for i in 0..q {
                for j in 0..q {
                    let dij = b.structure.hermitian_entry(i, j);
                    rhs = rhs
                        + d_herm.get(&[i, j, k]) * psi.get(&[j]).conj() * psi.get(&[i])
                        + dij * psi.get(&[j]).conj() * dpsi.get(&[i, k])
                        + dij * dpsi.get(&[j, k]).conj() * psi.get(&[i]);
                }
            }
            product.push(Slot::new(
                tangent_label("L(D(psi,psi))", &[k]),
                Probe::Diff(s.frame.lie(&norm, k), rhs),
            ));
        }
        let r = eval_ctx(
            &context,
            residual::scan("nabla.hermitian_product", "eq2.5", samples, product),
        )?;
        self.record_as(&r, "eq2.5", prefix);

        let tau_psi = tau_conjugate(&psi);
        let d_tau = ctx(&context, covariant_differential(&tau_psi, conn, &s.frame))?;
        let tau_d = tau_conjugate(&dpsi);
        let slots = d_tau
            .indexed()
            .map(|(idx, e)| {
                Slot::new(
                    bundle_label("nabla(tau.psi)-tau(nabla.psi)", &idx[..1], &idx[1..]),
                    Probe::Diff(e.clone(), tau_d.get(&idx).clone()),
                )
            })
            .collect();
        let r = eval_ctx(
            &context,
            residual::scan("nabla.conjugation", "def2.1", samples, slots),
        )?;
        self.record_as(&r, "def2.1", prefix);

        self.bundle_curvature_checks(b, prefix)
    }

    fn bundle_curvature_checks(&mut self, b: &Bundle, prefix: &str) -> Result<()> {
        let s = self.s;
        let samples = &s.samples;
        let q = b.structure.q();
        let context = format!("[{}] curvature", block_name(q));
        for (name, tag, potential) in [
            ("bundle_curvature.antisymmetric", "eq2.11", b.conn.a()),
            ("conj_curvature.antisymmetric", "eq2.12", b.conn.abar()),
        ] {
            let r = potential_curvature(potential, &s.frame, &s.c);
            let values = r
                .indexed()
                .filter(|([_, _, i, j], _)| i < j)
                .map(|([p, k, i, j], e)| {
                    (
                        bundle_label("r+r^T", &[p, k], &[i, j]),
                        e + r.get([p, k, j, i]),
                    )
                });
            let res = eval_ctx(&context, residual::scan_values(name, tag, samples, values))?;
            self.record_as(&res, tag, prefix);
        }
        if q == 1 {
            let general = bundle_curvature(&b.conn, &s.frame, &s.c);
            let collapsed = general.collapsed().expect("rank 1");
            let abelian = ctx(&context, abelian_field_strength(b.conn.a(), &s.frame, &s.c))?;
            let slots = collapsed
                .indexed()
                .map(|([i, j], e)| {
                    Slot::new(
                        tangent_label("r-r11", &[i, j]),
                        Probe::Diff(e.clone(), abelian.get([i, j]).clone()),
                    )
                })
                .collect();
            let res = eval_ctx(
                &context,
                residual::scan("field_strength", "eq3.7", samples, slots),
            )?;
            self.record_as(&res, "eq3.7,eq3.8", prefix);
        }
        Ok(())
    }

    /// Algebraic and concordance checks of one bundle.
    fn bundle_checks(&mut self, b: &Bundle, prefix: &str) -> Result<()> {
        let s = self.s;
        let samples = &s.samples;
        let st = &b.structure;
        let q = st.q();
        let context = format!("[{}] bundle", block_name(q));
        let unverified = "frame not declared orthonormal";

        let herm = st.hermitian();
        let tau = tau_conjugate(herm);
        let slots = tau
            .indexed()
            .map(|(idx, e)| {
                Slot::new(
                    bundle_label("tau(D)-D", &idx, &[]),
                    Probe::Diff(e.clone(), herm.get(&idx).clone()),
                )
            })
            .collect();
        let r = eval_ctx(
            &context,
            residual::scan("bundle.conjugation", "eq1.2", samples, slots),
        )?
        .with_tolerance(TOL_CONSTANT);
        self.record_as(&r, by_rank(q, ["eq1.2", "eq1.3", "eq1.4"]), prefix);

        let r = ctx(&context, st.check_hermitian(samples))?;
        self.record_as(&r, r.tag, prefix);

        if let Some(d) = st.skew() {
            let mut values = Vec::new();
            for (idx, e) in d.indexed() {
                for a in 0..q {
                    for c in a + 1..q {
                        let mut swapped = idx.clone();
                        swapped.swap(a, c);
                        values.push((
                            bundle_label(&format!("d+d^({},{})", a + 1, c + 1), &idx, &[]),
                            e + d.get(&swapped),
                        ));
                    }
                }
            }
            let r = eval_ctx(
                &context,
                residual::scan_values("bundle.skew_antisymmetric", "eq1.8", samples, values),
            )?
            .with_tolerance(TOL_CONSTANT);
            self.record_as(&r, "eq1.8", prefix);
        }

        let r = ctx(&context, check_orthonormal(st, samples))?;
        let rec = Record::tagged(&r, r.tag, s.tolerance).prefixed(prefix);
        self.push(if b.orthonormal {
            rec
        } else {
            rec.demote(unverified)
        });

        if q > 1 {
            let r = ctx(&context, d_concordance(st, samples))?;
            self.record_as(&r, r.tag, prefix);
        }

        let def = by_rank(q, ["def3.1", "def4.1", "def5.1"]);
        for r in ctx(&context, connection_concordance(st, &b.conn, &s.frame))? {
            self.record_as(&r, &format!("{},{def}", r.tag), prefix);
        }

        if q == 1 {
            let r = ctx(&context, check_u1_real_part(st, &b.conn, &s.frame))?;
            self.record_as(&r, r.tag, prefix);
        } else {
            for r in ctx(&context, su_algebra_check(&b.conn, samples))? {
                let rec = Record::tagged(&r, r.tag, s.tolerance).prefixed(prefix);
                self.push(if b.orthonormal {
                    rec
                } else {
                    rec.demote(unverified)
                });
            }
        }

        if q == 3 {
            for r in ctx(&context, epsilon_identities(st, samples))? {
                self.record_as(&r, r.tag, prefix);
            }
        }
        Ok(())
    }

    fn gauge_map_checks(&mut self, map: &GaugeMap, prefix: &str) -> Result<()> {
        let context = format!("[gauge.{}]", block_name(map.q()));
        for r in ctx(&context, map.check(&self.s.samples))? {
            self.record_as(&r, r.tag, prefix);
        }
        Ok(())
    }

    /// Applies a gauge map to its bundle and checks the transformation laws,
    /// then re-runs the bundle checks in the new frame.
    fn gauge_apply(&mut self, map: &GaugeMap) -> Result<()> {
        let s = self.s;
        let samples = &s.samples;
        let q = map.q();
        let block = block_name(q);
        let context = format!("[gauge.{block}]");
        let prefix = format!("{block}.");
        let Some(b) = s.bundle(q) else {
            return Err(RunError::MissingBlock {
                command: "gauge-apply",
                what: "a bundle block matching the gauge block",
            });
        };
        self.gauge_map_checks(map, &prefix)?;

        let r = ctx(&context, check_theta(map, &s.frame))?;
        self.record_as(&r, r.tag, &prefix);

        let conn = ctx(&context, gauge_transform(&b.conn, map, &s.frame))?;
        let mut conj = Vec::new();
        for k in 0..DIM {
            for i in 0..q {
                for j in 0..q {
                    conj.push(Slot::new(
                        bundle_label("Abar-conj(A)", &[i, j], &[k]),
                        Probe::ConjDiff(
                            conn.abar().get(k, i, j).clone(),
                            conn.a().get(k, i, j).clone(),
                        ),
                    ));
                }
            }
        }
        let transform_tag = by_rank(q, ["eq3.6", "eq4.7", "eq5.7"]);
        let r = eval_ctx(
            &context,
            residual::scan("gauge.transform.reality", transform_tag, samples, conj),
        )?;
        self.record_as(&r, transform_tag, &prefix);

        // transforming back with the inverse map must restore the input
        let inverse = match map.phase_angle() {
            Some(phi) => GaugeMap::phase(-phi, samples),
            None => GaugeMap::matrix(
                (0..q)
                    .map(|i| (0..q).map(|j| map.t(i, j).clone()).collect())
                    .collect(),
                samples,
            ),
        };
        let inverse = ctx(&context, inverse)?;
        let back = ctx(&context, gauge_transform(&conn, &inverse, &s.frame))?;
        let mut round = Vec::new();
        for k in 0..DIM {
            for i in 0..q {
                for j in 0..q {
                    round.push(Slot::new(
                        bundle_label("A''-A", &[i, j], &[k]),
                        Probe::Diff(
                            back.a().get(k, i, j).clone(),
                            b.conn.a().get(k, i, j).clone(),
                        ),
                    ));
                }
            }
        }
        let r = eval_ctx(
            &context,
            residual::scan("gauge.transform.roundtrip", transform_tag, samples, round),
        )?;
        self.record_as(&r, transform_tag, &prefix);

        let r = ctx(
            &context,
            check_gauge_covariance(&b.conn, map, &s.frame, &s.c),
        )?;
        self.record_as(&r, r.tag, &prefix);

        let structure = ctx(&context, transform_bundle(&b.structure, map, samples))?;
        let psi_tilde = probe_section(q);
        let psi = ctx(&context, section_transform(&psi_tilde, map))?;
        let before = ctx(
            &context,
            hermitian_form(&b.structure, &psi_tilde, &psi_tilde),
        )?;
        let after = ctx(&context, hermitian_form(&structure, &psi, &psi))?;
        let section_tag = by_rank(q, ["eq3.4", "eq4.5", "eq5.5"]);
        let r = eval_ctx(
            &context,
            residual::scan(
                "gauge.section.norm",
                section_tag,
                samples,
                vec![Slot::new(
                    "D(psi,psi)-D~(psi~,psi~)",
                    Probe::Diff(after, before),
                )],
            ),
        )?;
        self.record_as(&r, section_tag, &prefix);

        let d_new = ctx(&context, covariant_differential(&psi, &conn, &s.frame))?;
        let d_old = ctx(
            &context,
            covariant_differential(&psi_tilde, &b.conn, &s.frame),
        )?;
        let mut cov = Vec::new();
        for i in 0..q {
            for k in 0..DIM {
                let want: ScalarExpr = (0..q).map(|j| map.s(i, j) * d_old.get(&[j, k])).sum();
                cov.push(Slot::new(
                    bundle_label("nabla.psi-S.nabla~psi~", &[i], &[k]),
                    Probe::Diff(d_new.get(&[i, k]).clone(), want),
                ));
            }
        }
        let cov_tag = by_rank(q, ["eq3.5", "eq4.6", "eq5.6"]);
        let r = eval_ctx(
            &context,
            residual::scan("gauge.section.covariance", cov_tag, samples, cov),
        )?;
        self.record_as(&r, cov_tag, &prefix);

        let gauged = Bundle {
            structure,
            conn,
            orthonormal: b.orthonormal,
        };
        self.bundle_checks(&gauged, &format!("gauged.{block}."))
    }

    fn fill_coverage(&mut self) {
        let present: Vec<String> = self.report.tags().into_iter().map(str::to_string).collect();
        for tag in REQUIRED_TAGS {
            if !present.iter().any(|t| t == tag) {
                let note = format!("requires {}", requirement(tag));
                self.push(Record::skip("unavailable", *tag, note));
            }
        }
    }

    fn components_gamma(&mut self) {
        for ([k, i, j], e) in self.s.gamma.array().indexed() {
            self.report
                .component(tangent_label("Gamma", &[k, i, j]), e.to_string());
        }
    }

    fn components_torsion(&mut self) {
        let t = torsion(&self.s.gamma, &self.s.c);
        for ([k, i, j], e) in t.indexed() {
            self.report
                .component(tangent_label("T", &[k, i, j]), e.to_string());
        }
    }

    fn components_curvature(&mut self) {
        let s = self.s;
        let r = tangent_curvature(&s.gamma, &s.frame, &s.c);
        for (idx, e) in r.indexed() {
            self.report
                .component(tangent_label("R", &idx), e.to_string());
        }
        for b in &s.bundles {
            let q = b.structure.q();
            let block = block_name(q);
            let curv = bundle_curvature(&b.conn, &s.frame, &s.c);
            for ([p, k, i, j], e) in curv.array().indexed() {
                self.report.component(
                    bundle_label(&format!("r.{block}"), &[p, k], &[i, j]),
                    e.to_string(),
                );
            }
            if let Some(collapsed) = curv.collapsed() {
                emit_collapsed(&mut self.report, &collapsed);
            }
        }
    }
}

fn emit_collapsed(report: &mut Report, collapsed: &ExprArray<2>) {
    for ([i, j], e) in collapsed.indexed() {
        report.component(tangent_label("r.u1", &[i, j]), e.to_string());
    }
}

/// `L_k f` of a fixed test function against a central difference along the
/// frame vector, relative to `1 + |difference|`.
fn lie_against_difference(s: &Scenario) -> gck_core::Result<Residual> {
    const H: f64 = 1e-5;
    const TOLERANCE: f64 = 1e-6;
    let f = (ScalarExpr::var(0) + ScalarExpr::real(2.0) * ScalarExpr::var(1)).sin()
        * (ScalarExpr::real(0.3) * ScalarExpr::var(2)).exp()
        + ScalarExpr::var(3).powi(2);
    let lie: Vec<ScalarExpr> = (0..DIM).map(|k| s.frame.lie(&f, k)).collect();
    let mut slots = vec![0.0f64; DIM];
    let mut worst: Option<(ChartPoint, usize)> = None;
    let mut max = 0.0f64;
    for p in &s.samples {
        let mut ev = Evaluator::new(*p);
        for k in 0..DIM {
            let mut fwd = p.coords();
            let mut bwd = p.coords();
            for x in 0..DIM {
                let v = ev.eval(s.frame.component(k, x))?.re;
                fwd[x] += H * v;
                bwd[x] -= H * v;
            }
            let at = |c: [f64; DIM]| -> gck_core::Result<f64> {
                let pt = ChartPoint::new(c).expect("finite shift");
                Ok(f.eval(&pt)?.re)
            };
            let diff = (at(fwd)? - at(bwd)?) / (2.0 * H);
            let got = ev.eval(&lie[k])?;
            let r = (got.re - diff).hypot(got.im) / (1.0 + diff.abs());
            let r = if r.is_nan() { f64::INFINITY } else { r };
            slots[k] = slots[k].max(r);
            if r > max || worst.is_none() {
                max = max.max(r);
                worst = Some((*p, k));
            }
        }
    }
    Ok(Residual {
        name: "lie.derivative".into(),
        tag: "eq2.6",
        max,
        worst_point: worst.map(|(p, _)| p),
        worst_slot: worst.map(|(_, k)| tangent_label("L-fd", &[k])),
        slots: slots
            .into_iter()
            .enumerate()
            .map(|(k, v)| (tangent_label("L-fd", &[k]), v))
            .collect(),
        tolerance: TOLERANCE,
    })
}

fn header(cmd: Command, s: &Scenario) -> Vec<String> {
    let spec = &s.spec;
    let mut h = vec![
        format!("gck {}", cmd.name()),
        format!(
            "scenario {} seed={} samples={} signature={}",
            s.name,
            s.seed,
            s.samples.len(),
            s.metric.signature()
        ),
        format!("chart {}", spec.names.join(",")),
    ];
    for (text, _) in &spec.constraints {
        h.push(format!("require {text}"));
    }
    if let Some(t) = s.tolerance {
        h.push(format!("tolerance {t:e}"));
    }
    h
}

pub fn run_command(cmd: Command, s: &Scenario) -> Result<Report> {
    let header = header(cmd, s);
    let mut run = Runner {
        s,
        report: Report {
            header,
            ..Report::default()
        },
    };
    match cmd {
        Command::Validate => {
            run.geometry()?;
            for b in &s.bundles {
                let prefix = format!("{}.", block_name(b.structure.q()));
                run.bundle_geometry(b, &prefix)?;
                run.bundle_checks(b, &prefix)?;
            }
            for g in &s.gauges {
                run.gauge_map_checks(g, &format!("{}.", block_name(g.q())))?;
            }
        }
        Command::Gamma => {
            let r = ctx("gamma", s.gamma.check_real(&s.samples))?;
            run.record(&r);
            let r = ctx(
                "metricity",
                check_metricity(&s.metric, &s.gamma, &s.frame, &s.samples),
            )?;
            run.record_as(&r, "def2.2,eq2.9", "");
            run.components_gamma();
        }
        Command::Torsion => {
            let r = ctx("torsion", check_torsion_free(&s.gamma, &s.c, &s.samples))?;
            run.record_as(&r, "def2.2,eq2.8", "");
            run.components_torsion();
        }
        Command::Curvature => {
            let curv = tangent_curvature(&s.gamma, &s.frame, &s.c);
            for r in ctx(
                "tangent curvature",
                check_tangent_curvature(&curv, &s.samples),
            )? {
                run.record(&r);
            }
            for b in &s.bundles {
                let prefix = format!("{}.", block_name(b.structure.q()));
                run.bundle_curvature_checks(b, &prefix)?;
            }
            run.components_curvature();
        }
        Command::BundleCheck => {
            if s.bundles.is_empty() {
                return Err(RunError::MissingBlock {
                    command: "bundle-check",
                    what: "a [u1], [su2] or [su3] block",
                });
            }
            for b in &s.bundles {
                run.bundle_checks(b, &format!("{}.", block_name(b.structure.q())))?;
            }
        }
        Command::GaugeApply => {
            if s.gauges.is_empty() {
                return Err(RunError::MissingBlock {
                    command: "gauge-apply",
                    what: "a [gauge.u1], [gauge.su2] or [gauge.su3] block",
                });
            }
            for g in &s.gauges {
                run.gauge_apply(g)?;
            }
        }
        Command::Report => {
            run.geometry()?;
            for b in &s.bundles {
                let prefix = format!("{}.", block_name(b.structure.q()));
                run.bundle_geometry(b, &prefix)?;
                run.bundle_checks(b, &prefix)?;
            }
            for g in &s.gauges {
                run.gauge_apply(g)?;
            }
            run.fill_coverage();
            run.components_gamma();
            run.components_torsion();
            run.components_curvature();
        }
    }
    Ok(run.report)
}
