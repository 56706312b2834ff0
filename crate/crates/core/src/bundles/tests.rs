use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::expr::parse_expr;
use crate::geometry::{structure_constants, GammaField};
use crate::sampling::SampleBox;
use crate::tensor::reality_check;

fn p(s: &str) -> ScalarExpr {
    parse_expr(s).unwrap()
}

fn samples(n: usize) -> SampleSet {
    SampleSet::in_box(SampleBox::cube(-1.0, 1.0), n, 31)
}

fn mat(rows: &[&[&str]]) -> ExprMatrix {
    rows.iter()
        .map(|r| r.iter().map(|s| p(s)).collect())
        .collect()
}

fn section(entries: &[&str]) -> TensorField {
    TensorField::new(
        TensorType::SECTION,
        entries.len(),
        entries.iter().map(|s| p(s)).collect(),
    )
    .unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn smooth(rng: &mut ChaCha8Rng, scale: f64) -> ScalarExpr {
    let v = |rng: &mut ChaCha8Rng| ScalarExpr::var(rng.gen_range(0..4));
    ScalarExpr::real(scale * rng.gen_range(-1.0..1.0))
        * (ScalarExpr::real(rng.gen_range(-1.0..1.0)) * v(rng)
            + ScalarExpr::real(rng.gen_range(-1.0..1.0)))
        .sin()
        + ScalarExpr::real(scale * rng.gen_range(-0.5..0.5)) * v(rng) * v(rng)
}

fn complex_smooth(rng: &mut ChaCha8Rng, scale: f64) -> ScalarExpr {
    smooth(rng, scale) + ScalarExpr::i() * smooth(rng, scale)
}

/// Skew-Hermitian traceless `A_k` with smooth entries.
fn su_potential(rng: &mut ChaCha8Rng, q: usize) -> Potential {
    let raw: Vec<Vec<Vec<ScalarExpr>>> = (0..DIM)
        .map(|_| {
            (0..q)
                .map(|_| (0..q).map(|_| complex_smooth(rng, 0.5)).collect())
                .collect()
        })
        .collect();
    let n = ScalarExpr::real(q as f64);
    Potential::from_fn(q, |k, i, j| {
        let skew = &raw[k][i][j] - raw[k][j][i].conj();
        if i == j {
            let tr: ScalarExpr = (0..q).map(|a| &raw[k][a][a] - raw[k][a][a].conj()).sum();
            skew - tr / &n
        } else {
            skew
        }
    })
    .unwrap()
}

fn su2_block(alpha: &ScalarExpr, beta: &ScalarExpr, gamma: &ScalarExpr) -> ExprMatrix {
    let a = alpha.cos() * (ScalarExpr::i() * beta).exp();
    let b = alpha.sin() * (ScalarExpr::i() * gamma).exp();
    vec![vec![a.clone(), -b.conj()], vec![b, a.conj()]]
}

fn random_su2(rng: &mut ChaCha8Rng) -> ExprMatrix {
    su2_block(&smooth(rng, 1.0), &smooth(rng, 1.0), &smooth(rng, 1.0))
}

fn embed(block: &ExprMatrix, at: usize) -> ExprMatrix {
    let mut m = linalg::identity(3);
    for i in 0..2 {
        for j in 0..2 {
            m[at + i][at + j] = block[i][j].clone();
        }
    }
    m
}

fn random_su3(rng: &mut ChaCha8Rng) -> ExprMatrix {
    let u = embed(&random_su2(rng), 0);
    let v = embed(&random_su2(rng), 1);
    linalg::matmul(&u, &v)
}

fn random_gamma(rng: &mut ChaCha8Rng) -> GammaField {
    GammaField::from_fn(|_| smooth(rng, 0.3))
}

fn skewed_frame(s: SampleSet) -> FrameField {
    let v = [
        ["1", "0.2*sin(x1)", "0", "0.1*x2"],
        ["0", "1 + 0.3*x0^2", "0.2*cos(x3)", "0"],
        ["0.1*x3", "0", "exp(0.2*x1)", "0"],
        ["0", "0.1*x0*x2", "0", "1"],
    ]
    .map(|row| row.map(p));
    FrameField::new(v, s).unwrap()
}

#[test]
fn hermitian_form_examples() {
    let s = samples(20);
    let b = BundleStructure::orthonormal(2, &s).unwrap();
    let f = hermitian_form(&b, &section(&["1", "0"]), &section(&["0", "1"])).unwrap();
    assert!(f.is_zero());
    let f = hermitian_form(&b, &section(&["i", "0"]), &section(&["1", "0"])).unwrap();
    assert_eq!(f.as_constant(), Some(c(0.0, -1.0)));

    let d = mat(&[
        &["2 + x0^2", "0.3 + 0.2*i*x1"],
        &["0.3 - 0.2*i*x1", "1.5 + sin(x2)^2"],
    ]);
    let b = BundleStructure::su2(d, canonical_pair(), &s).unwrap();
    let x = section(&["x0 + i*x3", "cos(x1)"]);
    let y = section(&["2*i", "x2 - i"]);
    let xy = hermitian_form(&b, &x, &y).unwrap();
    let yx = hermitian_form(&b, &y, &x).unwrap();
    let r = residual::scan(
        "sym",
        "t",
        &s,
        vec![Slot::new("s", Probe::ConjDiff(xy, yx))],
    )
    .unwrap();
    assert!(r.passes(1e-14), "{}", r.max);

    assert!(matches!(
        hermitian_form(&b, &section(&["1"]), &y),
        Err(Error::RankMismatch { .. })
    ));
}

#[test]
fn structure_validation() {
    let s = samples(10);
    assert!(matches!(
        BundleStructure::su2(mat(&[&["1", "i"], &["i", "1"]]), canonical_pair(), &s),
        Err(Error::NonHermitian { .. })
    ));
    assert!(matches!(
        BundleStructure::su2(mat(&[&["1", "0"], &["0", "-1"]]), canonical_pair(), &s),
        Err(Error::NonpositiveHermitian { .. })
    ));
    assert!(matches!(
        BundleStructure::su2(linalg::identity(2), mat(&[&["0", "1"], &["1", "0"]]), &s),
        Err(Error::AsymmetricSkew { .. })
    ));
    assert!(matches!(
        BundleStructure::su3(linalg::identity(3), p("0"), &s),
        Err(Error::DegenerateSkew { .. })
    ));
    assert!(matches!(
        BundleStructure::su2(linalg::identity(3), canonical_pair(), &s),
        Err(Error::RankMismatch {
            expected: 2,
            found: 3
        })
    ));
    let b = BundleStructure::orthonormal(3, &s).unwrap();
    assert!(b.check_hermitian(&s).unwrap().passed());
}

#[test]
fn orthonormal_predicates() {
    let s = samples(10);
    assert!(
        check_orthonormal(&BundleStructure::orthonormal(2, &s).unwrap(), &s)
            .unwrap()
            .passes(0.0)
    );
    assert!(
        check_orthonormal(&BundleStructure::orthonormal(3, &s).unwrap(), &s)
            .unwrap()
            .passes(0.0)
    );
    let scaled = BundleStructure::u1(p("2"), &s).unwrap();
    let r = check_orthonormal(&scaled, &s).unwrap();
    assert!(!r.passed());
    assert_eq!(r.max, 1.0);
}

#[test]
fn inverse_skew_conventions() {
    let s = samples(5);
    let b = BundleStructure::orthonormal(2, &s).unwrap();
    let up = inverse_skew(&b).unwrap();
    let want = [[0.0, 1.0], [-1.0, 0.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(
                up.get(&[i, j]).eval(&s.points()[0]).unwrap(),
                c(want[i][j], 0.0)
            );
        }
    }
    for (d123, inv) in [("1", 1.0), ("2", 0.5)] {
        let b = BundleStructure::su3(linalg::identity(3), p(d123), &s).unwrap();
        let up = inverse_skew(&b).unwrap();
        assert_eq!(
            up.get(&[0, 1, 2]).eval(&s.points()[0]).unwrap(),
            c(inv, 0.0)
        );
        assert_eq!(
            up.get(&[2, 1, 0]).eval(&s.points()[0]).unwrap(),
            c(-inv, 0.0)
        );
    }
    assert!(inverse_skew(&BundleStructure::orthonormal(1, &s).unwrap()).is_err());
}

#[test]
fn skew_concordance_fixtures() {
    let s = samples(10);
    for q in [2, 3] {
        let b = BundleStructure::orthonormal(q, &s).unwrap();
        assert!(d_concordance(&b, &s).unwrap().passes(1e-12));
    }
    let twice = mat(&[&["2", "0"], &["0", "2"]]);
    let b = BundleStructure::su2(twice, canonical_pair(), &s).unwrap();
    let r = d_concordance(&b, &s).unwrap();
    assert_eq!(r.tag, "eq1.9");
    assert_eq!(r.slot("dDD-conj(d)[1,2]"), Some(3.0));
    assert_eq!(r.max, 3.0);
}

#[test]
fn orthonormal_su2_concordance_and_algebra() {
    let s = samples(30);
    let frame = skewed_frame(s.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in [2, 3] {
        let b = BundleStructure::orthonormal(q, &s).unwrap();
        let conn = ConnectionTriple::real(random_gamma(&mut rng), su_potential(&mut rng, q));
        for r in connection_concordance(&b, &conn, &frame).unwrap() {
            assert!(r.passes(1e-10), "{} {}", r.name, r.max);
        }
        for r in su_algebra_check(&conn, &s).unwrap() {
            assert!(r.passes(1e-12), "{} {}", r.name, r.max);
        }
    }
}

#[test]
fn u1_concordance_examples() {
    let s = samples(20);
    let frame = FrameField::coordinate(s.clone());
    let b = BundleStructure::orthonormal(1, &s).unwrap();
    let a = Potential::from_fn(1, |k, _, _| {
        if k == 2 {
            p("0.25*x1 + 3*i")
        } else {
            ScalarExpr::zero()
        }
    })
    .unwrap();
    let conn = ConnectionTriple::real(GammaField::zero(), a);
    let r = &connection_concordance(&b, &conn, &frame).unwrap()[0];
    assert_eq!(r.tag, "eq3.1");
    let want = s
        .iter()
        .map(|pt| 2.0 * 0.25 * pt.coord(1).abs())
        .fold(0.0, f64::max);
    assert!((r.max - want).abs() < 1e-14);

    let b = BundleStructure::u1(p("exp(2*x0)"), &s).unwrap();
    let a = Potential::from_fn(1, |k, _, _| {
        if k == 0 {
            p("1 + 0.7*i*x3")
        } else {
            ScalarExpr::zero()
        }
    })
    .unwrap();
    let conn = ConnectionTriple::real(GammaField::zero(), a);
    assert!(connection_concordance(&b, &conn, &frame).unwrap()[0].passes(1e-12));
    assert!(check_u1_real_part(&b, &conn, &frame).unwrap().passes(1e-12));
}

#[test]
fn u1_real_part_examples() {
    let s = samples(10);
    let frame = FrameField::coordinate(s.clone());
    let one = BundleStructure::orthonormal(1, &s).unwrap();
    for k in 0..DIM {
        assert!(u1_real_part(&one, &frame, k).unwrap().is_zero());
    }
    let b = BundleStructure::u1(p("exp(2*x0)"), &s).unwrap();
    let r0 = u1_real_part(&b, &frame, 0).unwrap();
    for pt in &s {
        assert!((r0.eval(pt).unwrap() - 1.0).norm() < 1e-14);
    }
    assert!(u1_real_part(&b, &frame, 1).unwrap().is_zero());
    assert!(u1_real_part(&BundleStructure::orthonormal(2, &s).unwrap(), &frame, 0).is_err());
}

fn constant_potential(q: usize, entries: &[(usize, &[&[&str]])]) -> Potential {
    let mut ms = vec![vec![vec![ScalarExpr::zero(); q]; q]; DIM];
    for (k, rows) in entries {
        ms[*k] = mat(rows);
    }
    Potential::from_matrices(q, &ms).unwrap()
}

#[test]
fn su_algebra_examples() {
    let s = samples(5);
    let pauli3 = constant_potential(2, &[(1, &[&["i", "0"], &["0", "-i"]])]);
    let conn = ConnectionTriple::real(GammaField::zero(), pauli3);
    assert!(su_algebra_check(&conn, &s)
        .unwrap()
        .iter()
        .all(|r| r.passes(0.0)));

    let trace = constant_potential(2, &[(1, &[&["i", "0"], &["0", "i"]])]);
    let res = su_algebra_check(&ConnectionTriple::real(GammaField::zero(), trace), &s).unwrap();
    assert!(res[0].passes(0.0));
    assert_eq!(res[1].slot("trA[1]"), Some(2.0));

    let pauli1 = constant_potential(2, &[(0, &[&["0", "i"], &["i", "0"]])]);
    let conn = ConnectionTriple::real(GammaField::zero(), pauli1);
    assert!(su_algebra_check(&conn, &s)
        .unwrap()
        .iter()
        .all(|r| r.passes(0.0)));
}

#[test]
fn concordance_detects_injected_violations_at_their_size() {
    let s = samples(30);
    let frame = skewed_frame(s.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for q in [2, 3] {
        let b = BundleStructure::orthonormal(q, &s).unwrap();
        let base = su_potential(&mut rng, q);
        let eps = 3e-3;
        // Hermitian defect in one entry, trace defect on the diagonal
        let hermitian = Potential::from_fn(q, |k, i, j| {
            let e = base.get(k, i, j).clone();
            if (k, i, j) == (1, 0, q - 1) {
                e + ScalarExpr::real(eps)
            } else {
                e
            }
        })
        .unwrap();
        let traced = Potential::from_fn(q, |k, i, j| {
            let e = base.get(k, i, j).clone();
            if (k, i, j) == (3, 1, 1) {
                e + ScalarExpr::constant(c(0.0, eps))
            } else {
                e
            }
        })
        .unwrap();
        for (a, skew_defect, trace_defect) in [(hermitian, eps, 0.0), (traced, 0.0, eps)] {
            let conn = ConnectionTriple::real(random_gamma(&mut rng), a);
            let conc = connection_concordance(&b, &conn, &frame).unwrap();
            let alg = su_algebra_check(&conn, &s).unwrap();
            assert!(
                (alg[0].max - skew_defect).abs() < 1e-10,
                "q={q} {}",
                alg[0].max
            );
            assert!(
                (alg[1].max - trace_defect).abs() < 1e-10,
                "q={q} {}",
                alg[1].max
            );
            // ∇D sees conj(A^i_kj) + A^j_ki, ∇d sees the trace
            assert!(
                (conc[0].max - skew_defect).abs() < 1e-10,
                "q={q} {}",
                conc[0].max
            );
            assert!(
                (conc[1].max - trace_defect).abs() < 1e-10,
                "q={q} {}",
                conc[1].max
            );
        }
    }
}

#[test]
fn epsilon_identity_examples() {
    let s = samples(5);
    for d123 in ["1", "2", "1 + 0.5*x1^2"] {
        let b = BundleStructure::su3(linalg::identity(3), p(d123), &s).unwrap();
        for r in epsilon_identities(&b, &s).unwrap() {
            assert!(r.passes(1e-12), "{d123} {} {}", r.name, r.max);
        }
    }
    let b = BundleStructure::orthonormal(3, &s).unwrap();
    let (d, up) = (b.skew().unwrap(), b.skew_upper().unwrap());
    let pt = &s.points()[0];
    let lhs: Complex64 = (0..3)
        .map(|k| (d.get(&[0, 1, k]) * up.get(&[0, 1, k])).eval(pt).unwrap())
        .sum();
    assert_eq!(lhs, c(1.0, 0.0));
    let lhs: Complex64 = (0..3)
        .map(|k| (d.get(&[1, 1, k]) * up.get(&[0, 2, k])).eval(pt).unwrap())
        .sum();
    assert_eq!(lhs, c(0.0, 0.0));
    let lhs: Complex64 = (0..3)
        .flat_map(|j| (0..3).map(move |k| (j, k)))
        .map(|(j, k)| (d.get(&[0, j, k]) * up.get(&[0, j, k])).eval(pt).unwrap())
        .sum();
    assert_eq!(lhs, c(2.0, 0.0));
    assert!(epsilon_identities(&BundleStructure::orthonormal(2, &s).unwrap(), &s).is_err());
}

#[test]
fn gauge_map_validation() {
    let s = samples(10);
    assert!(matches!(
        GaugeMap::matrix(mat(&[&["2", "0"], &["0", "0.5"]]), &s),
        Err(Error::NotUnitary { .. })
    ));
    assert!(matches!(
        GaugeMap::matrix(mat(&[&["i", "0"], &["0", "1"]]), &s),
        Err(Error::NotSpecial { .. })
    ));
    assert!(matches!(
        GaugeMap::matrix(mat(&[&["x0", "0"], &["0", "1"]]), &s),
        Err(Error::DegenerateMap { .. } | Error::NotUnitary { .. })
    ));
    assert!(matches!(
        GaugeMap::phase(p("i*x0"), &s),
        Err(Error::NotUnitary { .. })
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = GaugeMap::matrix(random_su3(&mut rng), &s).unwrap();
    for r in m.check(&s).unwrap() {
        assert!(r.passes(1e-12), "{} {}", r.name, r.max);
    }
}

#[test]
fn gauge_transform_examples() {
    let s = samples(10);
    let frame = FrameField::coordinate(s.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let conn = ConnectionTriple::real(random_gamma(&mut rng), su_potential(&mut rng, 2));
    let same = gauge_transform(&conn, &GaugeMap::identity(2).unwrap(), &frame).unwrap();
    for pt in &s {
        for ([k, i, j], e) in same.a().array().indexed() {
            assert_eq!(e.eval(pt).unwrap(), conn.a().get(k, i, j).eval(pt).unwrap());
        }
    }

    let phase = GaugeMap::phase(p("x0"), &s).unwrap();
    let zero = ConnectionTriple::real(GammaField::zero(), Potential::zero(1).unwrap());
    let a = gauge_transform(&zero, &phase, &frame).unwrap();
    assert_eq!(a.a().get(0, 0, 0).as_constant(), Some(c(0.0, -1.0)));
    for k in 1..DIM {
        assert!(a.a().get(k, 0, 0).is_zero());
    }
    assert_eq!(a.abar().get(0, 0, 0).as_constant(), Some(c(0.0, 1.0)));

    // constant map: plain matrix conjugation
    let smat = su2_block(&p("0.4"), &p("1.1"), &p("-0.3"));
    let map = GaugeMap::matrix(smat.clone(), &s).unwrap();
    let theta = theta_params(&map, &frame);
    assert!(theta.is_identically_zero());
    let out = gauge_transform(&conn, &map, &frame).unwrap();
    for pt in &s {
        let mut ev = Evaluator::new(*pt);
        let sv = linalg::eval_matrix(&mut ev, &smat).unwrap();
        let sinv = sv.clone().try_inverse().unwrap();
        for k in 0..DIM {
            let ak = linalg::eval_matrix(&mut ev, &conn.a().matrix(k)).unwrap();
            let want = &sv * ak * &sinv;
            let got = linalg::eval_matrix(&mut ev, &out.a().matrix(k)).unwrap();
            assert!((got - want).iter().all(|z| z.norm() < 1e-13));
        }
    }
    assert!(gauge_transform(&zero, &map, &frame).is_err());
}

#[test]
fn theta_examples() {
    let s = samples(10);
    let frame = FrameField::coordinate(s.clone());
    let map = GaugeMap::matrix(mat(&[&["exp(i*x0)", "0"], &["0", "exp(-i*x0)"]]), &s).unwrap();
    let theta = theta_params(&map, &frame);
    for pt in &s {
        for ([k, i, j], e) in theta.array().indexed() {
            let want = match (k, i, j) {
                (0, 0, 0) => c(0.0, -1.0),
                (0, 1, 1) => c(0.0, 1.0),
                _ => c(0.0, 0.0),
            };
            assert!(
                (e.eval(pt).unwrap() - want).norm() < 1e-14,
                "theta[{k},{i},{j}]"
            );
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let skewed = skewed_frame(s.clone());
    for m in [random_su2(&mut rng), random_su3(&mut rng)] {
        let map = GaugeMap::matrix(m, &s).unwrap();
        assert!(check_theta(&map, &skewed).unwrap().passes(1e-10));
    }
}

#[test]
fn section_transform_examples() {
    let s = samples(20);
    let psi = section(&["x0 + i", "2*x1"]);
    let same = section_transform(&psi, &GaugeMap::identity(2).unwrap()).unwrap();
    for pt in &s {
        for (a, b) in same.components().iter().zip(psi.components()) {
            assert_eq!(a.eval(pt).unwrap(), b.eval(pt).unwrap());
        }
    }
    let quarter = GaugeMap::phase(p("pi/2"), &s).unwrap();
    let out = section_transform(&section(&["1"]), &quarter).unwrap();
    assert!((out.get(&[0]).eval(&s.points()[0]).unwrap() - c(0.0, 1.0)).norm() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let map = GaugeMap::matrix(random_su2(&mut rng), &s).unwrap();
    let b = BundleStructure::orthonormal(2, &s).unwrap();
    let psi = section(&["x0 + i*sin(x2)", "exp(x1) - 2*i"]);
    let moved = section_transform(&psi, &map).unwrap();
    let r = residual::scan(
        "unitary",
        "t",
        &s,
        vec![Slot::new(
            "n",
            Probe::Diff(
                hermitian_form(&b, &moved, &moved).unwrap(),
                hermitian_form(&b, &psi, &psi).unwrap(),
            ),
        )],
    )
    .unwrap();
    assert!(r.passes(1e-12), "{}", r.max);
}

#[test]
fn curvature_examples() {
    let s = samples(10);
    let frame = FrameField::coordinate(s.clone());
    let c0 = structure_constants(&frame);
    let zero = ConnectionTriple::real(GammaField::zero(), Potential::zero(2).unwrap());
    assert!(bundle_curvature(&zero, &frame, &c0)
        .array()
        .indexed()
        .all(|(_, e)| e.is_zero()));

    let a = Potential::from_fn(1, |k, _, _| {
        if k == 3 {
            p("i*x1")
        } else {
            ScalarExpr::zero()
        }
    })
    .unwrap();
    let conn = ConnectionTriple::real(GammaField::zero(), a.clone());
    let full = bundle_curvature(&conn, &frame, &c0).collapsed().unwrap();
    let direct = abelian_field_strength(&a, &frame, &c0).unwrap();
    for r in [&full, &direct] {
        for ([i, j], e) in r.indexed() {
            let want = match (i, j) {
                (1, 3) => c(0.0, 1.0),
                (3, 1) => c(0.0, -1.0),
                _ => c(0.0, 0.0),
            };
            assert_eq!(e.eval(&s.points()[0]).unwrap(), want, "r[{i},{j}]");
        }
    }

    let pa = constant_potential(
        2,
        &[
            (1, &[&["0", "i"], &["i", "0"]]),
            (2, &[&["0", "1"], &["-1", "0"]]),
        ],
    );
    let conn = ConnectionTriple::real(GammaField::zero(), pa);
    let r = bundle_curvature(&conn, &frame, &c0);
    let want = [[c(0.0, -2.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 2.0)]];
    for pp in 0..2 {
        for k in 0..2 {
            assert_eq!(
                r.get(pp, k, 1, 2).as_constant(),
                Some(want[pp][k]),
                "[{pp},{k}]"
            );
            assert_eq!(r.get(pp, k, 2, 1).as_constant(), Some(-want[pp][k]));
        }
    }
}

#[test]
fn field_strength_is_gauge_covariant() {
    let s = samples(20);
    let frame = skewed_frame(s.clone());
    let c = structure_constants(&frame);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for q in [2, 3] {
        let m = if q == 2 {
            random_su2(&mut rng)
        } else {
            random_su3(&mut rng)
        };
        let map = GaugeMap::matrix(m, &s).unwrap();
        let conn = ConnectionTriple::real(random_gamma(&mut rng), su_potential(&mut rng, q));
        let r = check_gauge_covariance(&conn, &map, &frame, &c).unwrap();
        assert!(r.passed(), "q={q} {}", r.max);

        let moved = gauge_transform(&conn, &map, &frame).unwrap();
        for r in reality_check(&moved, &frame, &c).unwrap() {
            assert!(r.passes(1e-9), "{} {}", r.name, r.max);
        }
        for r in su_algebra_check(&moved, &s).unwrap() {
            assert!(r.passes(1e-9), "{} {}", r.name, r.max);
        }
        let b = transform_bundle(&BundleStructure::orthonormal(q, &s).unwrap(), &map, &s).unwrap();
        assert!(check_orthonormal(&b, &s).unwrap().passes(1e-10));
        for r in connection_concordance(&b, &moved, &frame).unwrap() {
            assert!(r.passes(1e-9), "{} {}", r.name, r.max);
        }
    }
}

#[test]
fn abelian_field_strength_is_invariant() {
    let s = samples(30);
    let frame = skewed_frame(s.clone());
    let c = structure_constants(&frame);
    let map = GaugeMap::phase(p("sin(x0*x1) + 0.3*x2^2 - x3"), &s).unwrap();
    let a = Potential::from_fn(1, |k, _, _| {
        ScalarExpr::i() * p(["x1*x2", "sin(x3)", "x0^2", "cos(x1)"][k])
    })
    .unwrap();
    let conn = ConnectionTriple::real(GammaField::zero(), a);
    let r = check_gauge_covariance(&conn, &map, &frame, &c).unwrap();
    assert_eq!(r.tag, "eq3.8");
    assert!(r.passes(1e-10), "{}", r.max);
    let moved = gauge_transform(&conn, &map, &frame).unwrap();
    assert!(reality_check(&moved, &frame, &c).unwrap()[0].passes(1e-12));
}
