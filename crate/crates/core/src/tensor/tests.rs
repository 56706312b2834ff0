use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::expr::{parse_expr, ChartPoint, Evaluator};
use crate::geometry::{christoffel, structure_constants, Signature};
use crate::sampling::SampleBox;

fn p(s: &str) -> ScalarExpr {
    parse_expr(s).unwrap()
}

fn samples(n: usize) -> SampleSet {
    SampleSet::in_box(SampleBox::cube(-1.0, 1.0), n, 21)
}

fn random_expr(rng: &mut ChaCha8Rng, complex: bool, scale: f64) -> ScalarExpr {
    let var = |rng: &mut ChaCha8Rng| ScalarExpr::var(rng.gen_range(0..4));
    let a = ScalarExpr::real(scale * rng.gen_range(-1.0..1.0));
    let b = ScalarExpr::real(rng.gen_range(-1.5..1.5));
    let re = a * (b * var(rng) + ScalarExpr::real(rng.gen_range(-1.0..1.0))).sin()
        + ScalarExpr::real(scale * rng.gen_range(-1.0..1.0)) * var(rng) * var(rng);
    if complex {
        let im = ScalarExpr::real(scale * rng.gen_range(-1.0..1.0))
            * (ScalarExpr::real(rng.gen_range(-1.0..1.0)) * var(rng)).cos();
        re + ScalarExpr::i() * im
    } else {
        re
    }
}

fn random_field(rng: &mut ChaCha8Rng, ttype: TensorType, q: usize) -> TensorField {
    TensorField::from_fn(ttype, q, |_| random_expr(rng, true, 1.0)).unwrap()
}

fn random_frame(rng: &mut ChaCha8Rng, s: SampleSet) -> FrameField {
    let v = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let wobble = random_expr(rng, false, 0.15);
            if i == j {
                ScalarExpr::one() + wobble
            } else {
                wobble
            }
        })
    });
    FrameField::new(v, s).unwrap()
}

fn random_gamma(rng: &mut ChaCha8Rng) -> GammaField {
    GammaField::from_fn(|_| random_expr(rng, false, 0.3))
}

fn random_potential(rng: &mut ChaCha8Rng, q: usize) -> Potential {
    Potential::from_fn(q, |_, _, _| random_expr(rng, true, 0.3)).unwrap()
}

fn ty(t: [usize; 6]) -> TensorType {
    TensorType::new(t[0], t[1], t[2], t[3], t[4], t[5]).unwrap()
}

#[test]
fn type_bookkeeping() {
    let t = ty([1, 2, 0, 1, 1, 0]);
    assert_eq!(t.rank(), 5);
    assert_eq!(t.to_string(), "(1,2|0,1|1,0)");
    assert_eq!(t.conjugated(), ty([0, 1, 1, 2, 1, 0]));
    assert_eq!(t.differentiated().unwrap(), ty([1, 2, 0, 1, 1, 1]));
    assert_eq!(t.dims(3), vec![3, 3, 3, 3, 4]);
    assert!(matches!(
        TensorType::new(2, 2, 2, 2, 1, 0),
        Err(Error::RankTooLarge(9))
    ));
    assert!(matches!(
        ty([2, 2, 2, 2, 0, 0]).differentiated(),
        Err(Error::RankTooLarge(9))
    ));
    assert!(TensorField::new(t, 2, vec![ScalarExpr::zero(); 3]).is_err());
    assert!(matches!(
        TensorField::scalar(4, p("1")),
        Err(Error::UnsupportedRank(4))
    ));
}

#[test]
fn tau_examples() {
    let s = samples(10);
    let real = TensorField::from_fn(ty([0, 0, 0, 0, 1, 1]), 1, |idx| {
        ScalarExpr::real((idx[0] * 4 + idx[1]) as f64) * ScalarExpr::var(idx[0])
    })
    .unwrap();
    let t = tau_conjugate(&real);
    assert_eq!(t.ttype(), real.ttype());
    for (a, b) in t.components().iter().zip(real.components()) {
        for pt in &s {
            assert_eq!(a.eval(pt).unwrap(), b.eval(pt).unwrap());
        }
    }

    let psi = TensorField::new(TensorType::SECTION, 1, vec![ScalarExpr::i()]).unwrap();
    let t = tau_conjugate(&psi);
    assert_eq!(t.ttype(), ty([0, 0, 1, 0, 0, 0]));
    assert_eq!(
        t.components()[0].as_constant(),
        Some(Complex64::new(0.0, -1.0))
    );

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_field(&mut rng, ty([1, 2, 1, 0, 1, 0]), 2);
    let tx = tau_conjugate(&x);
    // group exchange: τ(x)[c, b, b', t] = conj x[b, b', c, t]
    for pt in &s {
        let mut ev = Evaluator::new(*pt);
        for (idx, e) in tx.indexed() {
            let old = [idx[1], idx[2], idx[3], idx[0], idx[4]];
            assert_eq!(ev.eval(e).unwrap(), ev.eval(x.get(&old)).unwrap().conj());
        }
    }
    let back = tau_conjugate(&tx);
    assert_eq!(back.ttype(), x.ttype());
    for pt in &s {
        for (a, b) in back.components().iter().zip(x.components()) {
            assert_eq!(a.eval(pt).unwrap(), b.eval(pt).unwrap());
        }
    }
}

#[test]
fn scalar_and_flat_section_differentials() {
    let s = samples(10);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let frame = random_frame(&mut rng, s.clone());
    let conn = ConnectionTriple::real(random_gamma(&mut rng), random_potential(&mut rng, 2));
    let f = p("x0*sin(x1) + i*x2^2");
    let df =
        covariant_differential(&TensorField::scalar(2, f.clone()).unwrap(), &conn, &frame).unwrap();
    assert_eq!(df.ttype(), ty([0, 0, 0, 0, 0, 1]));
    for k in 0..DIM {
        let want = frame.lie(&f, k);
        for pt in &s {
            assert_eq!(df.get(&[k]).eval(pt).unwrap(), want.eval(pt).unwrap());
        }
    }

    let coord = FrameField::coordinate(s.clone());
    let flat = ConnectionTriple::tangent_only(GammaField::zero());
    let psi = TensorField::new(TensorType::SECTION, 1, vec![f.clone()]).unwrap();
    let dpsi = covariant_differential(&psi, &flat, &coord).unwrap();
    for k in 0..DIM {
        for pt in &s {
            assert_eq!(
                dpsi.get(&[0, k]).eval(pt).unwrap(),
                f.diff(k).eval(pt).unwrap()
            );
        }
    }
}

#[test]
fn rank_mismatch_only_for_bundle_slots() {
    let s = samples(3);
    let frame = FrameField::coordinate(s);
    let conn = ConnectionTriple::real(GammaField::zero(), Potential::zero(2).unwrap());
    let psi = TensorField::new(TensorType::SECTION, 3, vec![ScalarExpr::zero(); 3]).unwrap();
    assert!(matches!(
        covariant_differential(&psi, &conn, &frame),
        Err(Error::RankMismatch {
            expected: 2,
            found: 3
        })
    ));
    let v = TensorField::new(ty([0, 0, 0, 0, 1, 0]), 3, vec![ScalarExpr::zero(); 4]).unwrap();
    assert!(covariant_differential(&v, &conn, &frame).is_ok());
    assert!(ConnectionTriple::new(
        GammaField::zero(),
        Potential::zero(2).unwrap(),
        Potential::zero(3).unwrap()
    )
    .is_err());
}

/// Independent assembly of `∇_k X` for a type `(1,1|1,1|1,1)` field, one
/// explicit loop per correction term, evaluated numerically.
fn brute_force_111111(
    x: &TensorField,
    conn: &ConnectionTriple,
    frame: &FrameField,
    pt: &ChartPoint,
    [a, b, c, d, m, n, k]: [usize; 7],
) -> Complex64 {
    let q = x.q();
    let ev = |e: &ScalarExpr| e.eval(pt).unwrap();
    let xv =
        |a: usize, b: usize, c: usize, d: usize, m: usize, n: usize| ev(x.get(&[a, b, c, d, m, n]));
    let mut lie = Complex64::new(0.0, 0.0);
    for s in 0..DIM {
        lie += ev(frame.component(k, s)) * ev(&x.get(&[a, b, c, d, m, n]).diff(s));
    }
    let mut total = lie;
    // sign table: bundle up +, bundle down -, conj up +, conj down -, tangent up +, tangent down -
    for v in 0..q {
        total += ev(conn.a().get(k, a, v)) * xv(v, b, c, d, m, n);
    }
    for v in 0..q {
        total -= ev(conn.a().get(k, v, b)) * xv(a, v, c, d, m, n);
    }
    for v in 0..q {
        total += ev(conn.abar().get(k, c, v)) * xv(a, b, v, d, m, n);
    }
    for v in 0..q {
        total -= ev(conn.abar().get(k, v, d)) * xv(a, b, c, v, m, n);
    }
    for v in 0..DIM {
        total += ev(conn.gamma().get(m, k, v)) * xv(a, b, c, d, v, n);
    }
    for v in 0..DIM {
        total -= ev(conn.gamma().get(v, k, n)) * xv(a, b, c, d, m, v);
    }
    total
}

#[test]
fn differential_matches_term_by_term_assembly() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = samples(20);
    for q in [1, 2] {
        let frame = random_frame(&mut rng, s.clone());
        let conn = ConnectionTriple::new(
            random_gamma(&mut rng),
            random_potential(&mut rng, q),
            random_potential(&mut rng, q),
        )
        .unwrap();
        let x = random_field(&mut rng, ty([1, 1, 1, 1, 1, 1]), q);
        let dx = covariant_differential(&x, &conn, &frame).unwrap();
        assert_eq!(dx.ttype(), ty([1, 1, 1, 1, 1, 2]));
        for pt in &s {
            let mut ev = Evaluator::new(*pt);
            for (idx, e) in dx.indexed() {
                let got = ev.eval(e).unwrap();
                let idx: [usize; 7] = idx.try_into().unwrap();
                let want = brute_force_111111(&x, &conn, &frame, pt, idx);
                let rel = (got - want).norm() / want.norm().max(1e-300);
                assert!(rel < 1e-12, "{idx:?}: {got} vs {want}");
            }
        }
    }
}

/// Outer product with each slot group laid out as `x` indices then `y` indices.
fn tensor_product(x: &TensorField, y: &TensorField) -> TensorField {
    let (tx, ty_) = (x.ttype(), y.ttype());
    let t = TensorType::new(
        tx.bundle_upper + ty_.bundle_upper,
        tx.bundle_lower + ty_.bundle_lower,
        tx.conj_upper + ty_.conj_upper,
        tx.conj_lower + ty_.conj_lower,
        tx.tangent_upper + ty_.tangent_upper,
        tx.tangent_lower + ty_.tangent_lower,
    )
    .unwrap();
    TensorField::from_fn(t, x.q(), |idx| {
        let (a, b) = split_product(tx, ty_, idx);
        x.get(&a) * y.get(&b)
    })
    .unwrap()
}

fn group_sizes(t: TensorType) -> [usize; 6] {
    [
        t.bundle_upper,
        t.bundle_lower,
        t.conj_upper,
        t.conj_lower,
        t.tangent_upper,
        t.tangent_lower,
    ]
}

fn split_product(tx: TensorType, ty_: TensorType, idx: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let mut pos = 0;
    for (nx, ny) in group_sizes(tx).into_iter().zip(group_sizes(ty_)) {
        a.extend_from_slice(&idx[pos..pos + nx]);
        b.extend_from_slice(&idx[pos + nx..pos + nx + ny]);
        pos += nx + ny;
    }
    (a, b)
}

#[test]
fn leibniz_rule_over_tensor_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = samples(8);
    let frame = random_frame(&mut rng, s.clone());
    let conn = ConnectionTriple::new(
        random_gamma(&mut rng),
        random_potential(&mut rng, 2),
        random_potential(&mut rng, 2),
    )
    .unwrap();
    let cases = [
        (ty([1, 0, 0, 0, 0, 0]), ty([0, 1, 0, 0, 1, 0])),
        (ty([0, 0, 1, 1, 0, 1]), ty([1, 0, 0, 1, 0, 1])),
    ];
    for (tx, ty_) in cases {
        let x = random_field(&mut rng, tx, 2);
        let y = random_field(&mut rng, ty_, 2);
        let lhs = covariant_differential(&tensor_product(&x, &y), &conn, &frame).unwrap();
        let dx = covariant_differential(&x, &conn, &frame).unwrap();
        let dy = covariant_differential(&y, &conn, &frame).unwrap();
        for pt in &s {
            let mut ev = Evaluator::new(*pt);
            for (idx, e) in lhs.indexed() {
                let (body, k) = idx.split_at(idx.len() - 1);
                let (a, b) = split_product(tx, ty_, body);
                let with_k = |v: &[usize]| [v, k].concat();
                let want = ev.eval(dx.get(&with_k(&a))).unwrap() * ev.eval(y.get(&b)).unwrap()
                    + ev.eval(x.get(&a)).unwrap() * ev.eval(dy.get(&with_k(&b))).unwrap();
                let got = ev.eval(e).unwrap();
                assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()), "{idx:?}");
            }
        }
    }
}

#[test]
fn differential_commutes_with_conjugation_for_real_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let s = samples(8);
    let frame = random_frame(&mut rng, s.clone());
    let conn = ConnectionTriple::real(random_gamma(&mut rng), random_potential(&mut rng, 3));
    let x = random_field(&mut rng, ty([1, 0, 0, 1, 1, 0]), 3);
    let lhs = tau_conjugate(&covariant_differential(&x, &conn, &frame).unwrap());
    let rhs = covariant_differential(&tau_conjugate(&x), &conn, &frame).unwrap();
    assert_eq!(lhs.ttype(), rhs.ttype());
    for pt in &s {
        let mut ev = Evaluator::new(*pt);
        for (a, b) in lhs.components().iter().zip(rhs.components()) {
            let (a, b) = (ev.eval(a).unwrap(), ev.eval(b).unwrap());
            assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
        }
    }
}

#[test]
fn reality_of_random_real_connections() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let s = samples(20);
    for q in 1..=3 {
        let frame = random_frame(&mut rng, s.clone());
        let c = structure_constants(&frame);
        let conn = ConnectionTriple::real(random_gamma(&mut rng), random_potential(&mut rng, q));
        for r in reality_check(&conn, &frame, &c).unwrap() {
            assert!(r.passes(1e-10), "q={q} {} {}", r.name, r.max);
        }
    }
}

#[test]
fn injected_conjugation_defect_is_measured() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let s = samples(10);
    let frame = random_frame(&mut rng, s);
    let c = structure_constants(&frame);
    let a = random_potential(&mut rng, 2);
    let delta = Complex64::new(0.003, -0.004);
    let abar = Potential::from_fn(2, |k, i, j| {
        let base = a.get(k, i, j).conj();
        if (k, i, j) == (2, 0, 1) {
            base + ScalarExpr::constant(delta)
        } else {
            base
        }
    })
    .unwrap();
    let conn = ConnectionTriple::new(random_gamma(&mut rng), a, abar).unwrap();
    let res = reality_check(&conn, &frame, &c).unwrap();
    assert_eq!(res[0].name, "connection.conjugate");
    assert!((res[0].max - delta.norm()).abs() < 1e-12, "{}", res[0].max);
    assert_eq!(res[0].worst_slot.as_deref(), Some("Abar-conj(A)[2,1,2]"));
    assert!(res[1].passes(1e-12) && res[2].passes(1e-9));
    assert!(!res[3].passes(1e-6));
}

#[test]
fn metricity_of_the_metric_connection() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let s = samples(30);
    let frame = random_frame(&mut rng, s.clone());
    let c = structure_constants(&frame);
    let g = MetricField::from_upper(
        |i, j| {
            let base = match (i, j) {
                (0, 0) => 2.0,
                (a, b) if a == b => -2.0,
                _ => 0.0,
            };
            ScalarExpr::real(base)
                + random_expr(
                    &mut ChaCha8Rng::seed_from_u64((i * 4 + j) as u64),
                    false,
                    0.2,
                )
        },
        &s,
        Signature::LORENTZ,
    )
    .unwrap();
    let gamma = christoffel(&g, &frame, &c);
    assert!(check_metricity(&g, &gamma, &frame, &s)
        .unwrap()
        .passes(1e-10));
    // an unrelated connection is not metric
    assert!(!check_metricity(&g, &random_gamma(&mut rng), &frame, &s)
        .unwrap()
        .passes(1e-3));
}
