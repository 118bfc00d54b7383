use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use super::*;
use crate::geometry::MetricField;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn line() -> ChartManifold {
    ChartManifold::euclidean(1)
}

fn example2() -> (SmoothSubmersionMap, DilationField) {
    let metric = MetricField::new(2, |x| Ok(Matrix::identity(2, 2) * (2.0 * x[1]).exp()))
        .with_partials(|x| Ok(vec![Matrix::zeros(2, 2), Matrix::identity(2, 2) * (2.0 * (2.0 * x[1]).exp())]));
    let total = ChartManifold::new("example2", metric).unwrap();
    let f = ScalarField::new("F", |x| Ok((x[0] + x[1]) * SQRT_HALF)).with_partials(|_| Ok(v(&[SQRT_HALF, SQRT_HALF])));
    let u = VectorField::new("U", |x| Ok(v(&[1.0, -1.0]) * (-x[1]).exp()));
    let h = VectorField::constant("Xb", v(&[SQRT_HALF, SQRT_HALF]));
    let map = SmoothSubmersionMap::new(total, line(), vec![f], vec![u], vec![h]).unwrap();
    let lambda = ScalarField::new("lambda", |x| Ok((-x[1]).exp())).with_partials(|x| Ok(v(&[0.0, -(-x[1]).exp()])));
    (map, DilationField::analytic(lambda))
}

struct Warp {
    map: SmoothSubmersionMap,
    dilation: DilationField,
    log_f1: ScalarField,
    log_lam: ScalarField,
}

/// `g = lam(q)² (dx1² + dx2²) + f1(p)² (dx3² + dx4²)` projected onto `(x1, x2)`.
fn doubly_warped(f1_amp: f64, lam_amp: f64) -> Warp {
    let f1 = move |x: &Vector| 2.0 + f1_amp * (x[0].sin() + 0.3 * x[1] * x[1]);
    let df1 = move |x: &Vector| v(&[f1_amp * x[0].cos(), f1_amp * 0.6 * x[1], 0.0, 0.0]);
    let lam = move |x: &Vector| 1.0 + lam_amp * (0.2 * x[2].cos() + 0.1 * x[3] * x[3]);
    let dlam = move |x: &Vector| v(&[0.0, 0.0, -lam_amp * 0.2 * x[2].sin(), lam_amp * 0.2 * x[3]]);
    let metric = MetricField::new(4, move |x| {
        let (a, b) = (lam(x).powi(2), f1(x).powi(2));
        Ok(Matrix::from_diagonal(&v(&[a, a, b, b])))
    })
    .with_partials(move |x| {
        let (l, d_l) = (lam(x), dlam(x));
        let (r, d_r) = (f1(x), df1(x));
        Ok((0..4)
            .map(|k| {
                let a = 2.0 * l * d_l[k];
                let b = 2.0 * r * d_r[k];
                Matrix::from_diagonal(&v(&[a, a, b, b]))
            })
            .collect())
    });
    let total = ChartManifold::new("warped", metric).unwrap();
    let comps = vec![
        ScalarField::new("x1", |x| Ok(x[0])).with_partials(|_| Ok(v(&[1.0, 0.0, 0.0, 0.0]))),
        ScalarField::new("x2", |x| Ok(x[1])).with_partials(|_| Ok(v(&[0.0, 1.0, 0.0, 0.0]))),
    ];
    let axis = |i: usize| {
        let mut e = Vector::zeros(4);
        e[i] = 1.0;
        VectorField::constant(format!("d{}", i + 1), e)
    };
    let map = SmoothSubmersionMap::new(
        total,
        ChartManifold::euclidean(2),
        comps,
        vec![axis(2), axis(3)],
        vec![axis(0), axis(1)],
    )
    .unwrap()
    .with_hessians(|_| Ok(vec![Matrix::zeros(4, 4); 2]));
    let dilation = DilationField::analytic(
        ScalarField::new("1/lam", move |x| Ok(1.0 / lam(x))).with_partials(move |x| Ok(dlam(x) * (-1.0 / lam(x).powi(2)))),
    );
    let log_f1 = ScalarField::new("log f1", move |x| Ok(f1(x).ln())).with_partials(move |x| Ok(df1(x) / f1(x)));
    let log_lam = ScalarField::new("log lam", move |x| Ok(lam(x).ln())).with_partials(move |x| Ok(dlam(x) / lam(x)));
    Warp {
        map,
        dilation,
        log_f1,
        log_lam,
    }
}

fn pt(xs: &[f64]) -> ChartPoint {
    ChartPoint::new(xs.to_vec()).unwrap()
}

fn example2_points() -> Vec<ChartPoint> {
    (0..20)
        .map(|k| {
            let t = k as f64 / 19.0;
            pt(&[0.2 + t, 1.2 - 0.9 * t * t])
        })
        .collect()
}

#[test]
fn example2_split() {
    let (map, _) = example2();
    let p = pt(&[0.4, 0.7]);
    let s = map.split(&p).unwrap();
    let e = (-0.7f64).exp();
    // normalized U = e^{-x2}(1,-1)/√2, X = e^{-x2}(1,1)/√2
    assert_abs_diff_eq!(s.vertical()[0][0], e * SQRT_HALF, epsilon = 1e-15);
    assert_abs_diff_eq!(s.vertical()[0][1], -e * SQRT_HALF, epsilon = 1e-15);
    assert_abs_diff_eq!(s.horizontal()[0][0], e * SQRT_HALF, epsilon = 1e-15);
    assert_abs_diff_eq!(s.horizontal()[0][1], e * SQRT_HALF, epsilon = 1e-15);
    assert!(s.orthonormality_defect() < 1e-12);
    let (ann, orth) = map.frame_residuals(p.coords()).unwrap();
    assert!(ann <= FRAME_TOL && orth <= FRAME_TOL);
}

#[test]
fn product_split_is_block_diagonal() {
    let w = doubly_warped(0.0, 0.0);
    let s = w.map.split(&pt(&[0.1, 0.2, 0.3, 0.4])).unwrap();
    assert_eq!(s.vertical()[0].as_slice(), &[0.0, 0.0, 0.5, 0.0]);
    assert_eq!(s.vertical()[1].as_slice(), &[0.0, 0.0, 0.0, 0.5]);
    assert_eq!(s.horizontal()[0].as_slice(), &[1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn rank_deficiency_is_reported() {
    let total = ChartManifold::euclidean(2);
    let f = ScalarField::new("x1^2", |x| Ok(x[0] * x[0]));
    let map = SmoothSubmersionMap::new(
        total,
        line(),
        vec![f],
        vec![VectorField::constant("U", v(&[0.0, 1.0]))],
        vec![VectorField::constant("X", v(&[1.0, 0.0]))],
    )
    .unwrap();
    assert!(matches!(map.split(&pt(&[0.0, 1.0])), Err(Error::NotASubmersion { rank: 0, .. })));
}

#[test]
fn example2_dilation() {
    let (map, dil) = example2();
    let pts = example2_points();
    let rep = check_conformal(&map, &pts, Some(&dil)).unwrap();
    assert!(rep.is_conformal());
    assert!(rep.residual_max() <= 1e-9);
    for (s, p) in rep.samples.iter().zip(&pts) {
        assert_abs_diff_eq!(s.lambda, (-p.coords()[1]).exp(), epsilon = 1e-9);
        assert!(s.analytic_gap.unwrap() <= 1e-9);
    }
}

#[test]
fn warped_projection_dilation_is_reciprocal_warp() {
    let w = doubly_warped(1.0, 1.0);
    let pts = [pt(&[0.1, 0.2, 0.3, 0.4]), pt(&[-0.5, 0.9, 1.3, -0.8])];
    let rep = check_conformal(&w.map, &pts, None).unwrap();
    assert!(rep.is_conformal());
    for (s, p) in rep.samples.iter().zip(&pts) {
        let x = p.coords();
        let lam = 1.0 + 0.2 * x[2].cos() + 0.1 * x[3] * x[3];
        assert_abs_diff_eq!(s.lambda, 1.0 / lam, epsilon = 1e-12);
    }
    let prod = doubly_warped(0.0, 0.0);
    let rep = check_conformal(&prod.map, &pts, None).unwrap();
    assert!(rep.samples.iter().all(|s| (s.lambda - 1.0).abs() < 1e-15));
}

#[test]
fn non_conformal_map_is_detected() {
    // F(x) = (x1, 2 x2) on the flat plane with a 1D fiber along x3
    let total = ChartManifold::euclidean(3);
    let comps = vec![
        ScalarField::new("x1", |x| Ok(x[0])).with_partials(|_| Ok(v(&[1.0, 0.0, 0.0]))),
        ScalarField::new("2x2", |x| Ok(2.0 * x[1])).with_partials(|_| Ok(v(&[0.0, 2.0, 0.0]))),
    ];
    let map = SmoothSubmersionMap::new(
        total,
        ChartManifold::euclidean(2),
        comps,
        vec![VectorField::constant("U", v(&[0.0, 0.0, 1.0]))],
        vec![
            VectorField::constant("X1", v(&[1.0, 0.0, 0.0])),
            VectorField::constant("X2", v(&[0.0, 1.0, 0.0])),
        ],
    )
    .unwrap();
    let rep = check_conformal(&map, &[pt(&[0.0, 0.0, 0.0])], None).unwrap();
    assert!(!rep.is_conformal());
    assert_abs_diff_eq!(rep.residual_max(), 3.0, epsilon = 1e-12);
}

#[test]
fn example2_t_golden() {
    let (map, _) = example2();
    let u = map.vertical_frame()[0].clone();
    for p in example2_points() {
        let t = map.tensor_t(&u, &u, &p).unwrap();
        let x2 = p.coords()[1];
        // -e^{-x2} X with X = e1 + e2 = e^{-x2}(1, 1)
        let expected = -(-2.0 * x2).exp();
        assert_abs_diff_eq!(t.output.components()[0], expected, epsilon = 1e-6);
        assert_abs_diff_eq!(t.output.components()[1], expected, epsilon = 1e-6);
        let uu = map.total().metric_inner(&u.at(&p).unwrap(), &u.at(&p).unwrap()).unwrap();
        assert_abs_diff_eq!(uu, 2.0, epsilon = 1e-10);
    }
}

#[test]
fn product_tensors_vanish() {
    let w = doubly_warped(0.0, 0.0);
    let p = pt(&[0.3, -0.2, 0.5, 0.1]);
    for (a, b) in [(0, 1), (2, 3), (0, 2), (3, 1)] {
        let mut ea = Vector::zeros(4);
        ea[a] = 1.0;
        let mut eb = Vector::zeros(4);
        eb[b] = 1.0;
        let ta = TangentVector::new(p.clone(), ea.as_slice().to_vec()).unwrap();
        let tb = TangentVector::new(p.clone(), eb.as_slice().to_vec()).unwrap();
        assert!(w.map.tensor_t_vectors(&ta, &tb).unwrap().output.components().amax() < 1e-12);
        assert!(w.map.tensor_a_vectors(&ta, &tb).unwrap().output.components().amax() < 1e-12);
    }
    assert!(w.map.mean_curvature(&p).unwrap().components().amax() < 1e-12);
    assert!(w.map.umbilical_residual(&p).unwrap() < 1e-12);
}

#[test]
fn doubly_warped_tensors_match_closed_forms() {
    let w = doubly_warped(1.0, 1.0);
    for p in [pt(&[0.3, -0.2, 0.5, 0.1]), pt(&[1.1, 0.7, -0.4, 0.9])] {
        let x = p.coords();
        let s = w.map.split(&p).unwrap();
        let g = s.metric().clone();
        let grad_log_f1 = w.map.total().gradient(&w.log_f1, &p).unwrap();
        let grad_log_lam = w.map.total().gradient(&w.log_lam, &p).unwrap();
        let gh = s.horizontal_part(grad_log_f1.components());
        let gv = s.vertical_part(grad_log_lam.components());
        let us = [v(&[0.0, 0.0, 1.0, 0.3]), v(&[0.0, 0.0, -0.4, 0.8])];
        let xs = [v(&[1.0, 0.2, 0.0, 0.0]), v(&[-0.5, 0.9, 0.0, 0.0])];
        for a in &us {
            for b in &us {
                let t = w.map.t_at(x, a, &VectorField::constant("b", b.clone())).unwrap();
                let expected = &gh * -inner(&g, a, b);
                assert!((t - expected).amax() <= 1e-6);
            }
        }
        for a in &xs {
            for b in &xs {
                let av = w.map.a_at(x, a, &VectorField::constant("b", b.clone())).unwrap();
                let expected = &gv * -inner(&g, a, b);
                assert!((av - expected).amax() <= 1e-5);
            }
        }
        let h = w.map.mean_curvature(&p).unwrap();
        assert!((h.components() + &gh).amax() <= 1e-6);
        assert!(w.map.umbilical_residual(&p).unwrap() <= 1e-6);
        let d1 = VectorField::constant("d1", v(&[1.0, 0.0, 0.0, 0.0]));
        let d2 = VectorField::constant("d2", v(&[0.0, 1.0, 0.0, 0.0]));
        for (a, b) in [(&d1, &d1), (&d1, &d2), (&d2, &d2)] {
            assert!(w.map.a_formula_residual(&w.dilation, a, b, &p).unwrap() <= 1e-6);
        }
    }
}

#[test]
fn fiber_constant_dilation_reduces_a_to_half_bracket() {
    // g = dx1² + dx2² + (dx3 − x1 dx2)² over (x1, x2): horizontal frame
    // ∂1, ∂2 + x1∂3 is orthonormal and non-integrable, λ ≡ 1
    let metric = MetricField::new(3, |x| {
        let a = x[0];
        Ok(Matrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0 + a * a, -a, 0.0, -a, 1.0]))
    });
    let total = ChartManifold::new("heisenberg", metric).unwrap();
    let comps = vec![
        ScalarField::new("x1", |x| Ok(x[0])).with_partials(|_| Ok(v(&[1.0, 0.0, 0.0]))),
        ScalarField::new("x2", |x| Ok(x[1])).with_partials(|_| Ok(v(&[0.0, 1.0, 0.0]))),
    ];
    let x1f = VectorField::constant("X1", v(&[1.0, 0.0, 0.0]));
    let x2f = VectorField::new("X2", |x| Ok(v(&[0.0, 1.0, x[0]])));
    let map = SmoothSubmersionMap::new(
        total,
        ChartManifold::euclidean(2),
        comps,
        vec![VectorField::constant("d3", v(&[0.0, 0.0, 1.0]))],
        vec![x1f.clone(), x2f.clone()],
    )
    .unwrap();
    let one = DilationField::analytic(ScalarField::constant(1.0));
    let p = pt(&[0.4, -0.3, 0.8]);
    let x = p.coords();
    let s = map.split(&p).unwrap();
    let lhs = map.a_at(x, &x1f.eval(x).unwrap(), &x2f).unwrap();
    let half_bracket = s.vertical_part(&map.lie_bracket_at(x, &x1f, &x2f).unwrap()) * 0.5;
    assert!((&lhs - v(&[0.0, 0.0, 0.5])).amax() <= 1e-6);
    assert!((lhs - half_bracket).amax() <= 1e-6);
    assert!(map.a_formula_residual(&one, &x1f, &x2f, &p).unwrap() <= 1e-6);
    assert!(check_conformal(&map, &[p], Some(&one)).unwrap().is_conformal());
}

#[test]
fn non_umbilical_fibers_are_detected() {
    // fibers {x1 = c} with metric diag(1, e^{x1}, e^{-x1})
    let metric = MetricField::new(3, |x| Ok(Matrix::from_diagonal(&v(&[1.0, x[0].exp(), (-x[0]).exp()]))));
    let total = ChartManifold::new("skew", metric).unwrap();
    let map = SmoothSubmersionMap::new(
        total,
        line(),
        vec![ScalarField::new("x1", |x| Ok(x[0]))],
        vec![
            VectorField::constant("d2", v(&[0.0, 1.0, 0.0])),
            VectorField::constant("d3", v(&[0.0, 0.0, 1.0])),
        ],
        vec![VectorField::constant("d1", v(&[1.0, 0.0, 0.0]))],
    )
    .unwrap();
    let p = pt(&[0.2, 0.0, 0.0]);
    // T_{U2}U2 = -1/2 d1, T_{U3}U3 = +1/2 d1, H = 0
    let r = map.umbilical_residual(&p).unwrap();
    assert!(r > 1e-3);
    assert_abs_diff_eq!(r, 0.5, epsilon = 1e-6);
}

#[test]
fn second_fundamental_form_examples() {
    let (map, dil) = example2();
    let xb = map.horizontal_frame()[0].clone();
    for p in example2_points().iter().step_by(4) {
        let s = map.second_fundamental_form(&dil, &xb, &xb, p).unwrap();
        assert!(s.residual <= 1e-5, "residual {}", s.residual);
    }
    // X = e1 + e2 is not basic: F∗X = √2 e^{-x2}
    let x_not_basic = VectorField::new("X", |x| Ok(v(&[1.0, 1.0]) * (-x[1]).exp()));
    let p = pt(&[0.5, 0.5]);
    assert!(matches!(
        map.second_fundamental_form(&dil, &x_not_basic, &xb, &p),
        Err(Error::NotBasic { .. })
    ));

    // Riemannian product: formula side is zero
    let w = doubly_warped(1.0, 0.0);
    let d1 = VectorField::constant("d1", v(&[1.0, 0.0, 0.0, 0.0]));
    let s = w
        .map
        .second_fundamental_form(&w.dilation, &d1, &d1, &pt(&[0.1, 0.2, 0.3, 0.4]))
        .unwrap();
    assert!(s.formula.components().amax() < 1e-12);
    assert!(s.residual <= 1e-8);
}

#[test]
fn homothetic_second_fundamental_form_keeps_only_vertical_free_terms() {
    // λ depends only on the fiber: X(1/λ²) = 0 and grad_H(1/λ²) = 0 for horizontal X
    let w = doubly_warped(1.0, 1.0);
    let d1 = VectorField::constant("d1", v(&[1.0, 0.0, 0.0, 0.0]));
    let d2 = VectorField::constant("d2", v(&[0.0, 1.0, 0.0, 0.0]));
    let s = w
        .map
        .second_fundamental_form(&w.dilation, &d1, &d2, &pt(&[0.3, 0.1, 0.7, -0.2]))
        .unwrap();
    assert!(s.formula.components().amax() < 1e-10);
    assert!(s.value.components().amax() < 1e-6);
}

#[test]
fn tension_field_consistency() {
    let (map, dil) = example2();
    for p in example2_points().iter().step_by(5) {
        let t = map.tension_field(&dil, p).unwrap();
        assert!(t.residual <= 1e-5, "residual {}", t.residual);
    }
    let w = doubly_warped(1.0, 1.0);
    for p in [pt(&[0.3, -0.2, 0.5, 0.1]), pt(&[1.1, 0.7, -0.4, 0.9])] {
        let t = w.map.tension_field(&w.dilation, &p).unwrap();
        assert!(t.residual <= 1e-5, "residual {}", t.residual);
    }
    let prod = doubly_warped(0.0, 0.0);
    let t = prod.map.tension_field(&prod.dilation, &pt(&[0.1, 0.1, 0.1, 0.1])).unwrap();
    assert!(t.trace.components().amax() < 1e-12);
}

#[test]
fn homothetic_clairaut_tension_is_gradient_pushforward() {
    let w = doubly_warped(1.0, 0.0);
    let p = pt(&[0.4, -0.6, 0.2, 0.3]);
    let t = w.map.tension_field(&w.dilation, &p).unwrap();
    let grad = w.map.total().gradient(&w.log_f1, &p).unwrap();
    let expected = w.map.push_forward(p.coords(), grad.components()).unwrap() * 2.0;
    assert!((t.trace.components() - expected).amax() <= 1e-5);
}

#[test]
fn harmonicity_examples() {
    let pts = [pt(&[0.3, -0.2, 0.5, 0.1]), pt(&[1.1, 0.7, -0.4, 0.9])];
    let flat_fiber = doubly_warped(0.0, 0.0);
    let r = flat_fiber
        .map
        .harmonicity_check(&flat_fiber.dilation, &flat_fiber.log_f1, &pts, 1e-5)
        .unwrap();
    assert!(r.harmonic && r.consistent);

    let warped = doubly_warped(1.0, 0.0);
    let r = warped.map.harmonicity_check(&warped.dilation, &warped.log_f1, &pts, 1e-5).unwrap();
    assert!(!r.harmonic && r.consistent);

    let varying = doubly_warped(1.0, 1.0);
    match varying.map.harmonicity_check(&varying.dilation, &varying.log_f1, &pts, 1e-5) {
        Err(Error::PreconditionViolated(msg)) => assert!(msg.contains("constant on fibers"), "{msg}"),
        other => panic!("expected a precondition error, got {other:?}"),
    }

    let (map, dil) = example2();
    let f = ScalarField::new("x1+x2", |x| Ok(x[0] + x[1]));
    match map.harmonicity_check(&dil, &f, &[pt(&[0.5, 0.5])], 1e-5) {
        Err(Error::PreconditionViolated(msg)) => assert!(msg.contains("homothetic"), "{msg}"),
        other => panic!("expected a precondition error, got {other:?}"),
    }
}

#[test]
fn estimated_dilation_matches_analytic() {
    let (map, dil) = example2();
    let est = DilationField::estimated(&map);
    let x = v(&[0.3, 0.8]);
    assert_abs_diff_eq!(est.eval(&x).unwrap(), dil.eval(&x).unwrap(), epsilon = 1e-14);
    let gi = est.inv_square().partials_at(&x).unwrap();
    let ga = dil.inv_square().partials_at(&x).unwrap();
    assert!((gi - ga).amax() < 1e-7);
}

fn arb_warp_point() -> impl Strategy<Value = Vector> {
    prop::collection::vec(-1.0f64..1.0, 4).prop_map(Vector::from_vec)
}

fn arb_vec4() -> impl Strategy<Value = Vector> {
    prop::collection::vec(-1.0f64..1.0, 4).prop_map(Vector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn t_is_vertical_and_a_is_horizontal_in_first_slot(x in arb_warp_point(), a in arb_vec4(), b in arb_vec4()) {
        let w = doubly_warped(1.0, 1.0);
        let s = w.map.split_at(&x).unwrap();
        let bf = VectorField::constant("b", b.clone());
        let t_full = w.map.t_at(&x, &a, &bf).unwrap();
        let t_vert = w.map.t_at(&x, &s.vertical_part(&a), &bf).unwrap();
        prop_assert!((t_full - t_vert).amax() <= 1e-8);
        let a_full = w.map.a_at(&x, &a, &bf).unwrap();
        let a_hor = w.map.a_at(&x, &s.horizontal_part(&a), &bf).unwrap();
        prop_assert!((a_full - a_hor).amax() <= 1e-8);
    }

    #[test]
    fn t_symmetric_on_vertical_pairs(x in arb_warp_point(), a in arb_vec4(), b in arb_vec4()) {
        let w = doubly_warped(1.0, 1.0);
        let s = w.map.split_at(&x).unwrap();
        let (u, v2) = (s.vertical_part(&a), s.vertical_part(&b));
        let tuv = w.map.t_at(&x, &u, &VectorField::constant("v", v2.clone())).unwrap();
        let tvu = w.map.t_at(&x, &v2, &VectorField::constant("u", u.clone())).unwrap();
        prop_assert!((tuv - tvu).amax() <= 1e-6);
    }

    #[test]
    fn oneill_skew_symmetry(x in arb_warp_point(), e in arb_vec4(), a in arb_vec4(), b in arb_vec4()) {
        let w = doubly_warped(1.0, 1.0);
        let s = w.map.split_at(&x).unwrap();
        let af = VectorField::constant("a", a.clone());
        let bf = VectorField::constant("b", b.clone());
        let t1 = s.inner(&w.map.t_at(&x, &e, &af).unwrap(), &b);
        let t2 = s.inner(&a, &w.map.t_at(&x, &e, &bf).unwrap());
        prop_assert!((t1 + t2).abs() <= 1e-6);
        let a1 = s.inner(&w.map.a_at(&x, &e, &af).unwrap(), &b);
        let a2 = s.inner(&a, &w.map.a_at(&x, &e, &bf).unwrap());
        prop_assert!((a1 + a2).abs() <= 1e-6);
    }

    #[test]
    fn t_of_verticals_is_horizontal(x in arb_warp_point(), a in arb_vec4(), b in arb_vec4()) {
        let w = doubly_warped(1.0, 1.0);
        let s = w.map.split_at(&x).unwrap();
        let (u, v2) = (s.vertical_part(&a), s.vertical_part(&b));
        let t = w.map.t_at(&x, &u, &VectorField::constant("v", v2)).unwrap();
        for basis in s.vertical() {
            prop_assert!(s.inner(&t, basis).abs() <= 1e-8);
        }
        let (h1, h2) = (s.horizontal_part(&a), s.horizontal_part(&b));
        let av = w.map.a_at(&x, &h1, &VectorField::constant("h", h2)).unwrap();
        for basis in s.horizontal() {
            prop_assert!(s.inner(&av, basis).abs() <= 1e-8);
        }
    }
}
