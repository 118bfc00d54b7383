//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use clairaut_core::clairaut::{
    clairaut_condition_residual, clairaut_invariant_trace, ricci_identity_residual, theorem33_identity_residual,
    vertical_scalar_curvature,
};
use clairaut_core::expr::Expression;
use clairaut_core::geodesic::{integrate, GeodesicState, GeodesicTrace};
use clairaut_core::geometry::{inner, ChartManifold, ChartPoint, Matrix, MetricField, ScalarField, Vector, VectorField};
use clairaut_core::report::{random_unit_state, run_report, RunConfig};
use clairaut_core::scenario::{build_doubly_warped, doubly_warped_default, lookup, registry_names, SubmersionScenario};
use clairaut_core::submersion::{check_conformal, SmoothSubmersionMap};
use clairaut_core::Result;

const SEED: u64 = 42;
const POINTS: usize = 20;
const GEODESICS: usize = 10;
const STEP: f64 = 1e-3;

const CHRISTOFFEL_FD_TOL: f64 = 1e-6;
const CHRISTOFFEL_TIME: Duration = Duration::from_secs(1);
const DILATION_TOL: f64 = 1e-9;
const CONFORMAL_TOL: f64 = 1e-9;
const T_TENSOR_TOL: f64 = 1e-6;
const NORM_TOL: f64 = 1e-10;
const CONDITION_TOL: f64 = 1e-6;
const NON_CLAIRAUT_FLOOR: f64 = 1e-2;
const DRIFT_TOL: f64 = 1e-5;
const DRIFT_TIME: Duration = Duration::from_secs(10);
const SPEED_TOL: f64 = 1e-6;
const HALVING_RATIO: f64 = 8.0;
const A_TOL: f64 = 1e-5;
const SFF_TOL: f64 = 1e-5;
const TENSION_TOL: f64 = 1e-5;
const HARMONIC_TOL: f64 = 1e-6;
const CURVATURE_TOL: f64 = 1e-3;
const ORACLE_TOL: f64 = 1e-6;
const CURVATURE_ORACLE_TOL: f64 = 1e-5;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn sc(name: &str) -> SubmersionScenario {
    lookup(name).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn seeded_points(s: &SubmersionScenario, n: usize) -> Vec<ChartPoint> {
    s.sample_points(&mut ChaCha8Rng::seed_from_u64(SEED), n)
}

fn seeded_traces(s: &SubmersionScenario) -> Result<Vec<GeodesicTrace>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..GEODESICS)
        .map(|_| {
            let st = random_unit_state(s, &mut rng)?;
            integrate(s.total(), &st, 1.0, STEP)
        })
        .collect()
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn c01_christoffel() -> Result<Verdict> {
    let s = sc("example2");
    let fd = s.total().with_finite_differences();
    let start = Instant::now();
    let mut exact = true;
    let mut fd_err: f64 = 0.0;
    // (k, i, j) zero-based: Γ²₁₁ = −1, Γ²₂₂ = 1, Γ¹₁₂ = Γ¹₂₁ = 1, others 0
    let table = |k: usize, i: usize, j: usize| match (k, i, j) {
        (1, 0, 0) => -1.0,
        (1, 1, 1) | (0, 0, 1) | (0, 1, 0) => 1.0,
        _ => 0.0,
    };
    for p in seeded_points(&s, POINTS) {
        let g = s.total().christoffel(&p)?;
        let gf = fd.christoffel(&p)?;
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    exact &= g.get(k, i, j) == table(k, i, j);
                    fd_err = fd_err.max((gf.get(k, i, j) - table(k, i, j)).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        exact && fd_err <= CHRISTOFFEL_FD_TOL && elapsed < CHRISTOFFEL_TIME,
        format!("analytic exact = {exact}, finite-difference error {fd_err:.2e}, {elapsed:.2?}"),
    )
}

fn c02_conformality() -> Result<Verdict> {
    let s = sc("example2");
    let points = seeded_points(&s, POINTS);
    let rep = check_conformal(s.map(), &points, None)?;
    let gap = max_of(rep.samples.iter().map(|c| (c.lambda - (-c.point[1]).exp()).abs()));
    let res = rep.residual_max();
    verdict(
        gap <= DILATION_TOL && res <= CONFORMAL_TOL,
        format!("|λ − e^(−x2)| {gap:.2e}, residual {res:.2e}"),
    )
}

fn c03_t_tensor() -> Result<Verdict> {
    let s = sc("example2");
    let u = &s.map().vertical_frame()[0];
    let mut t_err: f64 = 0.0;
    let mut n_err: f64 = 0.0;
    for p in seeded_points(&s, POINTS) {
        let x2 = p.coords()[1];
        let t = s.map().tensor_t(u, u, &p)?;
        // −e^(−x2) X with X = e1 + e2 = e^(−x2)(∂1 + ∂2)
        let want = Vector::from_vec(vec![-(-2.0 * x2).exp(), -(-2.0 * x2).exp()]);
        t_err = t_err.max((t.output.components() - want).amax());
        let g = s.total().metric_at(p.coords())?;
        let uv = u.eval(p.coords())?;
        n_err = n_err.max((inner(&g, &uv, &uv) - 2.0).abs());
    }
    verdict(
        t_err <= T_TENSOR_TOL && n_err <= NORM_TOL,
        format!("T_U U error {t_err:.2e}, |g(U,U) − 2| {n_err:.2e}"),
    )
}

fn condition_max(s: &SubmersionScenario) -> Result<f64> {
    let dil = s.dilation_or_estimate();
    let f = s.clairaut_f().expect("scenario declares f");
    let mut worst: f64 = 0.0;
    for p in seeded_points(s, POINTS) {
        worst = worst.max(clairaut_condition_residual(s.map(), &dil, f, &p)?);
    }
    Ok(worst)
}

fn c04_condition() -> Result<Verdict> {
    let e2 = condition_max(&sc("example2"))?;
    let dw = condition_max(&sc("doubly_warped_default"))?;
    let bad = condition_max(&sc("perturbed_nonclairaut"))?;
    verdict(
        e2 <= CONDITION_TOL && dw <= CONDITION_TOL && bad > NON_CLAIRAUT_FLOOR,
        format!("example2 {e2:.2e}, doubly_warped_default {dw:.2e}, perturbed_nonclairaut {bad:.2e}"),
    )
}

fn drift_max(s: &SubmersionScenario) -> Result<(f64, f64)> {
    let f = s.clairaut_f().expect("scenario declares f");
    let traces = seeded_traces(s)?;
    let mut drift: f64 = 0.0;
    let mut speed: f64 = 0.0;
    for t in &traces {
        drift = drift.max(clairaut_invariant_trace(s.map(), f, t)?.drift);
        speed = speed.max(t.speed_drift());
    }
    Ok((drift, speed))
}

fn c05_dynamical() -> Result<Verdict> {
    let start = Instant::now();
    let (e2, _) = drift_max(&sc("example2"))?;
    let (dw, _) = drift_max(&sc("doubly_warped_default"))?;
    let (sr, _) = drift_max(&sc("surface_of_revolution_default"))?;
    let elapsed = start.elapsed();
    verdict(
        e2 <= DRIFT_TOL && dw <= DRIFT_TOL && sr <= DRIFT_TOL && elapsed < DRIFT_TIME,
        format!("drift example2 {e2:.2e}, doubly_warped_default {dw:.2e}, surface {sr:.2e}, {elapsed:.2?}"),
    )
}

fn endpoint(s: &SubmersionScenario, st: &GeodesicState, h: f64) -> Result<Vector> {
    Ok(integrate(s.total(), st, 1.0, h)?.last().point.coords().clone())
}

fn c06_geodesic_quality() -> Result<Verdict> {
    let mut speed: f64 = 0.0;
    for name in registry_names() {
        speed = speed.max(drift_max(&sc(&name))?.1);
    }
    let s = sc("example2");
    let st = random_unit_state(&s, &mut ChaCha8Rng::seed_from_u64(SEED))?;
    let (a, b, c) = (endpoint(&s, &st, 0.1)?, endpoint(&s, &st, 0.05)?, endpoint(&s, &st, 0.025)?);
    let ratio = (&a - &b).norm() / (&b - &c).norm();
    verdict(
        speed <= SPEED_TOL && ratio >= HALVING_RATIO,
        format!("max speed drift {speed:.2e} over all registry traces, step-halving ratio {ratio:.2}"),
    )
}

fn c07_a_formula() -> Result<Verdict> {
    let s = sc("doubly_warped_default");
    let dil = s.dilation_or_estimate();
    let frame = s.map().horizontal_frame();
    let mut formula: f64 = 0.0;
    for p in seeded_points(&s, POINTS) {
        for a in frame {
            for b in frame {
                formula = formula.max(s.map().a_formula_residual(&dil, a, b, &p)?);
            }
        }
    }
    let mut bracket: f64 = 0.0;
    for name in ["doubly_warped_default", "doubly_warped_sphere", "euclidean_product", "surface_of_revolution_default"] {
        let s = sc(name);
        let frame = s.map().horizontal_frame();
        for p in seeded_points(&s, POINTS) {
            let split = s.map().split(&p)?;
            for a in frame {
                for b in frame {
                    let lhs = s.map().tensor_a(a, b, &p)?.output.components().clone();
                    let half = split.vertical_part(&s.map().lie_bracket_at(p.coords(), a, b)?) * 0.5;
                    bracket = bracket.max(split.norm(&(lhs - half)));
                }
            }
        }
    }
    verdict(
        formula <= A_TOL && bracket <= A_TOL,
        format!("formula residual {formula:.2e}, |A_X Y − ½ν[X,Y]| {bracket:.2e}"),
    )
}

fn c08_second_fundamental_form() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut names = Vec::new();
    for name in registry_names() {
        let s = sc(&name);
        if !s.flags().expected_conformal {
            continue;
        }
        let dil = s.dilation_or_estimate();
        let frame = s.map().horizontal_frame();
        for p in seeded_points(&s, POINTS) {
            for a in frame {
                for b in frame {
                    worst = worst.max(s.map().second_fundamental_form(&dil, a, b, &p)?.residual);
                }
            }
        }
        names.push(name);
    }
    verdict(worst <= SFF_TOL, format!("max residual {worst:.2e} over {} scenarios", names.len()))
}

fn tension_norms(s: &SubmersionScenario) -> Result<(f64, f64)> {
    let dil = s.dilation_or_estimate();
    let mut consistency: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for p in seeded_points(s, POINTS) {
        let t = s.map().tension_field(&dil, &p)?;
        consistency = consistency.max(t.residual);
        let gb = s.base().metric_at(t.trace.base().coords())?;
        let c = t.trace.components();
        norm = norm.max(inner(&gb, c, c).sqrt());
    }
    Ok((consistency, norm))
}

fn c09_tension() -> Result<Verdict> {
    let mut consistency: f64 = 0.0;
    for name in registry_names() {
        consistency = consistency.max(tension_norms(&sc(&name))?.0);
    }
    let mut flat = doubly_warped_default();
    flat.name = "doubly_warped_flat_f1".into();
    flat.f1 = Expression::constant(1.5);
    let cases = [
        (sc("euclidean_product"), true),
        (build_doubly_warped(&flat)?, true),
        (sc("example2"), false),
    ];
    let mut mismatches = Vec::new();
    for (s, harmonic) in &cases {
        let (_, norm) = tension_norms(s)?;
        if (norm <= HARMONIC_TOL) != *harmonic {
            mismatches.push(format!("{} |τ| = {norm:.2e}", s.name()));
        }
    }
    verdict(
        consistency <= TENSION_TOL && mismatches.is_empty(),
        format!("trace vs closed form {consistency:.2e}; verdict mismatches: [{}]", mismatches.join(", ")),
    )
}

fn c10_curvature_identities() -> Result<Verdict> {
    let s = sc("doubly_warped_sphere");
    let dil = s.dilation_or_estimate();
    let f = s.clairaut_f().expect("f");
    let points = seeded_points(&s, 10);
    let mut t33: f64 = 0.0;
    let mut ricci: f64 = 0.0;
    for p in &points {
        t33 = t33.max(theorem33_identity_residual(s.map(), &dil, f, p)?.residual);
        for i in 0..s.map().fiber_dim() {
            ricci = ricci.max(ricci_identity_residual(s.map(), &dil, f, p, i, None)?.residual);
        }
    }
    let prod = sc("euclidean_product");
    let pdil = prod.dilation_or_estimate();
    let pf = prod.clairaut_f().expect("f");
    let mut zero = true;
    for p in seeded_points(&prod, 10) {
        let rep = theorem33_identity_residual(prod.map(), &pdil, pf, &p)?;
        for name in ["gradient_f", "gradient_inv_lambda", "cross", "mixed"] {
            zero &= rep.term(name) == Some(0.0);
        }
    }
    verdict(
        t33 <= CURVATURE_TOL && ricci <= CURVATURE_TOL && zero,
        format!("vertical scalar curvature identity {t33:.2e}, Ricci identity {ricci:.2e}, product corrections zero = {zero}"),
    )
}

/// `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)` from central differences
/// of the metric values alone.
fn christoffel_oracle(man: &ChartManifold, x: &Vector) -> Vec<f64> {
    let m = x.len();
    let h = 1e-5;
    let dg: Vec<Matrix> = (0..m)
        .map(|k| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            (man.metric_at(&xp).unwrap() - man.metric_at(&xm).unwrap()) / (2.0 * h)
        })
        .collect();
    let ginv = man.metric_at(x).unwrap().try_inverse().unwrap();
    let mut out = vec![0.0; m * m * m];
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for l in 0..m {
                    s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                out[(k * m + i) * m + j] = 0.5 * s;
            }
        }
    }
    out
}

/// Round sphere of radius `r` in `(θ, φ)`, with exact metric partials.
fn sphere(r: f64) -> ChartManifold {
    let metric = MetricField::new(2, move |x| {
        Ok(Matrix::from_diagonal(&Vector::from_vec(vec![r * r, (r * x[0].sin()).powi(2)])))
    })
    .with_partials(move |x| {
        let d = r * r * (2.0 * x[0]).sin();
        Ok(vec![Matrix::from_diagonal(&Vector::from_vec(vec![0.0, d])), Matrix::zeros(2, 2)])
    });
    ChartManifold::new("sphere", metric).unwrap()
}

fn embed(x: &Vector) -> Vector {
    Vector::from_vec(vec![x[0].sin() * x[1].cos(), x[0].sin() * x[1].sin(), x[0].cos()])
}

fn c11_oracles() -> Result<Verdict> {
    let mut findings = Vec::new();
    let mut pass = true;

    // finite-difference metric derivatives against the analytic path
    let mut gamma_err: f64 = 0.0;
    for name in ["doubly_warped_sphere", "perturbed_nonclairaut", "example2"] {
        let s = sc(name);
        for p in seeded_points(&s, 5) {
            let oracle = christoffel_oracle(s.total(), p.coords());
            let prod = s.total().christoffel(&p)?;
            gamma_err = gamma_err.max(max_of(prod.values().iter().zip(&oracle).map(|(a, b)| (a - b).abs())));
        }
    }
    pass &= gamma_err <= ORACLE_TOL;
    findings.push(format!("christoffel {gamma_err:.1e}"));

    // flat-space closed forms: straight lines and zero curvature
    let s = sc("euclidean_product");
    let x0 = [0.1, -0.3, 0.5, 0.2];
    let v = [0.6, 0.0, -0.8, 0.3];
    let st = GeodesicState::new(0.0, ChartPoint::new(x0.to_vec())?, v.to_vec())?;
    let end = integrate(s.total(), &st, 1.0, STEP)?.last().point.coords().clone();
    let line_err = max_of((0..4).map(|i| (end[i] - (x0[i] + v[i])).abs()));
    let vsc = vertical_scalar_curvature(s.map(), &st.point)?.abs();
    pass &= line_err <= 1e-12 && vsc <= CURVATURE_ORACLE_TOL;
    findings.push(format!("straight line {line_err:.1e}, flat curvature {vsc:.1e}"));

    // great-circle endpoints on the unit sphere
    let unit = sphere(1.0);
    let mut gc_err: f64 = 0.0;
    for (theta, phi, a, b) in [(1.0, 0.2, 0.6, 0.9), (0.7, -1.0, -0.3, 1.1), (2.0, 0.5, 0.8, -0.4)] {
        let x = Vector::from_vec(vec![theta, phi]);
        let vel = Vector::from_vec(vec![a, b]);
        let speed = inner(&unit.metric_at(&x)?, &vel, &vel).sqrt();
        let st = GeodesicState::new(0.0, ChartPoint::from_vector(x.clone())?, (vel.clone() / speed).as_slice().to_vec())?;
        let end = integrate(&unit, &st, 1.0, STEP)?.last().point.coords().clone();
        let p0 = embed(&x);
        let dp = Vector::from_vec(vec![
            theta.cos() * phi.cos() * a - theta.sin() * phi.sin() * b,
            theta.cos() * phi.sin() * a + theta.sin() * phi.cos() * b,
            -theta.sin() * a,
        ]) / speed;
        let want = p0 * 1f64.cos() + dp * 1f64.sin();
        gc_err = gc_err.max((embed(&end) - want).norm());
    }
    pass &= gc_err <= ORACLE_TOL;
    findings.push(format!("great circles {gc_err:.1e}"));

    // constant curvature: R^l_kij = K(δ^l_i g_jk − δ^l_j g_ik), K = 1/r²
    let r = 2.0;
    let big = sphere(r);
    let mut cc_err: f64 = 0.0;
    for theta in [0.6, 1.2, 2.3] {
        let p = ChartPoint::new(vec![theta, 0.4])?;
        let g = big.metric_at(p.coords())?;
        let rt = big.riemann_tensor(&p)?;
        let k = 1.0 / (r * r);
        for l in 0..2 {
            for kk in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                        let want = k * (d(l, i) * g[(j, kk)] - d(l, j) * g[(i, kk)]);
                        cc_err = cc_err.max((rt.get(l, kk, i, j) - want).abs());
                    }
                }
            }
        }
    }
    pass &= cc_err <= CURVATURE_ORACLE_TOL;
    findings.push(format!("constant curvature {cc_err:.1e}"));

    // a 3D warped product: flat 2D fibers with sec = −(r'/r)²
    let wr = |t: f64| 1.5 + 0.4 * t.sin();
    let wdr = |t: f64| 0.4 * t.cos();
    let metric = MetricField::new(3, move |x| {
        Ok(Matrix::from_diagonal(&Vector::from_vec(vec![1.0, wr(x[0]).powi(2), wr(x[0]).powi(2)])))
    });
    let axis = |i: usize| {
        let mut e = Vector::zeros(3);
        e[i] = 1.0;
        VectorField::constant(format!("d{}", i + 1), e)
    };
    let map = SmoothSubmersionMap::new(
        ChartManifold::new("warped3", metric)?,
        ChartManifold::euclidean(1),
        vec![ScalarField::new("x1", |x| Ok(x[0]))],
        vec![axis(1), axis(2)],
        vec![axis(0)],
    )?;
    let mut kv_err: f64 = 0.0;
    for t in [-0.7, 0.2, 0.9] {
        let k = vertical_scalar_curvature(&map, &ChartPoint::new(vec![t, 0.3, -0.2])?)?;
        kv_err = kv_err.max((k + 2.0 * (wdr(t) / wr(t)).powi(2)).abs());
    }
    pass &= kv_err <= CURVATURE_ORACLE_TOL;
    findings.push(format!("warped fibers {kv_err:.1e}"));

    // doubly warped: H = −∇ log f1, from the closed-form gradient
    let s = sc("doubly_warped_default");
    let mut h_err: f64 = 0.0;
    for p in seeded_points(&s, 10) {
        let x = p.coords();
        let f1 = 2.0 + 0.5 * x[0].sin() + 0.15 * x[1] * x[1];
        let l2 = 1.25f64 * 1.25;
        let want = Vector::from_vec(vec![-0.5 * x[0].cos() / f1 / l2, -0.3 * x[1] / f1 / l2, 0.0, 0.0]);
        h_err = h_err.max((s.map().mean_curvature(&p)?.components() - want).amax());
    }
    pass &= h_err <= ORACLE_TOL;
    findings.push(format!("mean curvature {h_err:.1e}"));

    verdict(pass, findings.join(", "))
}

fn c12_determinism() -> Result<Verdict> {
    let config = RunConfig::default();
    let mut same = true;
    let mut bytes = 0;
    for name in ["example2", "doubly_warped_default"] {
        let s = sc(name);
        let a = run_report(&s, &config)?.to_json();
        let b = run_report(&s, &config)?.to_json();
        same &= a == b;
        bytes += a.len();
    }
    verdict(same, format!("byte-identical = {same} ({bytes} bytes, seed {})", config.seed))
}

type Criterion = fn() -> Result<Verdict>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 12] = [
        ("christoffel goldens", c01_christoffel),
        ("conformality golden", c02_conformality),
        ("T-tensor golden", c03_t_tensor),
        ("algebraic Clairaut criterion", c04_condition),
        ("dynamical Clairaut invariant", c05_dynamical),
        ("geodesic quality", c06_geodesic_quality),
        ("A-tensor formula", c07_a_formula),
        ("second fundamental form", c08_second_fundamental_form),
        ("tension field and harmonicity", c09_tension),
        ("vertical curvature identities", c10_curvature_identities),
        ("oracle independence", c11_oracles),
        ("determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let v = f().unwrap_or_else(|e| Verdict {
            pass: false,
            detail: format!("error: {e}"),
        });
        failed += usize::from(!v.pass);
        println!("{} [{:02}] {title}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
