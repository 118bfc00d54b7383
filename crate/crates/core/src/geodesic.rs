//! Geodesic integration with a fixed-step classical Runge–Kutta scheme.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{inner, ChartManifold, ChartPoint, TangentVector, Vector};

/// Default integration step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Speed drift allowed per unit time at the default step, for unit speed.
pub const SPEED_TOLERANCE_PER_UNIT_TIME: f64 = 1e-8;

/// Multiple of the speed tolerance beyond which integration is abandoned.
pub const DIVERGENCE_FACTOR: f64 = 100.0;

/// A point and velocity at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicState {
    pub t: f64,
    pub point: ChartPoint,
    pub velocity: Vector,
}

impl GeodesicState {
    pub fn new(t: f64, point: ChartPoint, velocity: impl Into<Vec<f64>>) -> Result<Self> {
        let velocity = Vector::from_vec(velocity.into());
        if !t.is_finite() || velocity.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("geodesic state must be finite".into()));
        }
        if velocity.len() != point.dim() {
            return Err(Error::Argument("velocity and point dimensions differ".into()));
        }
        Ok(GeodesicState { t, point, velocity })
    }

    pub fn from_tangent(t: f64, v: &TangentVector) -> Result<Self> {
        GeodesicState::new(t, v.base().clone(), v.to_vec())
    }

    pub fn tangent(&self) -> TangentVector {
        TangentVector::new_unchecked(self.point.clone(), self.velocity.clone())
    }
}

/// `(dx/dt, dv/dt)` of the geodesic equation.
pub fn geodesic_rhs(man: &ChartManifold, s: &GeodesicState) -> Result<(Vector, Vector)> {
    rhs_at(man, s.point.coords(), &s.velocity)
}

fn rhs_at(man: &ChartManifold, x: &Vector, v: &Vector) -> Result<(Vector, Vector)> {
    let gamma = man.christoffel(&ChartPoint::from_vector(x.clone())?)?;
    Ok((v.clone(), -gamma.contract(v, v)))
}

fn speed2(man: &ChartManifold, x: &Vector, v: &Vector) -> Result<f64> {
    Ok(inner(&man.metric_at(x)?, v, v))
}

/// Drift tolerance for a run of the given length, step and initial speed.
/// Scales with the fourth power of the step, as the method's error does.
pub fn speed_tolerance(duration: f64, step: f64, speed0: f64) -> f64 {
    SPEED_TOLERANCE_PER_UNIT_TIME * duration.max(1.0) * (step / DEFAULT_STEP).powi(4) * speed0.max(1.0)
}

/// The sampled states of one integrated geodesic.
#[derive(Clone, Debug)]
pub struct GeodesicTrace {
    states: Vec<GeodesicState>,
    speeds: Vec<f64>,
    step: f64,
    speed0: f64,
}

impl GeodesicTrace {
    pub fn states(&self) -> &[GeodesicState] {
        &self.states
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Initial squared speed.
    pub fn speed0(&self) -> f64 {
        self.speed0
    }

    /// Squared speed at each recorded state.
    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("a trace has at least one state")
    }

    /// `max_t |‖α̇(t)‖² − ‖α̇(0)‖²|`.
    pub fn speed_drift(&self) -> f64 {
        self.speeds
            .iter()
            .map(|s| (s - self.speed0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `t, x1..xm, v1..vm, speed2`.
    pub fn to_csv(&self) -> String {
        let m = self.states.first().map_or(0, |s| s.point.dim());
        let mut out = String::from("t");
        for i in 1..=m {
            let _ = write!(out, ",x{i}");
        }
        for i in 1..=m {
            let _ = write!(out, ",v{i}");
        }
        out.push_str(",speed2\n");
        for (s, sp) in self.states.iter().zip(&self.speeds) {
            let _ = write!(out, "{}", fmt_num(s.t));
            for c in s.point.coords().iter().chain(s.velocity.iter()) {
                let _ = write!(out, ",{}", fmt_num(*c));
            }
            let _ = writeln!(out, ",{}", fmt_num(*sp));
        }
        out
    }
}

/// Round-trippable decimal with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Integrates from `initial` to `t_end`. Every step is recorded; the last
/// step is shortened so the trace ends exactly at `t_end`.
pub fn integrate(man: &ChartManifold, initial: &GeodesicState, t_end: f64, step: f64) -> Result<GeodesicTrace> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    if !(t_end > initial.t) || !t_end.is_finite() {
        return Err(Error::Argument(format!(
            "t_end ({t_end}) must exceed the initial time ({})",
            initial.t
        )));
    }
    if initial.point.dim() != man.dim() {
        return Err(Error::Argument("initial point dimension does not match the manifold".into()));
    }
    let speed0 = speed2(man, initial.point.coords(), &initial.velocity)?;
    let limit = DIVERGENCE_FACTOR * speed_tolerance(t_end - initial.t, step, speed0);

    let n_full = ((t_end - initial.t) / step).floor() as usize;
    let mut states = vec![initial.clone()];
    let mut speeds = vec![speed0];
    let mut x = initial.point.coords().clone();
    let mut v = initial.velocity.clone();
    let mut t = initial.t;
    let mut k = 0usize;
    loop {
        let h = if k < n_full {
            step
        } else {
            let rest = t_end - t;
            // skip a remainder too small to matter
            if rest <= step * 1e-9 {
                break;
            }
            rest
        };
        let t_now = t;
        let fail = move |e: Error| match e {
            Error::SingularMetric { .. } | Error::Evaluation(_) | Error::Numeric(_) => Error::GeodesicFailure {
                t: t_now,
                reason: e.to_string(),
            },
            other => other,
        };
        let (x1, v1) = rk4_step(man, &x, &v, h).map_err(fail)?;
        x = x1;
        v = v1;
        k += 1;
        t = if k <= n_full { initial.t + k as f64 * step } else { t_end };
        if x.iter().chain(v.iter()).any(|c| !c.is_finite()) {
            return Err(Error::GeodesicFailure {
                t,
                reason: "state became non-finite".into(),
            });
        }
        let sp = speed2(man, &x, &v).map_err(fail)?;
        let drift = (sp - speed0).abs();
        if drift > limit {
            return Err(Error::IntegrationDiverged { t, drift, limit });
        }
        states.push(GeodesicState {
            t,
            point: ChartPoint::new_unchecked(x.clone()),
            velocity: v.clone(),
        });
        speeds.push(sp);
        if t >= t_end {
            break;
        }
    }
    if let Some(last) = states.last_mut() {
        last.t = t_end;
    }
    Ok(GeodesicTrace {
        states,
        speeds,
        step,
        speed0,
    })
}

fn rk4_step(man: &ChartManifold, x: &Vector, v: &Vector, h: f64) -> Result<(Vector, Vector)> {
    let (k1x, k1v) = rhs_at(man, x, v)?;
    let (k2x, k2v) = rhs_at(man, &(x + &k1x * (h / 2.0)), &(v + &k1v * (h / 2.0)))?;
    let (k3x, k3v) = rhs_at(man, &(x + &k2x * (h / 2.0)), &(v + &k2v * (h / 2.0)))?;
    let (k4x, k4v) = rhs_at(man, &(x + &k3x * h), &(v + &k3v * h))?;
    let xn = x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
    let vn = v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
    Ok((xn, vn))
}

/// The geodesic through `s` as a function of the time offset, evaluated
/// with one Runge–Kutta step. Meant for small offsets such as
/// finite-difference stencils along the curve.
pub fn local_geodesic<'a>(man: &'a ChartManifold, s: &'a GeodesicState) -> impl Fn(f64) -> Result<(Vector, Vector)> + 'a {
    move |tau| {
        if tau == 0.0 {
            return Ok((s.point.coords().clone(), s.velocity.clone()));
        }
        rk4_step(man, s.point.coords(), &s.velocity, tau)
    }
}

/// `exp_p(t v)`, the geodesic endpoint at time `t` (negative `t` runs backwards).
pub fn exponential_map(man: &ChartManifold, v: &TangentVector, t: f64, step: f64) -> Result<ChartPoint> {
    if t == 0.0 || v.components().amax() == 0.0 {
        return Ok(v.base().clone());
    }
    let (vel, dur) = if t > 0.0 {
        (v.to_vec(), t)
    } else {
        (v.components().iter().map(|c| -c).collect(), -t)
    };
    let start = GeodesicState::new(0.0, v.base().clone(), vel)?;
    Ok(integrate(man, &start, dur, step)?.last().point.clone())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::geometry::{Matrix, MetricField};

    fn sphere() -> ChartManifold {
        let metric = MetricField::new(2, |x| {
            let s = x[0].sin();
            Ok(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, s * s]))
        })
        .with_partials(|x| {
            let d = 2.0 * x[0].sin() * x[0].cos();
            Ok(vec![Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, d]), Matrix::zeros(2, 2)])
        });
        ChartManifold::new("sphere", metric).unwrap()
    }

    fn example2() -> ChartManifold {
        let metric = MetricField::new(2, |x| Ok(Matrix::identity(2, 2) * (2.0 * x[1]).exp()))
            .with_partials(|x| Ok(vec![Matrix::zeros(2, 2), Matrix::identity(2, 2) * (2.0 * (2.0 * x[1]).exp())]));
        ChartManifold::new("example2", metric).unwrap()
    }

    fn state(man: &ChartManifold, x: &[f64], v: &[f64]) -> GeodesicState {
        GeodesicState::new(0.0, man.point(x.to_vec()).unwrap(), v.to_vec()).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let flat = ChartManifold::euclidean(2);
        let (dx, dv) = geodesic_rhs(&flat, &state(&flat, &[0.0, 0.0], &[1.0, 2.0])).unwrap();
        assert_eq!(dx.as_slice(), &[1.0, 2.0]);
        assert_eq!(dv.as_slice(), &[0.0, 0.0]);

        // v = (1, -1): dv^1 = -2Γ¹₁₂ v¹v² = 2, dv^2 = -(Γ²₁₁ + Γ²₂₂) = 0
        let m = example2();
        let (_, dv) = geodesic_rhs(&m, &state(&m, &[0.0, 0.0], &[1.0, -1.0])).unwrap();
        assert_eq!(dv.as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn rhs_is_minus_the_connection_term() {
        let m = example2();
        let p = m.point(vec![0.3, -0.2]).unwrap();
        let v = Vector::from_row_slice(&[0.4, 0.9]);
        let s = GeodesicState::new(0.0, p.clone(), v.as_slice().to_vec()).unwrap();
        let (_, dv) = geodesic_rhs(&m, &s).unwrap();
        // ∇_v V for the constant extension V ≡ v is exactly Γ(v, v)
        let c = crate::geometry::VectorField::constant("v", v.clone());
        let cov = m.covariant_derivative(&s.tangent(), &c).unwrap();
        assert!((dv + cov.components()).amax() < 1e-14);
    }

    #[test]
    fn euclidean_line() {
        let flat = ChartManifold::euclidean(2);
        let tr = integrate(&flat, &state(&flat, &[0.0, 0.0], &[1.0, 0.0]), 1.0, 1e-3).unwrap();
        let end = tr.last();
        assert_eq!(end.t, 1.0);
        assert_abs_diff_eq!(end.point.coords()[0], 1.0, epsilon = 1e-12);
        assert_eq!(end.point.coords()[1], 0.0);
        assert!(tr.states().windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn sphere_equator_reaches_antipode() {
        let m = sphere();
        let tr = integrate(&m, &state(&m, &[PI / 2.0, 0.0], &[0.0, 1.0]), PI, 1e-3).unwrap();
        let end = tr.last();
        assert_abs_diff_eq!(end.point.coords()[0], PI / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(end.point.coords()[1], PI, epsilon = 1e-6);
    }

    #[test]
    fn sphere_great_circle_period() {
        let m = sphere();
        let p = m.point(vec![PI / 2.0, 0.3]).unwrap();
        let dir = Vector::from_row_slice(&[0.6, 0.8]);
        let v = m.vector(&p, dir.as_slice().to_vec()).unwrap();
        let q = exponential_map(&m, &v, 2.0 * PI, 1e-3).unwrap();
        // one full turn also advances the longitude by 2π
        assert_abs_diff_eq!(q.coords()[0], p.coords()[0], epsilon = 1e-5);
        assert_abs_diff_eq!(q.coords()[1], p.coords()[1] + 2.0 * PI, epsilon = 1e-5);
    }

    #[test]
    fn exponential_map_trivial_cases() {
        let flat = ChartManifold::euclidean(3);
        let p = flat.point(vec![1.0, -1.0, 0.5]).unwrap();
        let zero = flat.vector(&p, vec![0.0; 3]).unwrap();
        assert_eq!(exponential_map(&flat, &zero, 2.0, 1e-3).unwrap(), p);
        let v = flat.vector(&p, vec![0.5, 1.0, -2.0]).unwrap();
        let q = exponential_map(&flat, &v, -1.5, 1e-3).unwrap();
        let expect = p.coords() + v.components() * -1.5;
        assert!((q.coords() - expect).amax() < 1e-12);
    }

    #[test]
    fn partial_final_step_lands_on_t_end() {
        let m = example2();
        let tr = integrate(&m, &state(&m, &[0.0, 0.0], &[0.7, 0.1]), 0.0105, 1e-3).unwrap();
        assert_eq!(tr.states().len(), 12);
        assert_eq!(tr.last().t, 0.0105);
    }

    #[test]
    fn invalid_arguments() {
        let flat = ChartManifold::euclidean(2);
        let s = state(&flat, &[0.0, 0.0], &[1.0, 0.0]);
        assert!(matches!(integrate(&flat, &s, 1.0, 0.0), Err(Error::Argument(_))));
        assert!(matches!(integrate(&flat, &s, -1.0, 1e-3), Err(Error::Argument(_))));
    }

    #[test]
    fn singular_metric_en_route_reports_time() {
        // metric degenerates at x1 = 0.5
        let metric = MetricField::new(1, |x| Ok(Matrix::from_element(1, 1, (0.5 - x[0]).max(0.0))));
        let m = ChartManifold::new("collapse", metric).unwrap();
        let s = GeodesicState::new(0.0, m.point(vec![0.0]).unwrap(), vec![1.0]).unwrap();
        match integrate(&m, &s, 2.0, 1e-3) {
            Err(Error::GeodesicFailure { t, .. }) | Err(Error::IntegrationDiverged { t, .. }) => assert!(t < 2.0),
            other => panic!("expected a failure, got {other:?}"),
        }
    }

    #[test]
    fn step_halving_shows_fourth_order() {
        let m = example2();
        let s = state(&m, &[0.1, 0.2], &[0.8, -0.6]);
        let end = |h: f64| integrate(&m, &s, 1.0, h).unwrap().last().point.coords().clone();
        let (a, b, c) = (end(0.1), end(0.05), end(0.025));
        let ratio = (&a - &b).amax() / (&b - &c).amax();
        assert!(ratio >= 8.0, "ratio {ratio}");
    }

    #[test]
    fn csv_layout() {
        let flat = ChartManifold::euclidean(2);
        let tr = integrate(&flat, &state(&flat, &[0.0, 0.0], &[1.0, 0.0]), 0.002, 1e-3).unwrap();
        let csv = tr.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,v1,v2,speed2");
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[1],
            "0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0"
        );
        for field in lines[2].split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(fmt_num(v), field);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn example2_unit_speed_conserved(x1 in -0.5f64..0.5, x2 in -0.5f64..0.5, angle in 0.0f64..(2.0 * PI)) {
            let m = example2();
            let scale = (-x2).exp();
            let v = [angle.cos() * scale, angle.sin() * scale];
            let tr = integrate(&m, &state(&m, &[x1, x2], &v), 1.0, 1e-3).unwrap();
            prop_assert!((tr.speed0() - 1.0).abs() < 1e-12);
            prop_assert!(tr.speed_drift() <= 1e-8, "drift {}", tr.speed_drift());
        }

        #[test]
        fn time_reversal(x1 in -0.5f64..0.5, x2 in -0.5f64..0.5, a in -1.0f64..1.0, b in -1.0f64..1.0) {
            prop_assume!(a.abs() + b.abs() > 0.1);
            let m = example2();
            let fwd = integrate(&m, &state(&m, &[x1, x2], &[a, b]), 1.0, 1e-3).unwrap();
            let end = fwd.last();
            let back_v: Vec<f64> = end.velocity.iter().map(|c| -c).collect();
            let back = GeodesicState::new(0.0, end.point.clone(), back_v).unwrap();
            let home = integrate(&m, &back, 1.0, 1e-3).unwrap();
            let d = (home.last().point.coords() - Vector::from_row_slice(&[x1, x2])).amax();
            prop_assert!(d <= 1e-6, "returned within {}", d);
        }
    }
}
