//! Clairaut property: the tensor criterion on `T`, the invariant
//! `e^f sin ω` along geodesics, and the geodesic conditions written with
//! O'Neill tensors.

mod curvature;
mod potential;

pub use curvature::{
    fiber_ricci, fiber_scalar_curvature, ricci_identity_residual, theorem33_identity_residual,
    vertical_scalar_curvature, CurvatureIdentityReport, FiberChart,
};
pub use potential::{infer_mean_curvature_potential, mean_curvature_formula_check, MeanCurvatureCheck, PotentialEstimate};

use crate::error::{Error, Result};
use crate::geodesic::{fmt_num, local_geodesic, GeodesicState, GeodesicTrace};
use crate::geometry::{inner, ChartPoint, ScalarField, Vector, VectorField};
use crate::submersion::{DilationField, SmoothSubmersionMap, VerticalHorizontalSplit};

/// Pass threshold for the pointwise tensor criterion.
pub const CONDITION_TOL: f64 = 1e-6;
/// Pass threshold for the drift of `e^f sin ω` over unit time at step 1e-3.
pub const INVARIANT_TOL: f64 = 1e-5;
/// Pass threshold for the split geodesic equations.
pub const GEODESIC_CONDITION_TOL: f64 = 1e-4;
/// Two-derivative identities (curvature).
pub const CURVATURE_IDENTITY_TOL: f64 = 1e-3;
/// Below this ratio of squared norms a velocity counts as purely horizontal
/// (or purely vertical).
const PURE_RATIO: f64 = 1e-24;
/// Time offset for differencing velocity components along a curve.
const CURVE_STEP: f64 = 1e-5;

/// `(g(νv,νv), g(Hv,Hv))` for a velocity at `x`.
fn energy_parts(split: &VerticalHorizontalSplit, v: &Vector) -> (f64, f64) {
    let nv = split.vertical_part(v);
    let hv = split.horizontal_part(v);
    (split.inner(&nv, &nv), split.inner(&hv, &hv))
}

/// Angle between the velocity and the horizontal distribution, in `[0, π/2]`.
pub fn angle_omega(map: &SmoothSubmersionMap, s: &GeodesicState) -> Result<f64> {
    let x = s.point.coords();
    let split = map.split_at(x)?;
    let speed2 = split.inner(&s.velocity, &s.velocity);
    if !(speed2.sqrt() > 1e-12) {
        return Err(Error::Argument(format!("angle of a zero velocity at t = {}", s.t)));
    }
    let (nn, hh) = energy_parts(&split, &s.velocity);
    let total = nn + hh;
    if nn <= PURE_RATIO * total {
        return Ok(0.0);
    }
    if hh <= PURE_RATIO * total {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    Ok((nn / total).sqrt().min(1.0).asin())
}

/// Largest defect of
/// `g(T_U U, X) + g(U,U) g(X,∇f) + (λ²/2) g(X,X) g(U, ∇_ν(1/λ²))`
/// over the orthonormal vertical basis `U` and horizontal basis `X` at `p`.
pub fn clairaut_condition_residual(
    map: &SmoothSubmersionMap,
    dilation: &DilationField,
    f: &ScalarField,
    p: &ChartPoint,
) -> Result<f64> {
    let x = check_dim(map, p)?;
    let split = map.split_at(x)?;
    let grad_f = map.total().gradient_at(f, x)?;
    let (grad_v, _) = map.gradient_parts(x, &dilation.inv_square())?;
    let l2 = dilation.eval(x)?.powi(2);
    let mut worst: f64 = 0.0;
    for u in split.vertical() {
        let tuu = map.t_at(x, u, &VectorField::constant("U", u.clone()))?;
        let uu = split.inner(u, u);
        let u_term = 0.5 * l2 * split.inner(u, &grad_v);
        for xh in split.horizontal() {
            let r = split.inner(&tuu, xh) + uu * split.inner(xh, &grad_f) + split.inner(xh, xh) * u_term;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

fn check_dim<'a>(map: &SmoothSubmersionMap, p: &'a ChartPoint) -> Result<&'a Vector> {
    if p.dim() != map.total_dim() {
        return Err(Error::Argument(format!(
            "point of dimension {} on a {}-dimensional total space",
            p.dim(),
            map.total_dim()
        )));
    }
    Ok(p.coords())
}

/// Tensor-criterion verdict over a set of points.
#[derive(Clone, Debug, PartialEq)]
pub struct ClairautReport {
    pub scenario: String,
    pub f_name: String,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub verdict: bool,
    pub tolerance: f64,
}

impl ClairautReport {
    /// Evaluates the criterion at every point.
    pub fn evaluate(
        scenario: impl Into<String>,
        map: &SmoothSubmersionMap,
        dilation: &DilationField,
        f: &ScalarField,
        points: &[ChartPoint],
        tolerance: f64,
    ) -> Result<Self> {
        let residuals = points
            .iter()
            .map(|p| clairaut_condition_residual(map, dilation, f, p))
            .collect::<Result<Vec<_>>>()?;
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            scenario: scenario.into(),
            f_name: f.name().to_string(),
            residuals,
            max_residual,
            verdict: max_residual <= tolerance,
            tolerance,
        })
    }
}

/// `e^f sin ω` sampled along a geodesic.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantTrace {
    pub times: Vec<f64>,
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub drift: f64,
}

impl InvariantTrace {
    /// `t,omega,invariant_value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,omega,invariant_value\n");
        for ((t, w), v) in self.times.iter().zip(&self.omega).zip(&self.values) {
            out.push_str(&format!("{},{},{}\n", fmt_num(*t), fmt_num(*w), fmt_num(*v)));
        }
        out
    }
}

/// Evaluates `e^{f(α(t))} sin ω(t)` at every sample of `trace`.
pub fn clairaut_invariant_trace(map: &SmoothSubmersionMap, f: &ScalarField, trace: &GeodesicTrace) -> Result<InvariantTrace> {
    let n = trace.states().len();
    let (mut times, mut omega, mut values) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for s in trace.states() {
        let w = angle_omega(map, s)?;
        let r = f.eval(s.point.coords())?.exp();
        times.push(s.t);
        omega.push(w);
        values.push(r * w.sin().clamp(0.0, 1.0));
    }
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let drift = if n == 0 { 0.0 } else { hi - lo };
    Ok(InvariantTrace { times, omega, values, drift })
}

/// Vertical and horizontal residuals of the split geodesic equation at time
/// `t` of a curve given as `t ↦ (position, velocity)`:
/// `‖ν D_t U + A_X X + T_U X‖` and `‖H D_t X + A_X U + T_U U‖`,
/// where `U`, `X` are the vertical and horizontal velocity components and
/// `D_t` differentiates along the curve.
pub fn geodesic_condition_residuals<C>(map: &SmoothSubmersionMap, curve: C, t: f64) -> Result<(f64, f64)>
where
    C: Fn(f64) -> Result<(Vector, Vector)>,
{
    let parts = |tau: f64| -> Result<(Vector, Vector, Vector, VerticalHorizontalSplit)> {
        let (x, v) = curve(tau)?;
        let split = map.split_at(&x)?;
        let u = split.vertical_part(&v);
        let h = split.horizontal_part(&v);
        Ok((v, u, h, split))
    };
    let (x, _) = curve(t)?;
    let (v, u, h, split) = parts(t)?;
    let (_, up, hp, _) = parts(t + CURVE_STEP)?;
    let (_, um, hm, _) = parts(t - CURVE_STEP)?;
    let gamma = map.total().christoffel_at(&x)?;
    let dt_u = (up - um) / (2.0 * CURVE_STEP) + gamma.contract(&v, &u);
    let dt_h = (hp - hm) / (2.0 * CURVE_STEP) + gamma.contract(&v, &h);
    let u_field = VectorField::constant("U", u.clone());
    let h_field = VectorField::constant("X", h.clone());
    let a_xx = map.a_at(&x, &h, &h_field)?;
    let t_ux = map.t_at(&x, &u, &h_field)?;
    let a_xu = map.a_at(&x, &h, &u_field)?;
    let t_uu = map.t_at(&x, &u, &u_field)?;
    let vertical = split.vertical_part(&dt_u) + a_xx + t_ux;
    let horizontal = split.horizontal_part(&dt_h) + a_xu + t_uu;
    Ok((split.norm(&vertical), split.norm(&horizontal)))
}

/// [`geodesic_condition_residuals`] on the geodesic through `s`.
pub fn geodesic_condition_residuals_at(map: &SmoothSubmersionMap, s: &GeodesicState) -> Result<(f64, f64)> {
    let curve = local_geodesic(map.total(), s);
    geodesic_condition_residuals(map, curve, 0.0)
}

/// Terms of the horizontal-geodesic corollary at the start of a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalGeodesicTerms {
    /// `‖A_X X‖`.
    pub a_xx: f64,
    /// `‖X(1/λ²) X̃ − ½‖X‖² F∗(∇_H 1/λ²)‖` in the base metric.
    pub two_term: f64,
}

/// Projected-geodesic condition along a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedGeodesicReport {
    /// `max ‖LHS − RHS‖` of the projected-geodesic condition.
    pub residual_max: f64,
    /// `max ‖(LHS − RHS) + β̈‖`, with `β̈ = (∇F∗)(α̇, α̇)` evaluated from the
    /// coordinate Hessians of `F`; along a geodesic the two must cancel.
    pub agreement_max: f64,
    /// Present when the trace starts horizontally.
    pub horizontal: Option<HorizontalGeodesicTerms>,
}

/// Evaluates `λ² X(1/λ²) X̃ + F∗(2A_X U + T_U U) − (λ²/2)‖X‖² F∗(∇_H 1/λ²)`
/// along a geodesic trace and cross-checks it against the acceleration of
/// `β = F∘α` computed independently.
pub fn projected_geodesic_residual(
    map: &SmoothSubmersionMap,
    dilation: &DilationField,
    trace: &GeodesicTrace,
) -> Result<ProjectedGeodesicReport> {
    let phi = dilation.inv_square();
    let mut residual_max: f64 = 0.0;
    let mut agreement_max: f64 = 0.0;
    let mut horizontal = None;
    for (k, s) in trace.states().iter().enumerate() {
        let x = s.point.coords();
        let v = &s.velocity;
        let split = map.split_at(x)?;
        let u = split.vertical_part(v);
        let h = split.horizontal_part(v);
        let (_, grad_h) = map.gradient_parts(x, &phi)?;
        let l2 = dilation.eval(x)?.powi(2);
        let j = map.jacobian(x)?;
        let x_phi = phi.directional(x, &h)?;
        let hh = split.inner(&h, &h);
        let u_field = VectorField::constant("U", u.clone());
        let a_xu = map.a_at(x, &h, &u_field)?;
        let t_uu = map.t_at(x, &u, &u_field)?;
        let expr = &j * &h * (l2 * x_phi) + &j * (a_xu * 2.0 + t_uu) - &j * &grad_h * (0.5 * l2 * hh);
        let accel = map.sff_tensor_at(x, v, v)?;
        let gb = map.base().metric_at(&map.eval(x)?)?;
        let bnorm = |w: &Vector| inner(&gb, w, w).max(0.0).sqrt();
        residual_max = residual_max.max(bnorm(&expr));
        agreement_max = agreement_max.max(bnorm(&(&expr + &accel)));
        if k == 0 && split.inner(&u, &u) <= PURE_RATIO * split.inner(v, v) {
            let a_xx = map.a_at(x, &h, &VectorField::constant("X", h.clone()))?;
            let two = &j * &h * x_phi - &j * &grad_h * (0.5 * hh);
            horizontal = Some(HorizontalGeodesicTerms {
                a_xx: split.norm(&a_xx),
                two_term: bnorm(&two),
            });
        }
    }
    Ok(ProjectedGeodesicReport {
        residual_max,
        agreement_max,
        horizontal,
    })
}
