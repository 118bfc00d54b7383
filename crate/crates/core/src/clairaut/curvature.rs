use super::{check_dim, CURVATURE_IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::geometry::{ChartManifold, ChartPoint, Matrix, MetricField, ScalarField, Vector};
use crate::submersion::{DilationField, SmoothSubmersionMap};

/// Newton tolerance for landing on the fiber.
const FIBER_NEWTON_TOL: f64 = 1e-15;
const FIBER_NEWTON_MAX: usize = 50;
/// First-derivative step for the induced fiber metric; curvature adds a
/// second layer on top.
const FIBER_METRIC_STEP: f64 = 1e-5;
/// Allowed spread of the fiber Ricci form around `λ_f ĝ`.
const EINSTEIN_TOL: f64 = 1e-4;

/// `K_ν = Σ_{i≠j} sec(U_i, U_j)` over the orthonormal vertical basis.
pub fn vertical_scalar_curvature(map: &SmoothSubmersionMap, p: &ChartPoint) -> Result<f64> {
    let x = check_dim(map, p)?;
    let split = map.split_at(x)?;
    let u = split.vertical();
    if u.len() < 2 {
        return Ok(0.0);
    }
    let r = map.total().riemann_at(x)?;
    let mut sum = 0.0;
    for i in 0..u.len() {
        for j in 0..u.len() {
            if i != j {
                sum += map.total().sectional_from(&r, &u[i], &u[j])?;
            }
        }
    }
    Ok(sum)
}

/// Chart on the fiber through `p`:
/// `ψ(s) = p + Σ s_a V_a + J(p)ᵀ c(s)` with `c` fixed by `F(ψ(s)) = F(p)`,
/// where `V_a` is the orthonormal vertical basis at `p`. The coordinate
/// vectors at `s = 0` are the `V_a`.
#[derive(Clone, Debug)]
pub struct FiberChart {
    map: SmoothSubmersionMap,
    origin: Vector,
    basis: Vec<Vector>,
    normal: Matrix,
    target: Vector,
}

impl FiberChart {
    pub fn new(map: &SmoothSubmersionMap, p: &ChartPoint) -> Result<Self> {
        let x = check_dim(map, p)?;
        let split = map.split_at(x)?;
        Ok(Self {
            map: map.clone(),
            origin: x.clone(),
            basis: split.vertical().to_vec(),
            normal: map.jacobian(x)?.transpose(),
            target: map.eval(x)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The vertical basis the chart is built on.
    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    fn linear(&self, s: &Vector) -> Vector {
        let mut y = self.origin.clone();
        for (a, v) in self.basis.iter().enumerate() {
            y += v * s[a];
        }
        y
    }

    /// `ψ(s)`.
    pub fn embed(&self, s: &Vector) -> Result<Vector> {
        if s.len() != self.dim() {
            return Err(Error::Argument(format!("fiber coordinates of length {} for a {}-dimensional fiber", s.len(), self.dim())));
        }
        let base = self.linear(s);
        let mut c = Vector::zeros(self.normal.ncols());
        for _ in 0..FIBER_NEWTON_MAX {
            let y = &base + &self.normal * &c;
            let r = self.map.eval(&y)? - &self.target;
            let m = self.map.jacobian(&y)? * &self.normal;
            let dc = m
                .lu()
                .solve(&(-r))
                .ok_or_else(|| Error::Numeric("singular fiber projection".into()))?;
            c += &dc;
            if dc.amax() <= FIBER_NEWTON_TOL * (1.0 + c.amax()) {
                return Ok(&base + &self.normal * &c);
            }
        }
        Err(Error::Numeric(format!("fiber projection did not converge at s = {:?}", s.as_slice())))
    }

    /// `∂ψ/∂s` from the implicit function theorem.
    pub fn tangent(&self, s: &Vector) -> Result<Matrix> {
        let y = self.embed(s)?;
        let jy = self.map.jacobian(&y)?;
        let lu = (&jy * &self.normal).lu();
        let mut out = Matrix::zeros(y.len(), self.dim());
        for (a, v) in self.basis.iter().enumerate() {
            let dc = lu
                .solve(&(-(&jy * v)))
                .ok_or_else(|| Error::Numeric("singular fiber projection".into()))?;
            out.set_column(a, &(v + &self.normal * dc));
        }
        Ok(out)
    }

    /// Induced metric `ψ∗g` in fiber coordinates.
    pub fn induced_metric(&self, s: &Vector) -> Result<Matrix> {
        let t = self.tangent(s)?;
        let y = self.embed(s)?;
        let g = self.map.total().metric_at(&y)?;
        let gh = t.transpose() * g * &t;
        Ok((&gh + gh.transpose()) * 0.5)
    }

    /// The fiber as a chart manifold with the induced metric.
    pub fn manifold(&self) -> Result<ChartManifold> {
        let chart = self.clone();
        let metric = MetricField::new(self.dim(), move |s| chart.induced_metric(s)).with_derivative_step(FIBER_METRIC_STEP);
        ChartManifold::new("fiber", metric)
    }
}

fn fiber_riemann(map: &SmoothSubmersionMap, p: &ChartPoint) -> Result<(ChartManifold, crate::geometry::RiemannTensor)> {
    let chart = FiberChart::new(map, p)?;
    let fiber = chart.manifold()?;
    let r = fiber.riemann_at(&Vector::zeros(chart.dim()))?;
    Ok((fiber, r))
}

/// `K̂ = Σ_{a≠b} ŝec(V_a, V_b)` of the fiber through `p`.
pub fn fiber_scalar_curvature(map: &SmoothSubmersionMap, p: &ChartPoint) -> Result<f64> {
    let k = map.fiber_dim();
    if k < 2 {
        return Ok(0.0);
    }
    let (fiber, r) = fiber_riemann(map, p)?;
    let e = |a: usize| {
        let mut v = Vector::zeros(k);
        v[a] = 1.0;
        v
    };
    let mut sum = 0.0;
    for a in 0..k {
        for b in 0..k {
            if a != b {
                sum += fiber.sectional_from(&r, &e(a), &e(b))?;
            }
        }
    }
    Ok(sum)
}

/// Ricci form of the fiber through `p` on the orthonormal vertical basis:
/// `R̂ic_ab = Σ_c ĝ(R̂(V_c, V_a)V_b, V_c)`.
pub fn fiber_ricci(map: &SmoothSubmersionMap, p: &ChartPoint) -> Result<Matrix> {
    let k = map.fiber_dim();
    if k < 2 {
        return Ok(Matrix::zeros(k, k));
    }
    let (_, r) = fiber_riemann(map, p)?;
    Ok(Matrix::from_fn(k, k, |a, b| (0..k).map(|c| r.get(c, b, c, a)).sum()))
}

/// Direct side, formula side and the named terms of a curvature identity.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureIdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub terms: Vec<(String, f64)>,
    pub tolerance: f64,
}

impl CurvatureIdentityReport {
    fn new(lhs: f64, rhs: f64, terms: Vec<(String, f64)>) -> Self {
        Self {
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            terms,
            tolerance: CURVATURE_IDENTITY_TOL,
        }
    }

    pub fn passes(&self) -> bool {
        self.residual <= self.tolerance
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Horizontal-gradient quantities shared by both identities.
struct GradientTerms {
    l2: f64,
    grad_f: f64,
    grad_phi: f64,
    cross: f64,
    /// `U_i(1/λ²)` per vertical basis vector.
    u_phi: Vec<f64>,
    /// `Σ_l X_l(1/λ²)`.
    x_phi: f64,
}

fn gradient_terms(map: &SmoothSubmersionMap, dilation: &DilationField, f: &ScalarField, x: &Vector) -> Result<GradientTerms> {
    let split = map.split_at(x)?;
    let phi = dilation.inv_square();
    let (_, gf_h) = map.gradient_parts(x, f)?;
    let grad_f = map.total().gradient_at(f, x)?;
    let (_, gphi_h) = map.gradient_parts(x, &phi)?;
    let l2 = dilation.eval(x)?.powi(2);
    let u_phi = split
        .vertical()
        .iter()
        .map(|u| phi.directional(x, u))
        .collect::<Result<Vec<_>>>()?;
    let x_phi = split
        .horizontal()
        .iter()
        .map(|h| phi.directional(x, h))
        .sum::<Result<f64>>()?;
    Ok(GradientTerms {
        l2,
        grad_f: split.inner(&gf_h, &gf_h),
        grad_phi: split.inner(&gphi_h, &gphi_h),
        cross: split.inner(&grad_f, &gphi_h),
        u_phi,
        x_phi,
    })
}

fn require_fibers(map: &SmoothSubmersionMap) -> Result<f64> {
    let k = map.fiber_dim();
    if k < 2 {
        return Err(Error::TrivialIdentity(format!(
            "{k}-dimensional fibers carry no sectional curvature; the identity reduces to 0 = 0"
        )));
    }
    Ok(k as f64)
}

/// Vertical scalar curvature against
/// `K̂ − k(k−1)(λ²‖grad_H f‖² − (λ⁴/4)‖grad_H 1/λ²‖² + λ² g(∇f, ∇_H 1/λ²))
///  − (λ⁴/2)(k−1) Σ_i Σ_l (X_l 1/λ²)(U_i 1/λ²)`, with `k = m − n`.
pub fn theorem33_identity_residual(
    map: &SmoothSubmersionMap,
    dilation: &DilationField,
    f: &ScalarField,
    p: &ChartPoint,
) -> Result<CurvatureIdentityReport> {
    let k = require_fibers(map)?;
    let x = check_dim(map, p)?;
    let lhs = vertical_scalar_curvature(map, p)?;
    let k_hat = fiber_scalar_curvature(map, p)?;
    let g = gradient_terms(map, dilation, f, x)?;
    let l4 = g.l2 * g.l2;
    let t_f = g.l2 * g.grad_f;
    let t_phi = l4 / 4.0 * g.grad_phi;
    let t_cross = g.l2 * g.cross;
    let t_mixed = l4 / 2.0 * (k - 1.0) * g.u_phi.iter().sum::<f64>() * g.x_phi;
    let rhs = k_hat - k * (k - 1.0) * (t_f - t_phi + t_cross) - t_mixed;
    Ok(CurvatureIdentityReport::new(
        lhs,
        rhs,
        vec![
            ("fiber_scalar_curvature".into(), k_hat),
            ("gradient_f".into(), t_f),
            ("gradient_inv_lambda".into(), t_phi),
            ("cross".into(), t_cross),
            ("mixed".into(), t_mixed),
        ],
    ))
}

/// `(k−1) Σ_{j≠i} sec(U_i, U_j)` against
/// `λ_f − (k−1)²{λ²‖grad_H f‖² − (λ⁴/4)‖grad_H 1/λ²‖² + λ² g(∇f, ∇_H 1/λ²)}
///  − (k−1)(λ⁴/4){(k−1) U_i(1/λ²) + Σ_{j≠i} U_j(1/λ²)} Σ_l X_l(1/λ²)`.
///
/// Ricci values follow the convention `Ric(U_i,U_i) = (k−1) Σ_{j≠i} sec`, on
/// both the ambient and the fiber side. The fiber's Einstein constant is
/// measured at `p`; a declared `lambda_f` must agree with it.
pub fn ricci_identity_residual(
    map: &SmoothSubmersionMap,
    dilation: &DilationField,
    f: &ScalarField,
    p: &ChartPoint,
    i: usize,
    lambda_f: Option<f64>,
) -> Result<CurvatureIdentityReport> {
    let k = require_fibers(map)?;
    let x = check_dim(map, p)?;
    let split = map.split_at(x)?;
    let u = split.vertical();
    if i >= u.len() {
        return Err(Error::Argument(format!("vertical index {i} out of range for {} fiber directions", u.len())));
    }
    let ric = fiber_ricci(map, p)?;
    let mean = ric.trace() / k;
    let anisotropy = (&ric - Matrix::identity(u.len(), u.len()) * mean).amax();
    if anisotropy > EINSTEIN_TOL {
        return Err(Error::PreconditionViolated(format!(
            "fiber is not Einstein at {:?}: Ricci anisotropy {anisotropy:.3e}",
            x.as_slice()
        )));
    }
    let measured = (k - 1.0) * mean;
    if let Some(declared) = lambda_f {
        if (declared - measured).abs() > EINSTEIN_TOL * declared.abs().max(1.0) {
            return Err(Error::PreconditionViolated(format!(
                "declared fiber Einstein constant {declared} but measured {measured:.9} at {:?}",
                x.as_slice()
            )));
        }
    }
    let lam_f = lambda_f.unwrap_or(measured);

    let r = map.total().riemann_at(x)?;
    let mut sec_sum = 0.0;
    for (j, uj) in u.iter().enumerate() {
        if j != i {
            sec_sum += map.total().sectional_from(&r, &u[i], uj)?;
        }
    }
    let lhs = (k - 1.0) * sec_sum;

    let g = gradient_terms(map, dilation, f, x)?;
    let l4 = g.l2 * g.l2;
    let bracket = g.l2 * g.grad_f - l4 / 4.0 * g.grad_phi + g.l2 * g.cross;
    let others: f64 = g.u_phi.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).sum();
    let mixed = (k - 1.0) * l4 / 4.0 * ((k - 1.0) * g.u_phi[i] + others) * g.x_phi;
    let rhs = lam_f - (k - 1.0).powi(2) * bracket - mixed;
    Ok(CurvatureIdentityReport::new(
        lhs,
        rhs,
        vec![
            ("fiber_einstein_constant".into(), lam_f),
            ("fiber_einstein_measured".into(), measured),
            ("bracket".into(), bracket),
            ("mixed".into(), mixed),
        ],
    ))
}
