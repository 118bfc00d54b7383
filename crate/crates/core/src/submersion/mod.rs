//! Smooth submersions between chart manifolds: vertical/horizontal splits,
//! dilation, O'Neill tensors, second fundamental form and tension field.

mod fundamental;
mod tensors;

use std::sync::Arc;

use nalgebra::SVD;

pub use fundamental::{HarmonicityReport, SecondFundamentalFormValue, TensionValue};
pub use tensors::{ONeillKind, ONeillValue};

use crate::error::{Error, Result};
use crate::geometry::{
    directional_difference, gram_schmidt, inner, ChartManifold, ChartPoint, Matrix, PointFn, ScalarField,
    TangentVector, Vector, VectorField, DEFAULT_DERIVATIVE_STEP,
};

/// Relative singular-value threshold for the rank test.
pub const RANK_TOL: f64 = 1e-10;

/// Tolerance for frame checks (annihilation, orthogonality).
pub const FRAME_TOL: f64 = 1e-9;

/// Tolerance for the conformality residual, relative to `max(1, λ²)`.
pub const CONFORMAL_TOL: f64 = 1e-8;

/// Tolerance for the basic-field check.
pub const BASIC_TOL: f64 = 1e-6;

/// A smooth map `F: M → B` with frame fields for its vertical and
/// horizontal distributions.
#[derive(Clone)]
pub struct SmoothSubmersionMap {
    total: ChartManifold,
    base: ChartManifold,
    components: Vec<ScalarField>,
    hessians: Option<PointFn<Vec<Matrix>>>,
    vertical_frame: Vec<VectorField>,
    horizontal_frame: Vec<VectorField>,
}

impl std::fmt::Debug for SmoothSubmersionMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothSubmersionMap")
            .field("total", &self.total.name())
            .field("base", &self.base.name())
            .field("components", &self.components)
            .field("analytic_hessians", &self.hessians.is_some())
            .field("vertical_frame", &self.vertical_frame)
            .field("horizontal_frame", &self.horizontal_frame)
            .finish()
    }
}

impl SmoothSubmersionMap {
    /// `components[γ]` is `F^γ` as a function on `M`; analytic partials on a
    /// component supply the corresponding Jacobian row.
    pub fn new(
        total: ChartManifold,
        base: ChartManifold,
        components: Vec<ScalarField>,
        vertical_frame: Vec<VectorField>,
        horizontal_frame: Vec<VectorField>,
    ) -> Result<Self> {
        let (m, n) = (total.dim(), base.dim());
        if n >= m {
            return Err(Error::Argument(format!("base dimension {n} must be below total dimension {m}")));
        }
        if components.len() != n {
            return Err(Error::Argument(format!("map has {} components, base has dimension {n}", components.len())));
        }
        if vertical_frame.len() != m - n {
            return Err(Error::Argument(format!(
                "expected {} vertical frame fields, got {}",
                m - n,
                vertical_frame.len()
            )));
        }
        if horizontal_frame.len() != n {
            return Err(Error::Argument(format!(
                "expected {n} horizontal frame fields, got {}",
                horizontal_frame.len()
            )));
        }
        Ok(SmoothSubmersionMap {
            total,
            base,
            components,
            hessians: None,
            vertical_frame,
            horizontal_frame,
        })
    }

    /// Supplies exact second partials: one `m×m` matrix per component.
    pub fn with_hessians<F>(mut self, hessians: F) -> Self
    where
        F: Fn(&Vector) -> Result<Vec<Matrix>> + Send + Sync + 'static,
    {
        self.hessians = Some(Arc::new(hessians));
        self
    }

    pub fn total(&self) -> &ChartManifold {
        &self.total
    }

    pub fn base(&self) -> &ChartManifold {
        &self.base
    }

    /// `m`.
    pub fn total_dim(&self) -> usize {
        self.total.dim()
    }

    /// `n`.
    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    /// `m − n`.
    pub fn fiber_dim(&self) -> usize {
        self.total.dim() - self.base.dim()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn vertical_frame(&self) -> &[VectorField] {
        &self.vertical_frame
    }

    pub fn horizontal_frame(&self) -> &[VectorField] {
        &self.horizontal_frame
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.components.iter().all(|c| c.has_analytic_partials())
    }

    /// `F(x)`.
    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        let vals: Result<Vec<f64>> = self.components.iter().map(|c| c.eval(x)).collect();
        Ok(Vector::from_vec(vals?))
    }

    /// `F(p)` as a base point.
    pub fn apply(&self, p: &ChartPoint) -> Result<ChartPoint> {
        ChartPoint::from_vector(self.eval(p.coords())?)
    }

    /// The `n×m` Jacobian at `x`.
    pub fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        let mut j = Matrix::zeros(self.base_dim(), self.total_dim());
        for (g, c) in self.components.iter().enumerate() {
            j.set_row(g, &c.partials_at(x)?.transpose());
        }
        Ok(j)
    }

    /// Second partials of each component.
    pub fn hessians(&self, x: &Vector) -> Result<Vec<Matrix>> {
        if let Some(h) = &self.hessians {
            return h(x);
        }
        self.components.iter().map(|c| c.coordinate_hessian(x)).collect()
    }

    /// `F∗w` at `x`.
    pub fn push_forward(&self, x: &Vector, w: &Vector) -> Result<Vector> {
        Ok(self.jacobian(x)? * w)
    }

    /// Checks that `F∗` has full rank `n` at `x`.
    pub fn check_rank(&self, x: &Vector) -> Result<()> {
        let j = self.jacobian(x)?;
        let svd = SVD::new(j, false, false);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax.max(1.0)).count();
        if rank < self.base_dim() {
            return Err(Error::NotASubmersion {
                at: x.iter().copied().collect(),
                rank,
                expected: self.base_dim(),
            });
        }
        Ok(())
    }

    /// Orthonormal vertical and horizontal bases at `p`.
    pub fn split(&self, p: &ChartPoint) -> Result<VerticalHorizontalSplit> {
        if p.dim() != self.total_dim() {
            return Err(Error::Argument("point dimension does not match the total space".into()));
        }
        self.check_rank(p.coords())?;
        self.split_at(p.coords())
    }

    pub(crate) fn split_at(&self, x: &Vector) -> Result<VerticalHorizontalSplit> {
        let g = self.total.metric_at(x)?;
        let mut seeds = Vec::with_capacity(self.total_dim());
        for f in self.vertical_frame.iter().chain(&self.horizontal_frame) {
            seeds.push(f.eval(x)?);
        }
        let basis = gram_schmidt(&g, &seeds)?;
        let k = self.fiber_dim();
        Ok(VerticalHorizontalSplit {
            at: ChartPoint::new_unchecked(x.clone()),
            metric: g,
            vertical: basis[..k].to_vec(),
            horizontal: basis[k..].to_vec(),
        })
    }

    /// Frame defects at `x`: largest relative `|F∗V|` over vertical fields and
    /// largest normalized `|g(V, X)|` over vertical/horizontal pairs.
    pub fn frame_residuals(&self, x: &Vector) -> Result<(f64, f64)> {
        let j = self.jacobian(x)?;
        let g = self.total.metric_at(x)?;
        let jscale = j.amax().max(1.0);
        let mut annihilation: f64 = 0.0;
        let mut orthogonality: f64 = 0.0;
        for vf in &self.vertical_frame {
            let v = vf.eval(x)?;
            let nv = inner(&g, &v, &v).sqrt();
            if nv == 0.0 {
                return Err(Error::DegenerateFrame(format!("vertical field `{}` vanishes", vf.name())));
            }
            annihilation = annihilation.max((&j * &v).amax() / (nv * jscale));
            for hf in &self.horizontal_frame {
                let h = hf.eval(x)?;
                let nh = inner(&g, &h, &h).sqrt();
                if nh == 0.0 {
                    return Err(Error::DegenerateFrame(format!("horizontal field `{}` vanishes", hf.name())));
                }
                orthogonality = orthogonality.max(inner(&g, &v, &h).abs() / (nv * nh));
            }
        }
        Ok((annihilation, orthogonality))
    }

    /// The field `x ↦ ν_x V(x)`.
    pub fn vertical_part_field(&self, field: &VectorField) -> VectorField {
        let map = self.clone();
        let f = field.clone();
        VectorField::new(format!("v({})", field.name()), move |x| {
            Ok(map.split_at(x)?.vertical_part(&f.eval(x)?))
        })
        .with_step(field.step())
    }

    /// The field `x ↦ H_x V(x)`.
    pub fn horizontal_part_field(&self, field: &VectorField) -> VectorField {
        let map = self.clone();
        let f = field.clone();
        VectorField::new(format!("h({})", field.name()), move |x| {
            Ok(map.split_at(x)?.horizontal_part(&f.eval(x)?))
        })
        .with_step(field.step())
    }

    /// The `i`-th orthonormal vertical field from the split.
    pub fn vertical_unit_field(&self, i: usize) -> VectorField {
        let map = self.clone();
        VectorField::new(format!("U{}", i + 1), move |x| {
            map.split_at(x)?
                .vertical
                .get(i)
                .cloned()
                .ok_or_else(|| Error::Argument(format!("no vertical basis vector {i}")))
        })
    }

    /// The `j`-th orthonormal horizontal field from the split.
    pub fn horizontal_unit_field(&self, j: usize) -> VectorField {
        let map = self.clone();
        VectorField::new(format!("X{}", j + 1), move |x| {
            map.split_at(x)?
                .horizontal
                .get(j)
                .cloned()
                .ok_or_else(|| Error::Argument(format!("no horizontal basis vector {j}")))
        })
    }

    /// Largest change of `F∗X` along unit vertical directions at `x`;
    /// zero for basic fields.
    pub fn basic_variation(&self, field: &VectorField, x: &Vector) -> Result<f64> {
        let split = self.split_at(x)?;
        let pushed = |y: &Vector| -> Result<Vector> { Ok(self.jacobian(y)? * field.eval(y)?) };
        let step = if self.has_analytic_jacobian() {
            field.step()
        } else {
            crate::geometry::NESTED_DERIVATIVE_STEP
        };
        let mut worst: f64 = 0.0;
        for u in &split.vertical {
            let d: Vector = directional_difference(pushed, x, u, step)?;
            worst = worst.max(d.amax());
        }
        Ok(worst)
    }

    /// Errors with [`Error::NotBasic`] if `field` is not projectable at `x`.
    pub fn ensure_basic(&self, field: &VectorField, x: &Vector) -> Result<()> {
        let variation = self.basic_variation(field, x)?;
        let scale = (self.jacobian(x)? * field.eval(x)?).amax().max(1.0);
        if variation > BASIC_TOL * scale {
            return Err(Error::NotBasic {
                field: field.name().to_string(),
                variation,
            });
        }
        Ok(())
    }
}

/// Orthonormal bases of the vertical and horizontal spaces at a point.
#[derive(Clone, Debug)]
pub struct VerticalHorizontalSplit {
    at: ChartPoint,
    metric: Matrix,
    vertical: Vec<Vector>,
    horizontal: Vec<Vector>,
}

impl VerticalHorizontalSplit {
    pub fn at(&self) -> &ChartPoint {
        &self.at
    }

    pub fn metric(&self) -> &Matrix {
        &self.metric
    }

    pub fn vertical(&self) -> &[Vector] {
        &self.vertical
    }

    pub fn horizontal(&self) -> &[Vector] {
        &self.horizontal
    }

    pub fn vertical_basis(&self) -> Vec<TangentVector> {
        self.vertical
            .iter()
            .map(|v| TangentVector::new_unchecked(self.at.clone(), v.clone()))
            .collect()
    }

    pub fn horizontal_basis(&self) -> Vec<TangentVector> {
        self.horizontal
            .iter()
            .map(|v| TangentVector::new_unchecked(self.at.clone(), v.clone()))
            .collect()
    }

    /// `g(a, b)` at the split's point.
    pub fn inner(&self, a: &Vector, b: &Vector) -> f64 {
        inner(&self.metric, a, b)
    }

    pub fn norm(&self, a: &Vector) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// `ν w`.
    pub fn vertical_part(&self, w: &Vector) -> Vector {
        let mut out = Vector::zeros(w.len());
        for u in &self.vertical {
            out += u * self.inner(u, w);
        }
        out
    }

    /// `H w`.
    pub fn horizontal_part(&self, w: &Vector) -> Vector {
        let mut out = Vector::zeros(w.len());
        for x in &self.horizontal {
            out += x * self.inner(x, w);
        }
        out
    }

    /// Largest deviation of the combined basis from orthonormality.
    pub fn orthonormality_defect(&self) -> f64 {
        let all: Vec<&Vector> = self.vertical.iter().chain(&self.horizontal).collect();
        let mut worst: f64 = 0.0;
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.inner(a, b) - target).abs());
            }
        }
        worst
    }
}

/// The dilation `λ` of a conformal submersion.
#[derive(Clone, Debug)]
pub struct DilationField {
    lambda: ScalarField,
    analytic: bool,
}

impl DilationField {
    /// A dilation supplied in closed form.
    pub fn analytic(lambda: ScalarField) -> Self {
        DilationField { lambda, analytic: true }
    }

    /// The dilation estimated from the first horizontal direction.
    pub fn estimated(map: &SmoothSubmersionMap) -> Self {
        let map = map.clone();
        let lambda = ScalarField::new("lambda_est", move |x| {
            let l2 = estimate_square_dilation(&map, x)?;
            Ok(l2.sqrt())
        })
        .with_step(DEFAULT_DERIVATIVE_STEP);
        DilationField { lambda, analytic: false }
    }

    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    pub fn lambda(&self) -> &ScalarField {
        &self.lambda
    }

    /// `λ(x)`, which must be positive.
    pub fn eval(&self, x: &Vector) -> Result<f64> {
        let l = self.lambda.eval(x)?;
        if !(l > 0.0) {
            return Err(Error::Domain(format!("dilation {l} is not positive at {:?}", x.as_slice())));
        }
        Ok(l)
    }

    /// The scalar field `1/λ²`.
    pub fn inv_square(&self) -> ScalarField {
        self.lambda.compose("1/lambda^2", |l| 1.0 / (l * l), |l| -2.0 / (l * l * l))
    }
}

/// `g'(F∗X₁, F∗X₁)` for the first unit horizontal vector `X₁`.
fn estimate_square_dilation(map: &SmoothSubmersionMap, x: &Vector) -> Result<f64> {
    let split = map.split_at(x)?;
    let j = map.jacobian(x)?;
    let gb = map.base.metric_at(&map.eval(x)?)?;
    let fx = &j * &split.horizontal[0];
    Ok(inner(&gb, &fx, &fx))
}

/// One sample of the conformality check.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalSample {
    pub point: Vec<f64>,
    /// `λ` estimated from the first horizontal direction.
    pub lambda: f64,
    /// `max |g'(F∗X_j, F∗X_k) − λ² δ_jk|` over horizontal pairs.
    pub residual: f64,
    /// `|λ_est − λ|` against a supplied dilation, when there is one.
    pub analytic_gap: Option<f64>,
}

/// Result of [`check_conformal`].
#[derive(Clone, Debug)]
pub struct ConformalReport {
    pub samples: Vec<ConformalSample>,
    pub dilation: DilationField,
}

impl ConformalReport {
    pub fn residual_max(&self) -> f64 {
        self.samples.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    /// True when every sample passes `1e-8·max(1, λ²)`.
    pub fn is_conformal(&self) -> bool {
        self.samples
            .iter()
            .all(|s| s.residual <= CONFORMAL_TOL * (s.lambda * s.lambda).max(1.0))
    }
}

/// Estimates `λ` at each point and measures the conformality residual.
/// When `analytic` is given it becomes the report's dilation and the gap to
/// the estimate is recorded.
pub fn check_conformal(
    map: &SmoothSubmersionMap,
    points: &[ChartPoint],
    analytic: Option<&DilationField>,
) -> Result<ConformalReport> {
    let mut samples = Vec::with_capacity(points.len());
    for p in points {
        let x = p.coords();
        map.check_rank(x)?;
        let split = map.split_at(x)?;
        let j = map.jacobian(x)?;
        let gb = map.base.metric_at(&map.eval(x)?)?;
        let pushed: Vec<Vector> = split.horizontal.iter().map(|h| &j * h).collect();
        let l2 = inner(&gb, &pushed[0], &pushed[0]);
        if !(l2 > 0.0) {
            return Err(Error::Numeric(format!("horizontal push-forward vanishes at {:?}", p.to_vec())));
        }
        let mut residual: f64 = 0.0;
        for a in 0..pushed.len() {
            for b in 0..pushed.len() {
                let target = if a == b { l2 } else { 0.0 };
                residual = residual.max((inner(&gb, &pushed[a], &pushed[b]) - target).abs());
            }
        }
        let lambda = l2.sqrt();
        let analytic_gap = match analytic {
            Some(d) => Some((d.eval(x)? - lambda).abs()),
            None => None,
        };
        samples.push(ConformalSample {
            point: p.to_vec(),
            lambda,
            residual,
            analytic_gap,
        });
    }
    let dilation = analytic.cloned().unwrap_or_else(|| DilationField::estimated(map));
    Ok(ConformalReport { samples, dilation })
}

#[cfg(test)]
mod tests;
