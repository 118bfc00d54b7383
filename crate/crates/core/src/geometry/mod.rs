//! Pointwise Riemannian geometry on a single global chart.
//!
//! A [`ChartManifold`] is a dimension plus a metric evaluator. Everything else
//! (Christoffel symbols, covariant derivatives, curvature, gradient,
//! divergence, Laplacian, Hessian) is computed from the metric at a point,
//! using analytic metric partials when the metric supplies them and central
//! finite differences otherwise.

mod calculus;
mod connection;
mod curvature;
mod field;
mod frame;

use std::fmt;
use std::sync::Arc;

pub use connection::ChristoffelTensor;
pub use curvature::{RiemannTensor, DEGENERATE_PLANE};
pub use field::{
    Matrix, PointFn, ScalarField, Vector, VectorField, DEFAULT_DERIVATIVE_STEP, NESTED_DERIVATIVE_STEP,
};
pub use frame::{gram_schmidt, DEGENERATE_NORM};

pub(crate) use field::{coordinate_step, directional_difference, ensure_finite};

use crate::error::{Error, Result};

/// Symmetry tolerance for metric evaluations.
pub const METRIC_SYMMETRY_TOL: f64 = 1e-12;

/// Default relative step for the finite-difference layer that turns
/// Christoffel symbols into curvature.
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-4;

/// A point in the chart. Coordinates are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    coords: Vector,
}

impl ChartPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        ChartPoint::from_vector(Vector::from_vec(coords.into()))
    }

    pub fn from_vector(coords: Vector) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Argument("chart point has no coordinates".into()));
        }
        ensure_finite("chart point", coords.as_slice())?;
        Ok(ChartPoint { coords })
    }

    pub(crate) fn new_unchecked(coords: Vector) -> Self {
        ChartPoint { coords }
    }

    pub fn coords(&self) -> &Vector {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.coords.iter().copied().collect()
    }
}

/// A tangent vector together with its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: ChartPoint,
    components: Vector,
}

impl TangentVector {
    pub fn new(base: ChartPoint, components: impl Into<Vec<f64>>) -> Result<Self> {
        let components = Vector::from_vec(components.into());
        if components.len() != base.dim() {
            return Err(Error::Argument(format!(
                "tangent vector has {} components at a {}-dimensional point",
                components.len(),
                base.dim()
            )));
        }
        ensure_finite("tangent vector", components.as_slice())?;
        Ok(TangentVector { base, components })
    }

    pub(crate) fn new_unchecked(base: ChartPoint, components: Vector) -> Self {
        TangentVector { base, components }
    }

    pub fn base(&self) -> &ChartPoint {
        &self.base
    }

    pub fn components(&self) -> &Vector {
        &self.components
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.components.iter().copied().collect()
    }

    fn same_base(&self, other: &TangentVector) -> Result<()> {
        if self.base != other.base {
            return Err(Error::Argument(format!(
                "base points differ: {:?} vs {:?}",
                self.base.to_vec(),
                other.base.to_vec()
            )));
        }
        Ok(())
    }
}

/// The metric tensor field `g_ij(x)`.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    eval: PointFn<Matrix>,
    partials: Option<PointFn<Vec<Matrix>>>,
    derivative_step: f64,
    curvature_step: f64,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim)
            .field("analytic_partials", &self.partials.is_some())
            .field("derivative_step", &self.derivative_step)
            .finish()
    }
}

impl MetricField {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&Vector) -> Result<Matrix> + Send + Sync + 'static,
    {
        MetricField {
            dim,
            eval: Arc::new(eval),
            partials: None,
            derivative_step: DEFAULT_DERIVATIVE_STEP,
            curvature_step: DEFAULT_CURVATURE_STEP,
        }
    }

    /// The constant identity metric.
    pub fn euclidean(dim: usize) -> Self {
        MetricField::new(dim, move |_| Ok(Matrix::identity(dim, dim)))
            .with_partials(move |_| Ok(vec![Matrix::zeros(dim, dim); dim]))
    }

    /// Supplies `∂g/∂x_k` for each `k`, which then takes precedence over
    /// finite differences.
    pub fn with_partials<F>(mut self, partials: F) -> Self
    where
        F: Fn(&Vector) -> Result<Vec<Matrix>> + Send + Sync + 'static,
    {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn with_derivative_step(mut self, step: f64) -> Self {
        self.derivative_step = step;
        self
    }

    pub fn with_curvature_step(mut self, step: f64) -> Self {
        self.curvature_step = step;
        self
    }

    /// The same metric with analytic partials dropped.
    pub fn without_partials(&self) -> Self {
        MetricField {
            partials: None,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn derivative_step(&self) -> f64 {
        self.derivative_step
    }

    pub fn curvature_step(&self) -> f64 {
        self.curvature_step
    }

    pub fn eval(&self, x: &Vector) -> Result<Matrix> {
        if x.len() != self.dim {
            return Err(Error::Argument(format!(
                "metric of dimension {} evaluated at a {}-dimensional point",
                self.dim,
                x.len()
            )));
        }
        let g = (self.eval)(x)?;
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(Error::Evaluation(format!(
                "metric returned a {}x{} matrix, expected {}x{}",
                g.nrows(),
                g.ncols(),
                self.dim,
                self.dim
            )));
        }
        ensure_finite("metric", g.as_slice())?;
        Ok(g)
    }

    /// `∂g/∂x_k` for every `k`.
    pub fn partials(&self, x: &Vector) -> Result<Vec<Matrix>> {
        if let Some(d) = &self.partials {
            let dg = d(x)?;
            if dg.len() != self.dim {
                return Err(Error::Evaluation("metric partials have the wrong length".into()));
            }
            for m in &dg {
                ensure_finite("metric partials", m.as_slice())?;
            }
            return Ok(dg);
        }
        let mut out = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let h = coordinate_step(x[k], self.derivative_step);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let d = (self.eval(&xp)? - self.eval(&xm)?) / (2.0 * h);
            out.push((&d + d.transpose()) * 0.5);
        }
        Ok(out)
    }
}

/// A Riemannian manifold covered by one global chart.
#[derive(Clone, Debug)]
pub struct ChartManifold {
    name: String,
    dim: usize,
    metric: MetricField,
}

impl ChartManifold {
    pub fn new(name: impl Into<String>, metric: MetricField) -> Result<Self> {
        let dim = metric.dim();
        if dim == 0 {
            return Err(Error::Argument("manifold dimension must be at least 1".into()));
        }
        Ok(ChartManifold {
            name: name.into(),
            dim,
            metric,
        })
    }

    pub fn euclidean(dim: usize) -> Self {
        ChartManifold::new(format!("euclidean{dim}"), MetricField::euclidean(dim)).expect("dim >= 1")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    /// A copy of this manifold whose metric ignores its analytic partials.
    pub fn with_finite_differences(&self) -> Self {
        ChartManifold {
            name: self.name.clone(),
            dim: self.dim,
            metric: self.metric.without_partials(),
        }
    }

    pub fn point(&self, coords: impl Into<Vec<f64>>) -> Result<ChartPoint> {
        let p = ChartPoint::new(coords)?;
        self.check_point(&p)?;
        Ok(p)
    }

    pub fn vector(&self, p: &ChartPoint, components: impl Into<Vec<f64>>) -> Result<TangentVector> {
        self.check_point(p)?;
        TangentVector::new(p.clone(), components)
    }

    fn check_point(&self, p: &ChartPoint) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::Argument(format!(
                "point of dimension {} on a {}-dimensional manifold",
                p.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// `g(x)` as a matrix.
    pub fn metric_at(&self, x: &Vector) -> Result<Matrix> {
        self.metric.eval(x)
    }

    /// Checks symmetry and positive-definiteness of the metric at `p`.
    pub fn validate_at(&self, p: &ChartPoint) -> Result<()> {
        self.check_point(p)?;
        let g = self.metric.eval(p.coords())?;
        let asym = (&g - g.transpose()).amax();
        if asym > METRIC_SYMMETRY_TOL {
            return Err(Error::Validation {
                invariant: "metric symmetry".into(),
                point: p.to_vec(),
                detail: format!("|g - g^T| = {asym:e}"),
            });
        }
        let eig = nalgebra::SymmetricEigen::new((&g + g.transpose()) * 0.5);
        let min = eig.eigenvalues.min();
        if min.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Validation {
                invariant: "metric positive-definiteness".into(),
                point: p.to_vec(),
                detail: format!("smallest eigenvalue {min:e}"),
            });
        }
        Ok(())
    }

    /// `g(u, v) = uᵀ g(p) v`.
    pub fn metric_inner(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        u.same_base(v)?;
        self.check_point(u.base())?;
        if u.components.len() != self.dim || v.components.len() != self.dim {
            return Err(Error::Argument("vector dimension mismatch".into()));
        }
        let g = self.metric.eval(u.base.coords())?;
        let r = inner(&g, &u.components, &v.components);
        if !r.is_finite() {
            return Err(Error::Numeric("metric inner product is not finite".into()));
        }
        Ok(r)
    }

    /// `|v|_g`.
    pub fn norm(&self, v: &TangentVector) -> Result<f64> {
        Ok(self.metric_inner(v, v)?.max(0.0).sqrt())
    }

    /// A g-orthonormal basis of `T_pM` from Gram–Schmidt on the coordinate
    /// axes taken in `order` (index order when `None`).
    pub fn orthonormal_frame(&self, p: &ChartPoint, order: Option<&[usize]>) -> Result<Vec<Vector>> {
        self.check_point(p)?;
        let g = self.metric.eval(p.coords())?;
        let idx: Vec<usize> = match order {
            Some(o) => o.to_vec(),
            None => (0..self.dim).collect(),
        };
        if idx.len() != self.dim {
            return Err(Error::Argument("frame seed order must list every axis".into()));
        }
        let axes: Vec<Vector> = idx
            .iter()
            .map(|&i| {
                let mut e = Vector::zeros(self.dim);
                e[i] = 1.0;
                e
            })
            .collect();
        gram_schmidt(&g, &axes)
    }
}

/// `uᵀ g v`.
pub fn inner(g: &Matrix, u: &Vector, v: &Vector) -> f64 {
    (g * v).dot(u)
}

/// Solves `g x = b`; LU keeps diagonal metrics exact.
pub(crate) fn solve_metric(g: &Matrix, b: &Vector, at: &Vector) -> Result<Vector> {
    g.clone()
        .lu()
        .solve(b)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::SingularMetric { at: at.iter().copied().collect() })
}
