//! Scalar and vector fields over a chart, with optional analytic derivatives.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ChartPoint, TangentVector};
use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// A thread-safe pure function of chart coordinates.
pub type PointFn<T> = Arc<dyn Fn(&Vector) -> Result<T> + Send + Sync>;

/// Relative finite-difference step used when no analytic derivative exists.
pub const DEFAULT_DERIVATIVE_STEP: f64 = 1e-6;

/// Step for a second finite-difference layer stacked on top of a first one.
pub const NESTED_DERIVATIVE_STEP: f64 = 1e-4;

pub(crate) fn coordinate_step(x: f64, rel: f64) -> f64 {
    rel * x.abs().max(1.0)
}

/// Central difference of `f` along `w` at `x`, with the displacement sized
/// relative to the point's magnitude.
pub(crate) fn directional_difference<T, F>(f: F, x: &Vector, w: &Vector, rel: f64) -> Result<T>
where
    F: Fn(&Vector) -> Result<T>,
    T: std::ops::Sub<Output = T> + std::ops::Div<f64, Output = T>,
{
    let wmax = w.amax();
    if wmax == 0.0 {
        // derivative along the zero vector is zero; f(x) - f(x) has the right shape
        let v = f(x)?;
        let z = f(x)?;
        return Ok((v - z) / 1.0);
    }
    let xmax = x.amax();
    let h = rel * xmax.max(1.0) / wmax;
    let plus = f(&(x + w * h))?;
    let minus = f(&(x - w * h))?;
    Ok((plus - minus) / (2.0 * h))
}

pub(crate) fn ensure_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Evaluation(format!("{what} produced a non-finite value")))
    }
}

/// A smooth function `M -> R`.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    value: PointFn<f64>,
    partials: Option<PointFn<Vector>>,
    step: f64,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("analytic_partials", &self.partials.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(&Vector) -> Result<f64> + Send + Sync + 'static,
    {
        ScalarField {
            name: name.into(),
            value: Arc::new(value),
            partials: None,
            step: DEFAULT_DERIVATIVE_STEP,
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(format!("{c}"), move |_| Ok(c)).with_partials(|x| Ok(Vector::zeros(x.len())))
    }

    /// Supplies exact first partials `∂f/∂x_i`.
    pub fn with_partials<F>(mut self, partials: F) -> Self
    where
        F: Fn(&Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn eval(&self, x: &Vector) -> Result<f64> {
        let v = (self.value)(x)?;
        ensure_finite(&self.name, &[v])?;
        Ok(v)
    }

    pub fn value(&self, p: &ChartPoint) -> Result<f64> {
        self.eval(p.coords())
    }

    /// Coordinate partials, analytic when available.
    pub fn partials_at(&self, x: &Vector) -> Result<Vector> {
        if let Some(d) = &self.partials {
            let v = d(x)?;
            ensure_finite(&self.name, v.as_slice())?;
            return Ok(v);
        }
        let mut out = Vector::zeros(x.len());
        for i in 0..x.len() {
            let h = coordinate_step(x[i], self.step);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            out[i] = (self.eval(&xp)? - self.eval(&xm)?) / (2.0 * h);
        }
        Ok(out)
    }

    /// Symmetric matrix of second coordinate partials. Differences the
    /// analytic partials when present, otherwise uses second differences.
    pub fn coordinate_hessian(&self, x: &Vector) -> Result<Matrix> {
        let m = x.len();
        let mut h = Matrix::zeros(m, m);
        if self.partials.is_some() {
            for i in 0..m {
                let s = coordinate_step(x[i], self.step);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += s;
                xm[i] -= s;
                let d = (self.partials_at(&xp)? - self.partials_at(&xm)?) / (2.0 * s);
                h.set_column(i, &d);
            }
        } else {
            let f0 = self.eval(x)?;
            let steps: Vec<f64> = (0..m).map(|i| coordinate_step(x[i], NESTED_DERIVATIVE_STEP)).collect();
            let shifted = |pairs: &[(usize, f64)]| -> Result<f64> {
                let mut y = x.clone();
                for &(i, d) in pairs {
                    y[i] += d;
                }
                self.eval(&y)
            };
            for i in 0..m {
                let a = steps[i];
                h[(i, i)] = (shifted(&[(i, a)])? - 2.0 * f0 + shifted(&[(i, -a)])?) / (a * a);
                for j in 0..i {
                    let b = steps[j];
                    let v = (shifted(&[(i, a), (j, b)])? - shifted(&[(i, a), (j, -b)])?
                        - shifted(&[(i, -a), (j, b)])?
                        + shifted(&[(i, -a), (j, -b)])?)
                        / (4.0 * a * b);
                    h[(i, j)] = v;
                    h[(j, i)] = v;
                }
            }
        }
        ensure_finite(&self.name, h.as_slice())?;
        Ok((&h + h.transpose()) * 0.5)
    }

    /// The derivative `w(f)` at `x`.
    pub fn directional(&self, x: &Vector, w: &Vector) -> Result<f64> {
        Ok(self.partials_at(x)?.dot(w))
    }

    /// Pointwise composition `phi ∘ f` with derivative `phi'`.
    pub fn compose<P, D>(&self, name: impl Into<String>, phi: P, dphi: D) -> ScalarField
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inner = self.clone();
        let inner_d = self.clone();
        let phi = Arc::new(phi);
        ScalarField::new(name, move |x| Ok(phi(inner.eval(x)?)))
            .with_partials(move |x| Ok(inner_d.partials_at(x)? * dphi(inner_d.eval(x)?)))
            .with_step(self.step)
    }
}

/// A smooth vector field, given by its coordinate components.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    eval: PointFn<Vector>,
    jacobian: Option<PointFn<Matrix>>,
    step: f64,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("name", &self.name)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl VectorField {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        VectorField {
            name: name.into(),
            eval: Arc::new(eval),
            jacobian: None,
            step: DEFAULT_DERIVATIVE_STEP,
        }
    }

    /// The field with the same coordinate components everywhere.
    pub fn constant(name: impl Into<String>, components: Vector) -> Self {
        let m = components.len();
        VectorField::new(name, move |_| Ok(components.clone())).with_jacobian(move |_| Ok(Matrix::zeros(m, m)))
    }

    /// Supplies the exact Jacobian, entry `(k, i)` being `∂V^k/∂x_i`.
    pub fn with_jacobian<F>(mut self, jacobian: F) -> Self
    where
        F: Fn(&Vector) -> Result<Matrix> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        let v = (self.eval)(x)?;
        if v.len() != x.len() {
            return Err(Error::Argument(format!(
                "field `{}` returned {} components at a {}-dimensional point",
                self.name,
                v.len(),
                x.len()
            )));
        }
        ensure_finite(&self.name, v.as_slice())?;
        Ok(v)
    }

    pub fn at(&self, p: &ChartPoint) -> Result<TangentVector> {
        Ok(TangentVector::new_unchecked(p.clone(), self.eval(p.coords())?))
    }

    /// Componentwise derivative `D_w V` (no connection term).
    pub fn directional_derivative(&self, x: &Vector, w: &Vector) -> Result<Vector> {
        if let Some(j) = &self.jacobian {
            let jac = j(x)?;
            ensure_finite(&self.name, jac.as_slice())?;
            return Ok(jac * w);
        }
        directional_difference(|y| self.eval(y), x, w, self.step)
    }

    /// The field `c·V`.
    pub fn scaled(&self, c: f64) -> VectorField {
        let inner = self.clone();
        let inner_d = self.clone();
        let base = VectorField::new(format!("{c}*{}", self.name), move |x| Ok(inner.eval(x)? * c)).with_step(self.step);
        if self.jacobian.is_some() {
            base.with_jacobian(move |x| {
                let j = inner_d.jacobian.as_ref().expect("checked above");
                Ok(j(x)? * c)
            })
        } else {
            base
        }
    }
}
