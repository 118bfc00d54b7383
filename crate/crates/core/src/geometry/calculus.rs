use super::{
    inner, solve_metric, ChartManifold, ChartPoint, ScalarField, TangentVector, Vector, VectorField,
    DEFAULT_DERIVATIVE_STEP, NESTED_DERIVATIVE_STEP,
};
use crate::error::{Error, Result};

impl ChartManifold {
    /// `∇f` at `p`.
    pub fn gradient(&self, f: &ScalarField, p: &ChartPoint) -> Result<TangentVector> {
        self.check_point(p)?;
        Ok(TangentVector::new_unchecked(p.clone(), self.gradient_at(f, p.coords())?))
    }

    pub(crate) fn gradient_at(&self, f: &ScalarField, x: &Vector) -> Result<Vector> {
        let g = self.metric().eval(x)?;
        let df = f.partials_at(x)?;
        solve_metric(&g, &df, x)
    }

    /// `∇f` as a vector field. The field is differentiated by finite
    /// differences, with a coarser step when `f` itself is differenced.
    pub fn gradient_field(&self, f: &ScalarField) -> VectorField {
        let man = self.clone();
        let f2 = f.clone();
        let step = if f.has_analytic_partials() && self.metric().has_analytic_partials() {
            DEFAULT_DERIVATIVE_STEP
        } else {
            NESTED_DERIVATIVE_STEP
        };
        VectorField::new(format!("grad {}", f.name()), move |x| man.gradient_at(&f2, x)).with_step(step)
    }

    /// `div V` at `p`, traced over the orthonormal frame built from the
    /// coordinate axes in `order` (index order when `None`).
    pub fn divergence_with_order(&self, field: &VectorField, p: &ChartPoint, order: Option<&[usize]>) -> Result<f64> {
        let frame = self.orthonormal_frame(p, order)?;
        let x = p.coords();
        let g = self.metric().eval(x)?;
        let mut total = 0.0;
        for e in &frame {
            let d = self.covariant_at(x, e, field)?;
            total += inner(&g, &d, e);
        }
        if !total.is_finite() {
            return Err(Error::Numeric("non-finite divergence".into()));
        }
        Ok(total)
    }

    /// `div V` at `p`.
    pub fn divergence(&self, field: &VectorField, p: &ChartPoint) -> Result<f64> {
        self.divergence_with_order(field, p, None)
    }

    /// `Δf = div(∇f)` at `p`.
    pub fn laplacian(&self, f: &ScalarField, p: &ChartPoint) -> Result<f64> {
        self.divergence(&self.gradient_field(f), p)
    }

    /// `Hess f(u, v) = g(∇_u ∇f, v)`, evaluated through the coordinate form.
    pub fn hessian(&self, f: &ScalarField, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        if u.base() != v.base() {
            return Err(Error::Argument("hessian arguments must share a base point".into()));
        }
        self.check_point(u.base())?;
        let x = u.base().coords();
        self.hessian_at(f, x, u.components(), v.components())
    }

    pub(crate) fn hessian_at(&self, f: &ScalarField, x: &Vector, u: &Vector, v: &Vector) -> Result<f64> {
        // ∂_i∂_j f − Γ^k_ij ∂_k f, symmetric by construction
        let h = f.coordinate_hessian(x)?;
        let df = f.partials_at(x)?;
        let gamma = self.christoffel_at(x)?;
        let r = inner(&h, u, v) - gamma.contract(u, v).dot(&df);
        if !r.is_finite() {
            return Err(Error::Numeric("non-finite hessian".into()));
        }
        Ok(r)
    }
}
