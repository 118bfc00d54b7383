use super::{DilationField, SmoothSubmersionMap};
use crate::error::{Error, Result};
use crate::geometry::{
    directional_difference, inner, ChartPoint, ScalarField, TangentVector, Vector, VectorField,
    NESTED_DERIVATIVE_STEP,
};

/// `(∇F∗)(X, Y)` computed directly and from the conformal formula.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondFundamentalFormValue {
    pub at: ChartPoint,
    /// `∇^B_{F∗X}F∗Y − F∗(∇_X Y)`, a vector at `F(p)`.
    pub value: TangentVector,
    /// `−(λ²/2){X(1/λ²)F∗Y + Y(1/λ²)F∗X − g(X,Y)F∗(grad_H 1/λ²)}`.
    pub formula: TangentVector,
    /// Base-metric norm of `value − formula`.
    pub residual: f64,
}

/// `τ(F)` as a trace and in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct TensionValue {
    pub at: ChartPoint,
    /// `Σ_k (∇F∗)(e_k, e_k)` over an orthonormal frame of `T_pM`.
    pub trace: TangentVector,
    /// `(n−2)(λ²/2)F∗(∇_H 1/λ²) − (m−n)F∗(H)`.
    pub closed_form: TangentVector,
    pub residual: f64,
}

/// Outcome of [`SmoothSubmersionMap::harmonicity_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicityReport {
    /// Verdict from the tension field.
    pub harmonic: bool,
    /// `max ‖grad_H f‖` over the points.
    pub horizontal_gradient_max: f64,
    /// `max ‖τ(F)‖` over the points.
    pub tension_max: f64,
    /// Whether the two criteria agree.
    pub consistent: bool,
    pub tolerance: f64,
}

impl SmoothSubmersionMap {
    /// Second fundamental form for basic fields `X`, `Y` at `p`.
    pub fn second_fundamental_form(
        &self,
        dilation: &DilationField,
        a: &VectorField,
        b: &VectorField,
        p: &ChartPoint,
    ) -> Result<SecondFundamentalFormValue> {
        let x = self.total_point(p)?;
        self.ensure_basic(a, x)?;
        self.ensure_basic(b, x)?;
        let direct = self.sff_direct_at(x, &a.eval(x)?, b)?;
        let formula = self.sff_formula_at(x, dilation, &a.eval(x)?, &b.eval(x)?)?;
        let fp = self.apply(p)?;
        let gb = self.base().metric_at(fp.coords())?;
        let diff = &direct - &formula;
        let residual = inner(&gb, &diff, &diff).max(0.0).sqrt();
        Ok(SecondFundamentalFormValue {
            at: p.clone(),
            value: TangentVector::new_unchecked(fp.clone(), direct),
            formula: TangentVector::new_unchecked(fp, formula),
            residual,
        })
    }

    /// `D_a(J b) + Γ^B(J a, J b) − J ∇_a b` at `x`.
    pub(crate) fn sff_direct_at(&self, x: &Vector, a: &Vector, b: &VectorField) -> Result<Vector> {
        let step = if self.has_analytic_jacobian() { b.step() } else { NESTED_DERIVATIVE_STEP };
        let pushed = |y: &Vector| -> Result<Vector> { Ok(self.jacobian(y)? * b.eval(y)?) };
        let d: Vector = directional_difference(pushed, x, a, step)?;
        let j = self.jacobian(x)?;
        let fx = ChartPoint::from_vector(self.eval(x)?)?;
        let gamma_b = self.base().christoffel(&fx)?;
        let cov = self.total().covariant_at(x, a, b)?;
        Ok(d + gamma_b.contract(&(&j * a), &(&j * b.eval(x)?)) - j * cov)
    }

    fn sff_formula_at(&self, x: &Vector, dilation: &DilationField, a: &Vector, b: &Vector) -> Result<Vector> {
        let inv = dilation.inv_square();
        let split = self.split_at(x)?;
        let (_, grad_h) = self.gradient_parts(x, &inv)?;
        let l2 = dilation.eval(x)?.powi(2);
        let j = self.jacobian(x)?;
        let da = inv.directional(x, a)?;
        let db = inv.directional(x, b)?;
        let v = &j * b * da + &j * a * db - &j * grad_h * split.inner(a, b);
        Ok(v * (-0.5 * l2))
    }

    /// `(∇F∗)(a, b)` as a tensor in coordinates:
    /// `a^i b^j (∂_i∂_j F^γ − Γ^k_ij ∂_k F^γ) + Γ^B(Ja, Jb)`.
    pub(crate) fn sff_tensor_at(&self, x: &Vector, a: &Vector, b: &Vector) -> Result<Vector> {
        let hess = self.hessians(x)?;
        let j = self.jacobian(x)?;
        let gamma = self.total().christoffel(&ChartPoint::from_vector(x.clone())?)?;
        let fx = ChartPoint::from_vector(self.eval(x)?)?;
        let gamma_b = self.base().christoffel(&fx)?;
        let mut out = Vector::from_iterator(hess.len(), hess.iter().map(|h| inner(h, a, b)));
        out -= &j * gamma.contract(a, b);
        out += gamma_b.contract(&(&j * a), &(&j * b));
        Ok(out)
    }

    /// Tension field at `p`.
    pub fn tension_field(&self, dilation: &DilationField, p: &ChartPoint) -> Result<TensionValue> {
        let x = self.total_point(p)?;
        let split = self.split_at(x)?;
        let mut trace = Vector::zeros(self.base_dim());
        for e in split.vertical().iter().chain(split.horizontal()) {
            trace += self.sff_tensor_at(x, e, e)?;
        }
        let (m, n) = (self.total_dim() as f64, self.base_dim() as f64);
        let (_, grad_h) = self.gradient_parts(x, &dilation.inv_square())?;
        let l2 = dilation.eval(x)?.powi(2);
        let j = self.jacobian(x)?;
        let h = self.mean_curvature_at(x)?;
        let closed = &j * grad_h * ((n - 2.0) * l2 / 2.0) - &j * h * (m - n);
        let fp = self.apply(p)?;
        let gb = self.base().metric_at(fp.coords())?;
        let diff = &trace - &closed;
        let residual = inner(&gb, &diff, &diff).max(0.0).sqrt();
        Ok(TensionValue {
            at: p.clone(),
            trace: TangentVector::new_unchecked(fp.clone(), trace),
            closed_form: TangentVector::new_unchecked(fp, closed),
            residual,
        })
    }

    /// Compares "f constant along horizontals" with "τ(F) = 0" after checking
    /// that `F` is homothetic and `λ` is constant along fibers.
    pub fn harmonicity_check(
        &self,
        dilation: &DilationField,
        f: &ScalarField,
        points: &[ChartPoint],
        tolerance: f64,
    ) -> Result<HarmonicityReport> {
        let inv = dilation.inv_square();
        for p in points {
            let x = self.total_point(p)?;
            let (grad_v, grad_h) = self.gradient_parts(x, &inv)?;
            let split = self.split_at(x)?;
            let scale = inv.eval(x)?.abs().max(1.0);
            let nh = split.norm(&grad_h);
            if nh > tolerance * scale {
                return Err(Error::PreconditionViolated(format!(
                    "homothetic: |grad_H(1/lambda^2)| = {nh:e} at {:?}",
                    p.to_vec()
                )));
            }
            let nv = split.norm(&grad_v);
            if nv > tolerance * scale {
                return Err(Error::PreconditionViolated(format!(
                    "dilation constant on fibers: |grad_v(1/lambda^2)| = {nv:e} at {:?}",
                    p.to_vec()
                )));
            }
        }
        let mut horizontal_gradient_max: f64 = 0.0;
        let mut tension_max: f64 = 0.0;
        for p in points {
            let x = p.coords();
            let (_, gh) = self.gradient_parts(x, f)?;
            horizontal_gradient_max = horizontal_gradient_max.max(self.split_at(x)?.norm(&gh));
            let tau = self.tension_field(dilation, p)?;
            let gb = self.base().metric_at(tau.trace.base().coords())?;
            let t = tau.trace.components();
            tension_max = tension_max.max(inner(&gb, t, t).max(0.0).sqrt());
        }
        let by_f = horizontal_gradient_max <= tolerance;
        let harmonic = tension_max <= tolerance;
        Ok(HarmonicityReport {
            harmonic,
            horizontal_gradient_max,
            tension_max,
            consistent: by_f == harmonic,
            tolerance,
        })
    }
}
