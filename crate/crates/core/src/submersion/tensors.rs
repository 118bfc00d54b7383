use super::{DilationField, SmoothSubmersionMap, VerticalHorizontalSplit};
use crate::error::{Error, Result};
use crate::geometry::{ChartPoint, ScalarField, TangentVector, Vector, VectorField};

/// Which O'Neill tensor a value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ONeillKind {
    A,
    T,
}

/// `A_E F` or `T_E F` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ONeillValue {
    pub at: ChartPoint,
    pub kind: ONeillKind,
    pub output: TangentVector,
}

impl SmoothSubmersionMap {
    /// `T_E F = H∇_{νE}νF + ν∇_{νE}HF`.
    pub fn tensor_t(&self, e: &VectorField, f: &VectorField, p: &ChartPoint) -> Result<ONeillValue> {
        let x = self.total_point(p)?;
        let out = self.t_at(x, &e.eval(x)?, f)?;
        Ok(self.oneill(p, ONeillKind::T, out))
    }

    /// `A_E F = H∇_{HE}νF + ν∇_{HE}HF`.
    pub fn tensor_a(&self, e: &VectorField, f: &VectorField, p: &ChartPoint) -> Result<ONeillValue> {
        let x = self.total_point(p)?;
        let out = self.a_at(x, &e.eval(x)?, f)?;
        Ok(self.oneill(p, ONeillKind::A, out))
    }

    /// `T_e f` for tangent vectors, extending `f` with constant components.
    pub fn tensor_t_vectors(&self, e: &TangentVector, f: &TangentVector) -> Result<ONeillValue> {
        let p = same_base(e, f)?;
        let x = self.total_point(p)?;
        let out = self.t_at(x, e.components(), &VectorField::constant("f", f.components().clone()))?;
        Ok(self.oneill(p, ONeillKind::T, out))
    }

    /// `A_e f` for tangent vectors, extending `f` with constant components.
    pub fn tensor_a_vectors(&self, e: &TangentVector, f: &TangentVector) -> Result<ONeillValue> {
        let p = same_base(e, f)?;
        let x = self.total_point(p)?;
        let out = self.a_at(x, e.components(), &VectorField::constant("f", f.components().clone()))?;
        Ok(self.oneill(p, ONeillKind::A, out))
    }

    fn oneill(&self, p: &ChartPoint, kind: ONeillKind, out: Vector) -> ONeillValue {
        ONeillValue {
            at: p.clone(),
            kind,
            output: TangentVector::new_unchecked(p.clone(), out),
        }
    }

    pub(crate) fn total_point<'a>(&self, p: &'a ChartPoint) -> Result<&'a Vector> {
        if p.dim() != self.total_dim() {
            return Err(Error::Argument(format!(
                "point of dimension {} on a {}-dimensional total space",
                p.dim(),
                self.total_dim()
            )));
        }
        Ok(p.coords())
    }

    pub(crate) fn t_at(&self, x: &Vector, e: &Vector, f: &VectorField) -> Result<Vector> {
        let split = self.split_at(x)?;
        let ve = split.vertical_part(e);
        self.oneill_terms(x, &split, &ve, f)
    }

    pub(crate) fn a_at(&self, x: &Vector, e: &Vector, f: &VectorField) -> Result<Vector> {
        let split = self.split_at(x)?;
        let he = split.horizontal_part(e);
        self.oneill_terms(x, &split, &he, f)
    }

    /// `H∇_w νF + ν∇_w HF`.
    fn oneill_terms(&self, x: &Vector, split: &VerticalHorizontalSplit, w: &Vector, f: &VectorField) -> Result<Vector> {
        if w.amax() == 0.0 {
            return Ok(Vector::zeros(x.len()));
        }
        let nf = self.vertical_part_field(f);
        let hf = self.horizontal_part_field(f);
        let d_nf = self.total().covariant_at(x, w, &nf)?;
        let d_hf = self.total().covariant_at(x, w, &hf)?;
        Ok(split.horizontal_part(&d_nf) + split.vertical_part(&d_hf))
    }

    /// Mean curvature vector `H = (1/(m−n)) Σ T_{U_i}U_i` of the fibers.
    pub fn mean_curvature(&self, p: &ChartPoint) -> Result<TangentVector> {
        let x = self.total_point(p)?;
        Ok(TangentVector::new_unchecked(p.clone(), self.mean_curvature_at(x)?))
    }

    pub(crate) fn mean_curvature_at(&self, x: &Vector) -> Result<Vector> {
        let split = self.split_at(x)?;
        let mut sum = Vector::zeros(x.len());
        for u in split.vertical() {
            sum += self.t_at(x, u, &VectorField::constant("U", u.clone()))?;
        }
        Ok(sum / self.fiber_dim() as f64)
    }

    /// `H` as a vector field; differentiating it stacks a second
    /// finite-difference layer, so it carries the coarser step.
    pub fn mean_curvature_field(&self) -> VectorField {
        let map = self.clone();
        VectorField::new("H", move |x| map.mean_curvature_at(x)).with_step(crate::geometry::NESTED_DERIVATIVE_STEP)
    }

    /// `max ‖T_{U_i}U_j − g(U_i,U_j)H‖` over the orthonormal vertical basis.
    pub fn umbilical_residual(&self, p: &ChartPoint) -> Result<f64> {
        let x = self.total_point(p)?;
        let split = self.split_at(x)?;
        let h = self.mean_curvature_at(x)?;
        let mut worst: f64 = 0.0;
        for (i, ui) in split.vertical().iter().enumerate() {
            for (j, uj) in split.vertical().iter().enumerate() {
                let mut t = self.t_at(x, ui, &VectorField::constant("U", uj.clone()))?;
                if i == j {
                    t -= &h;
                }
                worst = worst.max(split.norm(&t));
            }
        }
        Ok(worst)
    }

    /// `[X, Y]` at `x`, from componentwise derivatives of the two fields.
    pub fn lie_bracket_at(&self, x: &Vector, a: &VectorField, b: &VectorField) -> Result<Vector> {
        let av = a.eval(x)?;
        let bv = b.eval(x)?;
        Ok(b.directional_derivative(x, &av)? - a.directional_derivative(x, &bv)?)
    }

    /// Vertical and horizontal parts of `∇φ` at `x`.
    pub(crate) fn gradient_parts(&self, x: &Vector, phi: &ScalarField) -> Result<(Vector, Vector)> {
        let split = self.split_at(x)?;
        let grad = self.total().gradient_at(phi, x)?;
        Ok((split.vertical_part(&grad), split.horizontal_part(&grad)))
    }

    /// `‖A_X Y − ½(ν[X,Y] − λ² g(X,Y) ∇_ν(1/λ²))‖` at `p`.
    pub fn a_formula_residual(
        &self,
        dilation: &DilationField,
        a: &VectorField,
        b: &VectorField,
        p: &ChartPoint,
    ) -> Result<f64> {
        let x = self.total_point(p)?;
        let split = self.split_at(x)?;
        let lhs = self.a_at(x, &a.eval(x)?, b)?;
        let bracket = self.lie_bracket_at(x, a, b)?;
        let l2 = dilation.eval(x)?.powi(2);
        let (grad_v, _) = self.gradient_parts(x, &dilation.inv_square())?;
        let gab = split.inner(&a.eval(x)?, &b.eval(x)?);
        let rhs = (split.vertical_part(&bracket) - grad_v * (l2 * gab)) * 0.5;
        Ok(split.norm(&(lhs - rhs)))
    }
}

fn same_base<'a>(e: &'a TangentVector, f: &TangentVector) -> Result<&'a ChartPoint> {
    if e.base() != f.base() {
        return Err(Error::Argument("tensor arguments must share a base point".into()));
    }
    Ok(e.base())
}
