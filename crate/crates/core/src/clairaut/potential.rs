use super::check_dim;
use crate::error::{Error, Result};
use crate::geometry::{ChartPoint, ScalarField, TangentVector, Vector, NESTED_DERIVATIVE_STEP};
use crate::submersion::{DilationField, SmoothSubmersionMap};

/// Fibers count as umbilical below this defect.
pub const UMBILICAL_TOL: f64 = 1e-6;

/// Mean curvature against its closed forms at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanCurvatureCheck {
    /// `H` from the trace of `T`.
    pub direct: Vector,
    /// `−∇f − (λ²/(2k)) Σ_i Σ_j g(U_i, ∇_ν 1/λ²) X_j`.
    pub formula: Vector,
    pub h_residual: f64,
    /// Horizontal divergence `Σ_j g(∇_{X_j} H, X_j)`.
    pub divergence: f64,
    /// `−Δ^H f − (nλ²/k) Σ_i Σ_j X_j(g(U_i, ∇_ν 1/λ²))`.
    pub divergence_formula: f64,
    pub divergence_residual: f64,
}

/// Compares the mean curvature vector of the fibers and its horizontal
/// divergence with their expressions through `f` and `λ`.
pub fn mean_curvature_formula_check(
    map: &SmoothSubmersionMap,
    dilation: &DilationField,
    f: &ScalarField,
    p: &ChartPoint,
) -> Result<MeanCurvatureCheck> {
    let x = check_dim(map, p)?;
    let split = map.split_at(x)?;
    let (k, n) = (map.fiber_dim() as f64, map.base_dim() as f64);
    let phi = dilation.inv_square();
    let l2 = dilation.eval(x)?.powi(2);

    let direct = map.mean_curvature_at(x)?;
    let (grad_v, _) = map.gradient_parts(x, &phi)?;
    let coeff: f64 = split.vertical().iter().map(|u| split.inner(u, &grad_v)).sum();
    let x_sum = split.horizontal().iter().fold(Vector::zeros(x.len()), |acc, h| acc + h);
    let formula = -map.total().gradient_at(f, x)? - x_sum * (l2 / (2.0 * k) * coeff);
    let h_residual = split.norm(&(&direct - &formula));

    let h_field = map.mean_curvature_field();
    let mut divergence = 0.0;
    let mut laplacian_h = 0.0;
    let mut mixed = 0.0;
    let vertical_terms: Vec<ScalarField> = (0..split.vertical().len()).map(|i| vertical_phi_component(map, &phi, i)).collect();
    for h in split.horizontal() {
        let d = map.total().covariant_at(x, h, &h_field)?;
        divergence += split.inner(&d, h);
        laplacian_h += map.total().hessian_at(f, x, h, h)?;
        for term in &vertical_terms {
            mixed += term.directional(x, h)?;
        }
    }
    let divergence_formula = -laplacian_h - n * l2 / k * mixed;
    Ok(MeanCurvatureCheck {
        direct,
        formula,
        h_residual,
        divergence,
        divergence_formula,
        divergence_residual: (divergence - divergence_formula).abs(),
    })
}

/// `y ↦ g(U_i(y), ∇_ν(1/λ²)(y))` with the split's `i`-th vertical vector.
fn vertical_phi_component(map: &SmoothSubmersionMap, phi: &ScalarField, i: usize) -> ScalarField {
    let map = map.clone();
    let phi = phi.clone();
    ScalarField::new(format!("g(U_{},grad_v(1/lambda^2))", i + 1), move |y| {
        let split = map.split_at(y)?;
        let (grad_v, _) = map.gradient_parts(y, &phi)?;
        Ok(split.inner(&split.vertical()[i], &grad_v))
    })
    .with_step(NESTED_DERIVATIVE_STEP)
}

/// Candidate `∇f = −H` at sample points, with evidence that it is a gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialEstimate {
    pub gradients: Vec<TangentVector>,
    /// Largest `|∂_a ω_b − ∂_b ω_a|` of the 1-form `ω = g(−H, ·)`.
    pub closedness_max: f64,
}

/// Reads a potential off umbilical fibers through `∇f = −H`.
pub fn infer_mean_curvature_potential(map: &SmoothSubmersionMap, points: &[ChartPoint]) -> Result<PotentialEstimate> {
    let mut gradients = Vec::with_capacity(points.len());
    let mut closedness_max: f64 = 0.0;
    let form = |y: &Vector| -> Result<Vector> {
        let g = map.total().metric_at(y)?;
        Ok(-(g * map.mean_curvature_at(y)?))
    };
    for p in points {
        let x = check_dim(map, p)?;
        let defect = map.umbilical_residual(p)?;
        if defect > UMBILICAL_TOL {
            return Err(Error::PreconditionViolated(format!(
                "fibers are not umbilical at {:?}: defect {defect:.3e}",
                x.as_slice()
            )));
        }
        gradients.push(TangentVector::new_unchecked(p.clone(), -map.mean_curvature_at(x)?));
        let m = x.len();
        let mut d = Vec::with_capacity(m);
        for a in 0..m {
            let h = NESTED_DERIVATIVE_STEP * x[a].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[a] += h;
            xm[a] -= h;
            d.push((form(&xp)? - form(&xm)?) / (2.0 * h));
        }
        for (a, da) in d.iter().enumerate() {
            for (b, db) in d.iter().enumerate().skip(a + 1) {
                closedness_max = closedness_max.max((da[b] - db[a]).abs());
            }
        }
    }
    Ok(PotentialEstimate { gradients, closedness_max })
}
