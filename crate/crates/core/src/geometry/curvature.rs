use super::{coordinate_step, inner, ChartManifold, ChartPoint, TangentVector, Vector};
use crate::error::{Error, Result};

/// Denominator below which a plane is considered degenerate.
pub const DEGENERATE_PLANE: f64 = 1e-14;

/// Riemann tensor `R^l_kij` at a point, with `R(∂_i, ∂_j)∂_k = R^l_kij ∂_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiemannTensor {
    at: ChartPoint,
    dim: usize,
    // index ((l * m + k) * m + i) * m + j
    values: Vec<f64>,
}

impl RiemannTensor {
    pub fn at(&self) -> &ChartPoint {
        &self.at
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R^l_kij`.
    pub fn get(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        let m = self.dim;
        self.values[((l * m + k) * m + i) * m + j]
    }

    /// `R(x, y)z`.
    pub fn apply(&self, x: &Vector, y: &Vector, z: &Vector) -> Vector {
        let m = self.dim;
        let mut out = Vector::zeros(m);
        for l in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                if z[k] == 0.0 {
                    continue;
                }
                for i in 0..m {
                    if x[i] == 0.0 {
                        continue;
                    }
                    for j in 0..m {
                        s += self.get(l, k, i, j) * x[i] * y[j] * z[k];
                    }
                }
            }
            out[l] = s;
        }
        out
    }
}

impl ChartManifold {
    /// The full Riemann tensor at `p`, differentiating Christoffel symbols
    /// with the metric's curvature step.
    pub fn riemann_tensor(&self, p: &ChartPoint) -> Result<RiemannTensor> {
        self.check_point(p)?;
        self.riemann_at(p.coords())
    }

    pub(crate) fn riemann_at(&self, x: &Vector) -> Result<RiemannTensor> {
        let m = self.dim();
        let gamma = self.christoffel_at(x)?;
        let rel = self.metric().curvature_step();
        // dgamma[a] = ∂_a Γ, laid out like Γ
        let mut dgamma: Vec<Vec<f64>> = Vec::with_capacity(m);
        for a in 0..m {
            let h = coordinate_step(x[a], rel);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[a] += h;
            xm[a] -= h;
            let gp = self.christoffel_at(&xp)?;
            let gm = self.christoffel_at(&xm)?;
            dgamma.push(
                gp.values()
                    .iter()
                    .zip(gm.values())
                    .map(|(u, v)| (u - v) / (2.0 * h))
                    .collect(),
            );
        }
        let g = |k: usize, i: usize, j: usize| gamma.get(k, i, j);
        let dg = |a: usize, k: usize, i: usize, j: usize| dgamma[a][k * m * m + i * m + j];
        let mut values = vec![0.0; m * m * m * m];
        for l in 0..m {
            for k in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        if i == j {
                            continue;
                        }
                        let mut r = dg(i, l, j, k) - dg(j, l, i, k);
                        for q in 0..m {
                            r += g(l, i, q) * g(q, j, k) - g(l, j, q) * g(q, i, k);
                        }
                        values[((l * m + k) * m + i) * m + j] = r;
                    }
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite curvature".into()));
        }
        Ok(RiemannTensor {
            at: ChartPoint::new_unchecked(x.clone()),
            dim: m,
            values,
        })
    }

    /// `R(x, y)z`, all based at `p`.
    pub fn riemann_curvature(
        &self,
        p: &ChartPoint,
        x: &TangentVector,
        y: &TangentVector,
        z: &TangentVector,
    ) -> Result<TangentVector> {
        for v in [x, y, z] {
            if v.base() != p {
                return Err(Error::Argument("curvature arguments must be based at p".into()));
            }
            if v.components().len() != self.dim() {
                return Err(Error::Argument("vector dimension mismatch".into()));
            }
        }
        let r = self.riemann_tensor(p)?;
        Ok(TangentVector::new_unchecked(
            p.clone(),
            r.apply(x.components(), y.components(), z.components()),
        ))
    }

    /// Sectional curvature of the plane spanned by `u` and `v`.
    pub fn sectional_curvature(&self, p: &ChartPoint, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        if u.base() != p || v.base() != p {
            return Err(Error::Argument("plane vectors must be based at p".into()));
        }
        self.check_point(p)?;
        let r = self.riemann_at(p.coords())?;
        self.sectional_from(&r, u.components(), v.components())
    }

    pub(crate) fn sectional_from(&self, r: &RiemannTensor, u: &Vector, v: &Vector) -> Result<f64> {
        let g = self.metric().eval(r.at().coords())?;
        let den = inner(&g, u, u) * inner(&g, v, v) - inner(&g, u, v).powi(2);
        if den.abs() < DEGENERATE_PLANE {
            return Err(Error::DegeneratePlane(den));
        }
        let num = inner(&g, &r.apply(u, v, v), u);
        Ok(num / den)
    }
}
