use super::{ChartManifold, ChartPoint, TangentVector, Vector, VectorField};
use crate::error::{Error, Result};

/// Christoffel symbols of the second kind at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelTensor {
    at: ChartPoint,
    dim: usize,
    // index k * m * m + i * m + j
    values: Vec<f64>,
}

impl ChristoffelTensor {
    pub fn at(&self) -> &ChartPoint {
        &self.at
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_ij`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        let m = self.dim;
        self.values[k * m * m + i * m + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Γ^k_ij a^i b^j`.
    pub fn contract(&self, a: &Vector, b: &Vector) -> Vector {
        let m = self.dim;
        let mut out = Vector::zeros(m);
        for k in 0..m {
            let mut s = 0.0;
            for i in 0..m {
                if a[i] == 0.0 {
                    continue;
                }
                for j in 0..m {
                    s += self.get(k, i, j) * a[i] * b[j];
                }
            }
            out[k] = s;
        }
        out
    }

    /// Largest `|Γ^k_ij − Γ^k_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

impl ChartManifold {
    /// Christoffel symbols of the Levi-Civita connection at `p`.
    pub fn christoffel(&self, p: &ChartPoint) -> Result<ChristoffelTensor> {
        self.check_point(p)?;
        self.christoffel_at(p.coords())
    }

    pub(crate) fn christoffel_at(&self, x: &Vector) -> Result<ChristoffelTensor> {
        let m = self.dim();
        let g = self.metric().eval(x)?;
        let dg = self.metric().partials(x)?;
        let lu = g.clone().lu();
        let mut values = vec![0.0; m * m * m];
        let mut first = Vector::zeros(m);
        for i in 0..m {
            for j in i..m {
                for l in 0..m {
                    first[l] = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                let second = lu
                    .solve(&first)
                    .filter(|s| s.iter().all(|v| v.is_finite()))
                    .ok_or_else(|| Error::SingularMetric { at: x.iter().copied().collect() })?;
                for k in 0..m {
                    values[k * m * m + i * m + j] = second[k];
                    values[k * m * m + j * m + i] = second[k];
                }
            }
        }
        Ok(ChristoffelTensor {
            at: ChartPoint::new_unchecked(x.clone()),
            dim: m,
            values,
        })
    }

    /// `∇_w V` at `x`, given `V(x)` and its componentwise derivative `D_w V`.
    pub(crate) fn covariant_from_parts(&self, x: &Vector, w: &Vector, v: &Vector, dv: &Vector) -> Result<Vector> {
        let gamma = self.christoffel_at(x)?;
        Ok(dv + gamma.contract(w, v))
    }

    /// `∇_along field`.
    pub fn covariant_derivative(&self, along: &TangentVector, field: &VectorField) -> Result<TangentVector> {
        self.check_point(along.base())?;
        let x = along.base().coords();
        let w = along.components();
        let v = field.eval(x)?;
        let dv = field.directional_derivative(x, w)?;
        let out = self.covariant_from_parts(x, w, &v, &dv)?;
        Ok(TangentVector::new_unchecked(along.base().clone(), out))
    }

    /// Covariant derivative of `field` at `x` along `w`, on raw coordinates.
    pub(crate) fn covariant_at(&self, x: &Vector, w: &Vector, field: &VectorField) -> Result<Vector> {
        let v = field.eval(x)?;
        let dv = field.directional_derivative(x, w)?;
        self.covariant_from_parts(x, w, &v, &dv)
    }
}
