use super::{inner, Matrix, Vector};
use crate::error::{Error, Result};

/// Norm below which a Gram–Schmidt candidate is treated as dependent.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Orthonormalizes `seeds` in the inner product `g`, in the order given.
pub fn gram_schmidt(g: &Matrix, seeds: &[Vector]) -> Result<Vec<Vector>> {
    let mut out: Vec<Vector> = Vec::with_capacity(seeds.len());
    for (i, s) in seeds.iter().enumerate() {
        if s.len() != g.nrows() {
            return Err(Error::Argument(format!(
                "frame seed {i} has {} components, metric is {}x{}",
                s.len(),
                g.nrows(),
                g.ncols()
            )));
        }
        let mut v = s.clone();
        // two passes keep nearly dependent seeds orthogonal
        for _ in 0..2 {
            for e in &out {
                let c = inner(g, e, &v);
                v -= e * c;
            }
        }
        let n2 = inner(g, &v, &v);
        if !n2.is_finite() {
            return Err(Error::Numeric("non-finite norm in Gram-Schmidt".into()));
        }
        let n = n2.max(0.0).sqrt();
        if n < DEGENERATE_NORM {
            return Err(Error::DegenerateFrame(format!(
                "seed {i} is dependent on the previous ones (residual norm {n:e})"
            )));
        }
        out.push(v / n);
    }
    Ok(out)
}
