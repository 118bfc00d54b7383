//! Built-in and file-defined submersion scenarios.

mod builtin;
mod file;

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use builtin::{
    build_doubly_warped, build_euclidean_product, build_example2, build_surface_of_revolution, doubly_warped_default,
    doubly_warped_sphere, doubly_warped_varlam, perturbed_nonclairaut, registry, surface_of_revolution_default,
    DoublyWarped,
};
pub use file::{MetricSpec, ScenarioFlags, ScenarioSpec};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{ChartManifold, ChartPoint, Matrix, MetricField, ScalarField, Vector, VectorField};
use crate::submersion::{DilationField, SmoothSubmersionMap};

/// Number of low-discrepancy points used to validate a scenario.
pub const VALIDATION_POINTS: usize = 16;

/// A fully evaluable scenario: manifolds, map, optional dilation and `f`,
/// declared expectations and a sampling box.
#[derive(Clone, Debug)]
pub struct SubmersionScenario {
    spec: ScenarioSpec,
    map: SmoothSubmersionMap,
    dilation: Option<DilationField>,
    clairaut_f: Option<ScalarField>,
}

impl SubmersionScenario {
    /// Builds the fields from `spec` and validates them at
    /// [`VALIDATION_POINTS`] deterministic points.
    pub fn from_spec(spec: ScenarioSpec) -> Result<Self> {
        spec.check_shape()?;
        if spec.flags.expected_clairaut && spec.clairaut_f.is_none() {
            return Err(Error::Validation {
                invariant: "flag consistency".into(),
                point: Vec::new(),
                detail: "expected_clairaut needs a declared f".into(),
            });
        }
        if spec.flags.expected_clairaut && !spec.flags.expected_conformal {
            return Err(Error::Validation {
                invariant: "flag consistency".into(),
                point: Vec::new(),
                detail: "expected_clairaut needs expected_conformal".into(),
            });
        }
        let m = spec.total.dim;
        let total = ChartManifold::new(format!("{} total", spec.name), metric_field(&spec.total))?;
        let base = ChartManifold::new(format!("{} base", spec.name), metric_field(&spec.base))?;
        let comps = spec
            .map
            .iter()
            .enumerate()
            .map(|(k, e)| scalar_field(format!("F{}", k + 1), e, m))
            .collect();
        let second: Vec<Vec<Vec<Expression>>> = spec
            .map
            .iter()
            .map(|e| (0..m).map(|i| (0..m).map(|j| e.differentiate(i).differentiate(j)).collect()).collect())
            .collect();
        let frame = |prefix: &str, fields: &[Vec<Expression>]| -> Vec<VectorField> {
            fields
                .iter()
                .enumerate()
                .map(|(k, comps)| vector_field(format!("{prefix}{}", k + 1), comps))
                .collect()
        };
        let map = SmoothSubmersionMap::new(total, base, comps, frame("U", &spec.vertical), frame("X", &spec.horizontal))?
            .with_hessians(move |x| {
                second
                    .iter()
                    .map(|h| {
                        let mut out = Matrix::zeros(m, m);
                        for i in 0..m {
                            for j in 0..m {
                                out[(i, j)] = eval_at(&h[i][j], x)?;
                            }
                        }
                        Ok(out)
                    })
                    .collect()
            });
        let dilation = spec
            .dilation
            .as_ref()
            .map(|e| DilationField::analytic(scalar_field("lambda", e, m)));
        let clairaut_f = spec.clairaut_f.as_ref().map(|e| scalar_field(format!("f = {e}"), e, m));
        let scenario = Self {
            spec,
            map,
            dilation,
            clairaut_f,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn total(&self) -> &ChartManifold {
        self.map.total()
    }

    pub fn base(&self) -> &ChartManifold {
        self.map.base()
    }

    pub fn map(&self) -> &SmoothSubmersionMap {
        &self.map
    }

    /// The declared dilation, if any.
    pub fn dilation(&self) -> Option<&DilationField> {
        self.dilation.as_ref()
    }

    /// The declared dilation, or an estimate from the map.
    pub fn dilation_or_estimate(&self) -> DilationField {
        self.dilation
            .clone()
            .unwrap_or_else(|| DilationField::estimated(&self.map))
    }

    pub fn clairaut_f(&self) -> Option<&ScalarField> {
        self.clairaut_f.as_ref()
    }

    pub fn flags(&self) -> &ScenarioFlags {
        &self.spec.flags
    }

    pub fn sample_box(&self) -> &[(f64, f64)] {
        &self.spec.sample_box
    }

    /// `count` points drawn uniformly from the sample box.
    pub fn sample_points<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<ChartPoint> {
        (0..count).map(|_| self.sample_point(rng)).collect()
    }

    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> ChartPoint {
        let coords = self
            .spec
            .sample_box
            .iter()
            .map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo })
            .collect::<Vec<_>>();
        ChartPoint::new_unchecked(Vector::from_vec(coords))
    }

    /// See [`validation_points`].
    pub fn validation_points(&self) -> Vec<ChartPoint> {
        validation_points(&self.spec)
    }

    fn validate(&self) -> Result<()> {
        let witness = |p: &ChartPoint, invariant: &str, e: Error| match e {
            Error::Validation { .. } => e,
            other => Error::Validation {
                invariant: invariant.into(),
                point: p.to_vec(),
                detail: other.to_string(),
            },
        };
        for p in self.validation_points() {
            let x = p.coords();
            self.total().validate_at(&p)?;
            let fx = self.map.apply(&p).map_err(|e| witness(&p, "map evaluation", e))?;
            self.base().validate_at(&fx)?;
            self.map.split(&p).map_err(|e| witness(&p, "submersion frames", e))?;
            let (ann, orth) = self.map.frame_residuals(x).map_err(|e| witness(&p, "submersion frames", e))?;
            if ann > crate::submersion::FRAME_TOL || orth > crate::submersion::FRAME_TOL {
                return Err(Error::Validation {
                    invariant: "frame annihilation and orthogonality".into(),
                    point: p.to_vec(),
                    detail: format!("annihilation {ann:e}, orthogonality {orth:e}"),
                });
            }
            if let Some(d) = &self.dilation {
                d.eval(x).map_err(|e| witness(&p, "dilation positivity", e))?;
            }
            if let Some(f) = &self.clairaut_f {
                f.eval(x).map_err(|e| witness(&p, "f finiteness", e))?;
            }
        }
        Ok(())
    }
}

/// Deterministic low-discrepancy points in the sample box: a Halton
/// sequence shifted by offsets derived from the scenario name.
pub fn validation_points(spec: &ScenarioSpec) -> Vec<ChartPoint> {
    let m = spec.sample_box.len();
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(spec.name.as_bytes()));
    let shifts: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    (1..=VALIDATION_POINTS)
        .map(|k| {
            let coords = (0..m)
                .map(|d| {
                    let u = (halton(k, PRIMES[d % PRIMES.len()]) + shifts[d]).fract();
                    let (lo, hi) = spec.sample_box[d];
                    lo + u * (hi - lo)
                })
                .collect::<Vec<_>>();
            ChartPoint::new_unchecked(Vector::from_vec(coords))
        })
        .collect()
}

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `k` in `base`.
fn halton(mut k: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while k > 0 {
        f /= base as f64;
        r += f * (k % base) as f64;
        k /= base;
    }
    r
}

/// 64-bit FNV-1a.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn eval_at(e: &Expression, x: &Vector) -> Result<f64> {
    e.eval(x.as_slice())
}

fn scalar_field(name: impl Into<String>, e: &Expression, m: usize) -> ScalarField {
    let value = e.clone();
    let grads: Vec<Expression> = (0..m).map(|k| e.differentiate(k)).collect();
    ScalarField::new(name, move |x| eval_at(&value, x)).with_partials(move |x| {
        let mut out = Vector::zeros(m);
        for (k, d) in grads.iter().enumerate() {
            out[k] = eval_at(d, x)?;
        }
        Ok(out)
    })
}

fn vector_field(name: impl Into<String>, comps: &[Expression]) -> VectorField {
    let m = comps.len();
    let value: Arc<Vec<Expression>> = Arc::new(comps.to_vec());
    let jac: Vec<Vec<Expression>> = comps.iter().map(|e| (0..m).map(|i| e.differentiate(i)).collect()).collect();
    let v = value.clone();
    VectorField::new(name, move |x| {
        let mut out = Vector::zeros(m);
        for (k, e) in v.iter().enumerate() {
            out[k] = eval_at(e, x)?;
        }
        Ok(out)
    })
    .with_jacobian(move |x| {
        let mut out = Matrix::zeros(m, m);
        for (k, row) in jac.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                out[(k, i)] = eval_at(e, x)?;
            }
        }
        Ok(out)
    })
}

/// Metric with symbolic partials. A pair declared on both sides of the
/// diagonal keeps both expressions, so an asymmetric declaration is visible
/// to validation.
fn metric_field(spec: &MetricSpec) -> MetricField {
    let d = spec.dim;
    let entries: Vec<Vec<Expression>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    spec.entries[i][j]
                        .clone()
                        .or_else(|| spec.entries[j][i].clone())
                        .unwrap_or_else(|| Expression::constant(0.0))
                })
                .collect()
        })
        .collect();
    let partials: Vec<Vec<Vec<Expression>>> = (0..d)
        .map(|k| entries.iter().map(|row| row.iter().map(|e| e.differentiate(k)).collect()).collect())
        .collect();
    let grid = move |m: &Vec<Vec<Expression>>, x: &Vector| -> Result<Matrix> {
        let mut out = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = eval_at(&m[i][j], x)?;
            }
        }
        Ok(out)
    };
    MetricField::new(d, move |x| grid(&entries, x))
        .with_partials(move |x| partials.iter().map(|m| grid(m, x)).collect())
}

/// Registry entry by name.
pub fn lookup(name: &str) -> Result<SubmersionScenario> {
    registry()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
        .and_then(SubmersionScenario::from_spec)
}

/// Names of the built-in scenarios, alphabetically.
pub fn registry_names() -> Vec<String> {
    registry().into_iter().map(|s| s.name).collect()
}

/// Reads and builds a scenario file.
pub fn load_scenario(path: impl AsRef<std::path::Path>) -> Result<SubmersionScenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    SubmersionScenario::from_spec(ScenarioSpec::parse(&text)?)
}
