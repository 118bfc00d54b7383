//! Pass thresholds used by the check runner.

pub use crate::clairaut::{CONDITION_TOL, CURVATURE_IDENTITY_TOL, GEODESIC_CONDITION_TOL, INVARIANT_TOL};
pub use crate::scenario::VALIDATION_POINTS;

/// Conformality residual relative to `max(1, λ²)`.
pub const CONFORMAL: f64 = 1e-8;
/// `max ‖T_{U_i}U_j − g(U_i,U_j)H‖`.
pub const UMBILICAL: f64 = 1e-6;
/// `|‖α̇(t)‖² − ‖α̇(0)‖²|` over a trace.
pub const SPEED_DRIFT: f64 = 1e-6;
/// Trace form of `τ(F)` against its closed form.
pub const TENSION_CONSISTENCY: f64 = 1e-5;
/// `‖τ(F)‖` below which the map counts as harmonic.
pub const HARMONIC: f64 = 1e-6;
/// `A` against its bracket formula.
pub const A_FORMULA: f64 = 1e-5;
/// Direct second fundamental form against its conformal formula.
pub const SECOND_FUNDAMENTAL_FORM: f64 = 1e-5;
/// Direct `H` against its closed form.
pub const MEAN_CURVATURE: f64 = 1e-6;
/// Horizontal divergence of `H` against its closed form.
pub const MEAN_CURVATURE_DIVERGENCE: f64 = 1e-4;
/// Projected-geodesic condition against the acceleration of `F∘α`.
pub const PROJECTED_GEODESIC: f64 = 1e-5;
/// Closedness of `g(−H, ·)`.
pub const POTENTIAL_CLOSEDNESS: f64 = 1e-5;
/// Smallest `sin ω` accepted for a random non-horizontal start.
pub const MIN_SIN_OMEGA: f64 = 0.1;
