//! Shared fixtures for the criterion benches.

use clairaut_core::geodesic::GeodesicState;
use clairaut_core::geometry::ChartPoint;
use clairaut_core::scenario::{lookup, SubmersionScenario};

pub fn scenario(name: &str) -> SubmersionScenario {
    lookup(name).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// First validation point of the scenario.
pub fn point(s: &SubmersionScenario) -> ChartPoint {
    s.validation_points().remove(0)
}

/// A unit-speed start tilted between the two distributions.
pub fn tilted_state(s: &SubmersionScenario) -> GeodesicState {
    let p = point(s);
    let split = s.map().split(&p).expect("split");
    let v = (&split.vertical()[0] + &split.horizontal()[0]) / 2f64.sqrt();
    GeodesicState::new(0.0, p, v.as_slice().to_vec()).expect("finite state")
}
