//! Shared fixtures for the benchmarks.

use magcount::field_models::{build_ground_state, FieldModel, GroundStateData};
use magcount::{GridSpec, RadialGrid};

/// Ground state of the unit-width Gaussian field with flux `alpha`.
pub fn gaussian_ground_state(alpha: f64) -> GroundStateData {
    build_ground_state(&FieldModel::gaussian(alpha).expect("valid flux")).expect("ground state")
}

pub fn default_grid() -> RadialGrid {
    GridSpec::default().build().expect("default grid")
}
