//! Bundled plant models.

use crate::model::{load_plant, TransferMatrix};

/// 2×4 radiator model: outlet air and water temperatures driven by air flow,
/// water flow, inlet air temperature and inlet water temperature.
pub const RADIATOR_TOML: &str = include_str!("../fixtures/radiator.toml");

pub fn radiator() -> TransferMatrix {
    load_plant(RADIATOR_TOML).expect("bundled radiator model is valid")
}
