//! Relative arrays, pairings and property checks for the radiator plant.

use rnga::pairing::Basis;
use rnga::report::{render, AnalysisReport, Format};
use rnga::{arrays, fixtures, model, pairing};

fn main() -> rnga::Result<()> {
    let plant = fixtures::radiator();
    let rn = arrays::rnga(&model::normalized_gain(&plant))?;
    let rg = arrays::rga(&model::steady_state_gain(&plant))?;
    let plans = [pairing::recommend(&rn)?, pairing::recommend(&rg)?];

    let report = AnalysisReport::analyze(&plant, &[Basis::Rnga, Basis::Rga])?.with_plans(&plans);
    print!("{}", render(&report, Format::Table));
    Ok(())
}
