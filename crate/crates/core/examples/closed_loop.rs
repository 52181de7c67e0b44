//! Closed-loop setpoint step on the radiator plant. Writes the trace to
//! `closed_loop.csv` in the working directory.

use std::collections::BTreeMap;
use std::fs::File;

use rnga::simulate::{simulate, Scenario};
use rnga::{arrays, fixtures, model, pairing, tuning};

fn main() -> rnga::Result<()> {
    let plant = fixtures::radiator();
    let plan = pairing::recommend(&arrays::rnga(&model::normalized_gain(&plant))?)?;
    let loops = tuning::tune_plan(&plant, &plan, &BTreeMap::new())?;

    let scenario = Scenario::unit_step(0).with_horizon(200.0);
    let trace = simulate(&plant, &plan, &loops, &scenario)?;
    let m = trace.metrics();
    println!(
        "{} samples, IAE {:?}, ISCI {:?}",
        trace.len(),
        m.iae,
        m.isci
    );

    trace.write_csv(File::create("closed_loop.csv")?)?;
    println!("trace written to closed_loop.csv");
    Ok(())
}
