//! IMC-PID settings for every paired loop, with one filter override.

use std::collections::BTreeMap;

use rnga::{arrays, fixtures, model, pairing, tuning};

fn main() -> rnga::Result<()> {
    let plant = fixtures::radiator();
    let plan = pairing::recommend(&arrays::rnga(&model::normalized_gain(&plant))?)?;

    for overrides in [BTreeMap::new(), BTreeMap::from([(1, 30.0)])] {
        println!("overrides {overrides:?}");
        for lt in tuning::tune_plan(&plant, &plan, &overrides)? {
            let s = lt.settings;
            println!(
                "  {}: kc {:.4}  ti {:.3}  td {:.3}  lambda {:.3}",
                lt.pair, s.kc, s.tau_i, s.tau_d, s.lambda_f
            );
        }
    }
    Ok(())
}
