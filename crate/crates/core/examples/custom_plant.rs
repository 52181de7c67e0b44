//! A plant document with an SOPDT channel, and a tall plant analysed through
//! the left inverse.

use rnga::pairing::Basis;
use rnga::report::{render, AnalysisReport, Format};
use rnga::simulate::{simulate_open_loop, InputStep};
use rnga::{arrays, model};

const PLANT: &str = r#"
[plant]
name = "mixing"
outputs = ["level", "temperature"]
inputs = ["feed", "steam"]

[[element]]
output = 1
input = 1
kind = "fopdt"
gain = 1.5
tau = 12.0
deadtime = 2.0

[[element]]
output = 1
input = 2
kind = "sopdt"
gain = -0.4
tau = 8.0
tau2 = 3.0
deadtime = 4.0

[[element]]
output = 2
input = 1
kind = "fopdt"
gain = 0.3
tau = 20.0
deadtime = 5.0

[[element]]
output = 2
input = 2
kind = "fopdt"
gain = 2.0
tau = 15.0
deadtime = 1.0
"#;

fn main() -> rnga::Result<()> {
    let plant = model::load_plant(PLANT)?;
    let report = AnalysisReport::analyze(&plant, &[Basis::Rnga, Basis::Rga])?;
    print!("{}", render(&report, Format::Table));

    let step = InputStep {
        input: 1,
        magnitude: 1.0,
        time: 0.0,
    };
    let trace = simulate_open_loop(&plant, &[step], 100.0, 0.05)?;
    let last = trace.len() - 1;
    println!(
        "open-loop steam step: level {:.4}, temperature {:.4} at t = {}",
        trace.outputs[0][last], trace.outputs[1][last], trace.time[last]
    );

    // three outputs, two inputs
    let tall = arrays::GainArray::new(
        arrays::Role::Nga,
        rnga::matrixops::Matrix::from_rows(&[[1.0, 0.2], [0.3, 0.9], [0.5, 0.5]]),
    );
    let lambda = arrays::rnga(&tall)?;
    println!("tall relative array:");
    for row in lambda.matrix().to_rows() {
        println!("  {row:.4?}");
    }
    Ok(())
}
