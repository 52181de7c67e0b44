//! Randomized property suite with a small trial count.

use rnga::verify::{run_suite, VerifyConfig};

fn main() -> rnga::Result<()> {
    let cfg = VerifyConfig {
        trials: 200,
        ..VerifyConfig::default()
    };
    let summary = run_suite(&cfg)?;
    print!("{}", summary.to_table());
    println!("all passed: {}", summary.all_passed());
    Ok(())
}
