//! Input elimination and loop pairing on both bases.

use rnga::{arrays, fixtures, model, pairing};

fn main() -> rnga::Result<()> {
    let plant = fixtures::radiator();
    for arr in [
        arrays::rnga(&model::normalized_gain(&plant))?,
        arrays::rga(&model::steady_state_gain(&plant))?,
    ] {
        let plan = pairing::recommend(&arr)?;
        println!(
            "{}: {}  (sum |l-1| = {:.4})",
            plan.basis,
            plan.label(),
            plan.total_deviation
        );
        for e in &plan.eliminated_inputs {
            println!(
                "  eliminated U{} with column sum {:.4}",
                e.input + 1,
                e.column_sum
            );
        }
        for w in &plan.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
