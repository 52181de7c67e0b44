//! Output scaling leaves the RNGA unchanged; input scaling does not;
//! permutations carry through.

use rnga::arrays::{permute, rnga, scale_inputs, scale_outputs, Permutation};
use rnga::{fixtures, model};

fn main() -> rnga::Result<()> {
    let nga = model::normalized_gain(&fixtures::radiator());
    let base = rnga(&nga)?;

    let by_output = rnga(&scale_outputs(&nga, &[3.0, 0.2])?)?;
    println!(
        "output scaling changes RNGA by {:e}",
        by_output.matrix().max_abs_diff(base.matrix())
    );

    let by_input = rnga(&scale_inputs(&nga, &[1.0, 5.0, 1.0, 0.5])?)?;
    println!(
        "input scaling changes RNGA by {:.4}",
        by_input.matrix().max_abs_diff(base.matrix())
    );

    let pr = Permutation::new(vec![1, 0])?;
    let ps = Permutation::new(vec![3, 1, 0, 2])?;
    let lhs = rnga(&permute(&nga, &pr, &ps)?)?;
    let rhs = permute(&base, &pr, &ps)?;
    println!(
        "permuting before or after differs by {:e}",
        lhs.matrix().max_abs_diff(rhs.matrix())
    );
    Ok(())
}
