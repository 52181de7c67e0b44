//! Column sums of a wide relative array against the maximal-minor formula.

use rnga::arrays::{col_sum_binet_cauchy, col_sums, rnga, GainArray, Role};
use rnga::matrixops::{det, enumerate_minors, Matrix};

fn main() -> rnga::Result<()> {
    let a = Matrix::from_rows(&[[0.8, -0.3, 0.5, 0.2], [0.1, 0.9, -0.4, 0.6]]);
    let minors: Vec<_> = enumerate_minors(&a, 2)?.collect();
    let gram = det(&a.gram_rows())?;
    let sum_sq: f64 = minors.iter().map(|(_, m)| m * m).sum();
    println!("det(A A^T) = {gram:.12}, sum of squared minors = {sum_sq:.12}");

    let base = GainArray::new(Role::Nga, a);
    let sums = col_sums(&rnga(&base)?)?;
    for (j, s) in sums.values.iter().enumerate() {
        println!(
            "column {}: sum {s:.12}, from minors {:.12}",
            j + 1,
            col_sum_binet_cauchy(&base, j)?
        );
    }
    println!("total {:.12}", sums.total());
    Ok(())
}
