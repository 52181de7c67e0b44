//! Right and left pseudo-inverses of a small non-square matrix.

use rnga::matrixops::{left_pinv, right_pinv, Matrix};

fn main() -> rnga::Result<()> {
    let a = Matrix::from_rows(&[[1.0, 2.0, 0.5], [0.0, 1.0, -1.0]]);
    let right = right_pinv(&a)?;
    let left = left_pinv(&a.transpose())?;

    println!("A+ (right inverse of the wide A):");
    for row in right.to_rows() {
        println!("  {row:?}");
    }
    println!(
        "A A+ = I within {:e}",
        a.matmul(&right)?.max_abs_diff(&Matrix::identity(2))
    );
    println!(
        "left inverse of A^T equals (A+)^T within {:e}",
        left.max_abs_diff(&right.transpose())
    );
    Ok(())
}
