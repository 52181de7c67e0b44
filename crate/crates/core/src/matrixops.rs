//! Small dense real-matrix kernel.
//!
//! Everything here is sized for interaction analysis of process plants, where
//! the output count is a handful at most. Generalized inverses go through the
//! normal equations (`A·Aᵀ` or `Aᵀ·A`) and Gaussian elimination with partial
//! pivoting; no orthogonal factorizations are involved.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot threshold used by [`solve`] and the pseudo-inverses.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Above this many column subsets [`enumerate_minors`] logs a warning.
pub const MINOR_WARN_THRESHOLD: u128 = 1_000_000;

/// Row-major dense matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::invalid(
                "matrix",
                format!(
                    "{rows}x{cols} needs {} entries, got {}",
                    rows * cols,
                    data.len()
                ),
            ));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(
                format!(
                    "matrix entry ({}, {})",
                    pos / cols.max(1) + 1,
                    pos % cols.max(1) + 1
                ),
                "entry is not finite",
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from row slices. Panics on ragged input; meant for
    /// literals in examples and tests.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows in Matrix::from_rows");
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data).expect("finite entries in Matrix::from_rows")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.dims(),
                right: other.dims(),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `A·Aᵀ` (r×r).
    pub fn gram_rows(&self) -> Matrix {
        let mut g = Matrix::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..self.rows {
                g[(i, j)] = dot(self.row(i), self.row(j));
            }
        }
        g
    }

    /// `Aᵀ·A` (s×s).
    pub fn gram_cols(&self) -> Matrix {
        self.transpose().gram_rows()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Largest absolute entry; zero for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest absolute elementwise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dims(), other.dims(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self
                .row(i)
                .iter()
                .map(|x| match f.precision() {
                    Some(p) => format!("{x:>w$.p$}", w = p + 4),
                    None => format!("{x}"),
                })
                .collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Elementwise (Schur/Hadamard) product.
pub fn schur(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            op: "schur",
            left: a.dims(),
            right: b.dims(),
        });
    }
    Ok(Matrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    })
}

/// Solves `sym · X = rhs` by Gaussian elimination with partial pivoting.
///
/// A pivot is rejected when its magnitude is below [`PIVOT_TOLERANCE`] times
/// the largest absolute entry of the original row it came from, or when that
/// row is entirely zero.
pub fn solve(sym: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    if !sym.is_square() || sym.rows != rhs.rows {
        return Err(Error::DimensionMismatch {
            op: "solve",
            left: sym.dims(),
            right: rhs.dims(),
        });
    }
    let n = sym.rows;
    let m = rhs.cols;
    let mut a = sym.clone();
    let mut b = rhs.clone();
    let mut scale: Vec<f64> = (0..n)
        .map(|i| sym.row(i).iter().fold(0.0_f64, |s, x| s.max(x.abs())))
        .collect();

    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[(x, k)].abs().total_cmp(&a[(y, k)].abs()))
            .expect("non-empty pivot range");
        let pivot = a[(p, k)];
        if scale[p] == 0.0 || pivot.abs() < PIVOT_TOLERANCE * scale[p] {
            return Err(Error::singular(format!("solve: pivot {} of {n}", k + 1)));
        }
        if p != k {
            swap_rows(&mut a, p, k);
            swap_rows(&mut b, p, k);
            scale.swap(p, k);
        }
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f == 0.0 {
                continue;
            }
            a[(i, k)] = 0.0;
            for j in k + 1..n {
                a[(i, j)] -= f * a[(k, j)];
            }
            for j in 0..m {
                b[(i, j)] -= f * b[(k, j)];
            }
        }
    }

    let mut x = Matrix::zeros(n, m);
    for col in 0..m {
        for i in (0..n).rev() {
            let tail: f64 = (i + 1..n).map(|j| a[(i, j)] * x[(j, col)]).sum();
            x[(i, col)] = (b[(i, col)] - tail) / a[(i, i)];
        }
    }
    Ok(x)
}

fn swap_rows(m: &mut Matrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    for c in 0..m.cols {
        m.data.swap(i * m.cols + c, j * m.cols + c);
    }
}

/// Right generalized inverse `Aᵀ(AAᵀ)⁻¹` of a wide or square matrix.
pub fn right_pinv(a: &Matrix) -> Result<Matrix> {
    if a.rows > a.cols {
        return Err(Error::Unsupported(format!(
            "right inverse of a tall {}x{} matrix",
            a.rows, a.cols
        )));
    }
    // (AAᵀ)⁻¹A is the transpose of the right inverse.
    let x = solve(&a.gram_rows(), a)
        .map_err(|_| Error::singular("right_pinv: A·Aᵀ is singular (rows are dependent)"))?;
    Ok(x.transpose())
}

/// Left generalized inverse `(AᵀA)⁻¹Aᵀ` of a tall or square matrix.
pub fn left_pinv(a: &Matrix) -> Result<Matrix> {
    if a.rows < a.cols {
        return Err(Error::Unsupported(format!(
            "left inverse of a wide {}x{} matrix",
            a.rows, a.cols
        )));
    }
    solve(&a.gram_cols(), &a.transpose())
        .map_err(|_| Error::singular("left_pinv: Aᵀ·A is singular (columns are dependent)"))
}

/// Determinant by pivoted elimination. Returns exactly `0.0` when a column
/// has no non-zero pivot candidate.
pub fn det(a: &Matrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            op: "det",
            left: a.dims(),
            right: a.dims(),
        });
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut d = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| m[(x, k)].abs().total_cmp(&m[(y, k)].abs()))
            .expect("non-empty pivot range");
        let pivot = m[(p, k)];
        if pivot == 0.0 {
            return Ok(0.0);
        }
        if p != k {
            swap_rows(&mut m, p, k);
            d = -d;
        }
        d *= pivot;
        for i in k + 1..n {
            let f = m[(i, k)] / pivot;
            for j in k + 1..n {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    Ok(d)
}

/// Strictly increasing 0-based column indices of one square minor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MinorIndex(Vec<usize>);

impl MinorIndex {
    pub fn new(columns: Vec<usize>, ncols: usize) -> Result<Self> {
        if columns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "minor index",
                "columns must be strictly increasing",
            ));
        }
        if columns.last().is_some_and(|&c| c >= ncols) {
            return Err(Error::invalid(
                "minor index",
                format!("column out of range 0..{ncols}"),
            ));
        }
        Ok(MinorIndex(columns))
    }

    pub fn columns(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, col: usize) -> bool {
        self.0.binary_search(&col).is_ok()
    }
}

impl fmt::Display for MinorIndex {
    /// 1-based, e.g. `(1,3)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self.0.iter().map(|c| (c + 1).to_string()).collect();
        write!(f, "({})", cols.join(","))
    }
}

/// Number of `k`-subsets of `n` items, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// Iterator over all order-`k` column minors of the top `k` rows of a
/// matrix, in lexicographic column order.
#[derive(Debug, Clone)]
pub struct Minors<'a> {
    matrix: &'a Matrix,
    order: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for Minors<'_> {
    type Item = (MinorIndex, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let cols = self.next.take()?;
        let k = self.order;
        let n = self.matrix.cols;

        let mut sub = Matrix::zeros(k, k);
        for i in 0..k {
            for (jj, &j) in cols.iter().enumerate() {
                sub[(i, jj)] = self.matrix[(i, j)];
            }
        }
        let value = det(&sub).expect("square submatrix");

        // advance to the lexicographic successor
        let mut succ = cols.clone();
        let mut pos = k;
        while pos > 0 && succ[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos > 0 {
            succ[pos - 1] += 1;
            for q in pos..k {
                succ[q] = succ[q - 1] + 1;
            }
            self.next = Some(succ);
        }
        Some((MinorIndex(cols), value))
    }
}

/// Enumerates every order-`order` column minor of the top `order` rows.
pub fn enumerate_minors(a: &Matrix, order: usize) -> Result<Minors<'_>> {
    if order > a.rows.min(a.cols) {
        return Err(Error::invalid(
            "minor order",
            format!("{order} exceeds min dimension of {}x{}", a.rows, a.cols),
        ));
    }
    let count = binomial(a.cols, order);
    if count > MINOR_WARN_THRESHOLD {
        log::warn!(
            "enumerating {count} minors of a {}x{} matrix",
            a.rows,
            a.cols
        );
    }
    Ok(Minors {
        matrix: a,
        order,
        next: Some((0..order).collect()),
    })
}
