//! Relative gain arrays for square, wide and tall gain matrices.
//!
//! For a wide or square array `A` (r ≤ s) the interaction array is
//! `A ∘ (A⁺)ᵀ` with the right inverse `A⁺ = Aᵀ(AAᵀ)⁻¹`, which collapses to
//! `A ∘ (AAᵀ)⁻¹A`. Tall arrays use the left inverse `(AᵀA)⁻¹Aᵀ` instead,
//! giving `A ∘ A(AᵀA)⁻¹`. Applied to the steady-state gains this is the RGA;
//! applied to the normalized gains it is the RNGA.
//!
//! For wide arrays every row sums to one and every column sum lies in
//! `[0, 1]`. [`col_sum_binet_cauchy`] recomputes the column sums from squared
//! maximal minors alone, with no inverse involved.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixops::{enumerate_minors, left_pinv, schur, solve, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Role {
    /// Steady-state gains.
    K,
    /// Normalized gains `k/b`.
    Nga,
    Rga,
    Rnga,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::K => "K",
            Role::Nga => "NGA",
            Role::Rga => "RGA",
            Role::Rnga => "RNGA",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Wide,
    Tall,
    Square,
}

impl Shape {
    pub fn of(rows: usize, cols: usize) -> Self {
        match rows.cmp(&cols) {
            std::cmp::Ordering::Less => Shape::Wide,
            std::cmp::Ordering::Greater => Shape::Tall,
            std::cmp::Ordering::Equal => Shape::Square,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Wide => "wide",
            Shape::Tall => "tall",
            Shape::Square => "square",
        })
    }
}

/// A gain or interaction matrix tagged with what it represents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainArray {
    role: Role,
    matrix: Matrix,
    shape: Shape,
}

impl GainArray {
    pub fn new(role: Role, matrix: Matrix) -> Self {
        let shape = Shape::of(matrix.rows(), matrix.cols());
        GainArray {
            role,
            matrix,
            shape,
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn transpose(&self) -> GainArray {
        GainArray::new(self.role, self.matrix.transpose())
    }

    fn expect_role(&self, allowed: &[Role]) -> Result<()> {
        if allowed.contains(&self.role) {
            return Ok(());
        }
        let expected: Vec<String> = allowed.iter().map(Role::to_string).collect();
        Err(Error::RoleMismatch {
            expected: expected.join(" or "),
            found: self.role.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumVector {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl SumVector {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// `A ∘ (A⁺)ᵀ`, choosing the right or left inverse by shape.
fn relative_array(a: &Matrix, label: Role) -> Result<Matrix> {
    let shape = Shape::of(a.rows(), a.cols());
    match shape {
        Shape::Wide | Shape::Square => {
            let inv_t = solve(&a.gram_rows(), a).map_err(|_| {
                Error::singular(format!(
                    "{label} of {shape} {}x{} array: rows are linearly dependent",
                    a.rows(),
                    a.cols()
                ))
            })?;
            schur(a, &inv_t)
        }
        Shape::Tall => {
            let pinv = left_pinv(a).map_err(|_| {
                Error::singular(format!(
                    "{label} of tall {}x{} array: columns are linearly dependent",
                    a.rows(),
                    a.cols()
                ))
            })?;
            schur(a, &pinv.transpose())
        }
    }
}

/// Relative normalized gain array of an NGA.
pub fn rnga(nga: &GainArray) -> Result<GainArray> {
    nga.expect_role(&[Role::Nga])?;
    Ok(GainArray::new(
        Role::Rnga,
        relative_array(&nga.matrix, Role::Rnga)?,
    ))
}

/// Relative gain array of a steady-state gain array.
pub fn rga(k: &GainArray) -> Result<GainArray> {
    k.expect_role(&[Role::K])?;
    Ok(GainArray::new(
        Role::Rga,
        relative_array(&k.matrix, Role::Rga)?,
    ))
}

/// RGA for `K` input, RNGA for `NGA` input.
pub fn interaction_array(arr: &GainArray) -> Result<GainArray> {
    match arr.role {
        Role::K => rga(arr),
        Role::Nga => rnga(arr),
        _ => Err(Error::RoleMismatch {
            expected: "K or NGA".into(),
            found: arr.role.to_string(),
        }),
    }
}

pub fn row_sums(arr: &GainArray) -> Result<SumVector> {
    arr.expect_role(&[Role::Rga, Role::Rnga])?;
    let m = &arr.matrix;
    Ok(SumVector {
        axis: Axis::Row,
        values: (0..m.rows()).map(|i| m.row(i).iter().sum()).collect(),
    })
}

/// Column sums. Bounded to `[0, 1]` for wide and square arrays only; tall
/// arrays get the raw sums.
pub fn col_sums(arr: &GainArray) -> Result<SumVector> {
    arr.expect_role(&[Role::Rga, Role::Rnga])?;
    let m = &arr.matrix;
    Ok(SumVector {
        axis: Axis::Column,
        values: (0..m.cols()).map(|j| m.column(j).iter().sum()).collect(),
    })
}

/// Column sum `C(j)` of the interaction array of `arr`, computed only from
/// maximal minors: the squared minors whose column set contains `j`, divided
/// by the sum of all squared minors. `j` is 0-based.
pub fn col_sum_binet_cauchy(arr: &GainArray, j: usize) -> Result<f64> {
    arr.expect_role(&[Role::K, Role::Nga])?;
    let m = &arr.matrix;
    if arr.shape == Shape::Tall {
        return Err(Error::Unsupported(
            "minor-based column sums are defined for wide or square arrays only".into(),
        ));
    }
    if j >= m.cols() {
        return Err(Error::invalid(
            "column index",
            format!("{} > {}", j + 1, m.cols()),
        ));
    }
    let (mut with_j, mut total) = (0.0, 0.0);
    for (idx, d) in enumerate_minors(m, m.rows())? {
        let sq = d * d;
        total += sq;
        if idx.contains(j) {
            with_j += sq;
        }
    }
    if total == 0.0 {
        return Err(Error::singular(
            "column sum oracle: every maximal minor vanishes",
        ));
    }
    Ok(with_j / total)
}

fn check_diagonal(q: &[f64], expected: usize, what: &str) -> Result<()> {
    if q.len() != expected {
        return Err(Error::invalid(
            format!("{what} scaling"),
            format!("needs {expected} entries, got {}", q.len()),
        ));
    }
    if let Some(pos) = q.iter().position(|x| *x == 0.0 || !x.is_finite()) {
        return Err(Error::invalid(
            format!("{what} scaling entry {}", pos + 1),
            "must be finite and non-zero",
        ));
    }
    Ok(())
}

/// `Q_r · A` for diagonal `Q_r = diag(q)`.
pub fn scale_outputs(arr: &GainArray, q: &[f64]) -> Result<GainArray> {
    check_diagonal(q, arr.rows(), "output")?;
    let m = &arr.matrix;
    let data = (0..m.rows())
        .flat_map(|i| m.row(i).iter().map(move |x| x * q[i]))
        .collect();
    Ok(GainArray::new(
        arr.role,
        Matrix::new(m.rows(), m.cols(), data)?,
    ))
}

/// `A · Q_s` for diagonal `Q_s = diag(q)`.
pub fn scale_inputs(arr: &GainArray, q: &[f64]) -> Result<GainArray> {
    check_diagonal(q, arr.cols(), "input")?;
    let m = &arr.matrix;
    let data = (0..m.rows())
        .flat_map(|i| m.row(i).iter().zip(q).map(|(x, s)| x * s))
        .collect();
    Ok(GainArray::new(
        arr.role,
        Matrix::new(m.rows(), m.cols(), data)?,
    ))
}

/// A permutation of `0..n`. Applied to rows, position `i` of the result
/// takes row `map[i]` of the source; likewise for columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &p in &map {
            if p >= map.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{map:?} is not a permutation of 0..{}",
                    map.len()
                )));
            }
        }
        Ok(Permutation(map))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Position of source index `src` after permuting.
    pub fn position_of(&self, src: usize) -> usize {
        self.0
            .iter()
            .position(|&p| p == src)
            .expect("index within permutation")
    }
}

/// `P_r · A · P_s`.
pub fn permute(arr: &GainArray, pr: &Permutation, ps: &Permutation) -> Result<GainArray> {
    if pr.len() != arr.rows() || ps.len() != arr.cols() {
        return Err(Error::InvalidPermutation(format!(
            "sizes {}x{} do not match the {}x{} array",
            pr.len(),
            ps.len(),
            arr.rows(),
            arr.cols()
        )));
    }
    let m = &arr.matrix;
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for (i, &si) in pr.0.iter().enumerate() {
        for (j, &sj) in ps.0.iter().enumerate() {
            out[(i, j)] = m[(si, sj)];
        }
    }
    Ok(GainArray::new(arr.role, out))
}

/// Largest `|C(j) − C_minors(j)|` over all columns of a wide or square array.
pub fn binet_cauchy_discrepancy(base: &GainArray, interaction: &GainArray) -> Result<f64> {
    let sums = col_sums(interaction)?;
    let mut worst: f64 = 0.0;
    for (j, c) in sums.values.iter().enumerate() {
        worst = worst.max((c - col_sum_binet_cauchy(base, j)?).abs());
    }
    Ok(worst)
}
