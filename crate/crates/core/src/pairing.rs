//! Decentralized pairing from an interaction array.
//!
//! Two stages. Surplus inputs of a wide array are dropped first, keeping the
//! `r` columns with the largest column sums. Then each output gets one of the
//! retained inputs: the matching minimizes `Σ|λ − 1|` over all `r!`
//! assignments, with every paired element required to be positive. Paired
//! elements under 0.5 are reported as warnings rather than rejected.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arrays::{col_sums, GainArray, Role, Shape, SumVector};
use crate::error::{Error, Result};

/// Largest output count accepted by the exhaustive matching search.
pub const MAX_OUTPUTS: usize = 10;

/// Alternatives within this much of the optimal `Σ|λ − 1|` are reported.
pub const NEAR_TIE_MARGIN: f64 = 0.05;

/// Paired elements below this value are reported.
pub const PREFERRED_MINIMUM: f64 = 0.5;

const COST_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Basis {
    Rga,
    Rnga,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Rga => "RGA",
            Basis::Rnga => "RNGA",
        })
    }
}

/// One controlled loop; indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub output: usize,
    pub input: usize,
    pub value: f64,
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Y{}-U{}", self.output + 1, self.input + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EliminatedInput {
    pub input: usize,
    pub column_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairingWarning {
    /// A paired element is below 0.5.
    BelowPreferred {
        output: usize,
        input: usize,
        value: f64,
    },
    /// Another feasible matching costs at most [`NEAR_TIE_MARGIN`] more.
    NearTie { inputs: Vec<usize>, cost_gap: f64 },
    /// The last retained and first eliminated columns have equal sums; the
    /// lower index was kept.
    ColumnSumTie {
        retained: usize,
        eliminated: usize,
        column_sum: f64,
    },
}

impl fmt::Display for PairingWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairingWarning::BelowPreferred {
                output,
                input,
                value,
            } => write!(
                f,
                "paired element Y{}-U{} = {value:.4} is below {PREFERRED_MINIMUM}",
                output + 1,
                input + 1
            ),
            PairingWarning::NearTie { inputs, cost_gap } => {
                let alt: Vec<String> = inputs
                    .iter()
                    .enumerate()
                    .map(|(i, j)| format!("Y{}-U{}", i + 1, j + 1))
                    .collect();
                write!(
                    f,
                    "alternative pairing {} is within {cost_gap:.4} of the optimum",
                    alt.join("/")
                )
            }
            PairingWarning::ColumnSumTie {
                retained,
                eliminated,
                column_sum,
            } => write!(
                f,
                "inputs U{} and U{} tie on column sum {column_sum:.4}; U{} retained by index",
                retained + 1,
                eliminated + 1,
                retained + 1
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    /// Ascending.
    pub retained: Vec<usize>,
    /// Ascending by input index.
    pub eliminated: Vec<EliminatedInput>,
    pub tie: Option<PairingWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingPlan {
    pub basis: Basis,
    pub retained_inputs: Vec<usize>,
    /// One per output, in output order.
    pub pairs: Vec<Pair>,
    pub eliminated_inputs: Vec<EliminatedInput>,
    /// `Σ|λ − 1|` of the chosen matching.
    pub total_deviation: f64,
    pub warnings: Vec<PairingWarning>,
}

impl PairingPlan {
    /// Input paired with `output`.
    pub fn input_for(&self, output: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|p| p.output == output)
            .map(|p| p.input)
    }

    /// Output controlled through `input`, if the input is paired.
    pub fn output_for(&self, input: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|p| p.input == input)
            .map(|p| p.output)
    }

    /// e.g. `Y1-U1/Y2-U2`.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.pairs.iter().map(Pair::to_string).collect();
        parts.join("/")
    }
}

fn basis_of(arr: &GainArray) -> Result<Basis> {
    match arr.role() {
        Role::Rga => Ok(Basis::Rga),
        Role::Rnga => Ok(Basis::Rnga),
        other => Err(Error::RoleMismatch {
            expected: "RGA or RNGA".into(),
            found: other.to_string(),
        }),
    }
}

fn reject_tall(arr: &GainArray) -> Result<()> {
    if arr.shape() == Shape::Tall {
        return Err(Error::Unsupported(format!(
            "pairing a tall {}x{} array: tall interaction arrays are for analysis only, \
             there are fewer inputs than outputs to pair",
            arr.rows(),
            arr.cols()
        )));
    }
    Ok(())
}

/// Keeps the `r` columns with the largest column sums, lower index first on
/// ties.
pub fn eliminate_inputs(arr: &GainArray, sums: &SumVector) -> Result<Elimination> {
    reject_tall(arr)?;
    let (r, s) = (arr.rows(), arr.cols());
    if sums.values.len() != s {
        return Err(Error::invalid(
            "column sums",
            format!("expected {s} values, got {}", sums.values.len()),
        ));
    }
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| sums.values[b].total_cmp(&sums.values[a]).then(a.cmp(&b)));

    let tie = (r < s && sums.values[order[r - 1]] == sums.values[order[r]]).then(|| {
        PairingWarning::ColumnSumTie {
            retained: order[r - 1],
            eliminated: order[r],
            column_sum: sums.values[order[r]],
        }
    });

    let mut retained = order[..r].to_vec();
    retained.sort_unstable();
    let mut eliminated: Vec<EliminatedInput> = order[r..]
        .iter()
        .map(|&j| EliminatedInput {
            input: j,
            column_sum: sums.values[j],
        })
        .collect();
    eliminated.sort_by_key(|e| e.input);
    Ok(Elimination {
        retained,
        eliminated,
        tie,
    })
}

/// Rearranges `v` into its lexicographic successor; false once `v` is the
/// last (descending) arrangement.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("successor exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Recommends a decentralized pairing from an RGA or RNGA.
pub fn recommend(arr: &GainArray) -> Result<PairingPlan> {
    let basis = basis_of(arr)?;
    reject_tall(arr)?;
    let r = arr.rows();
    if r > MAX_OUTPUTS {
        return Err(Error::Unsupported(format!(
            "exhaustive pairing search is limited to {MAX_OUTPUTS} outputs, got {r}"
        )));
    }
    let m = arr.matrix();
    let elimination = eliminate_inputs(arr, &col_sums(arr)?)?;

    let mut perm = elimination.retained.clone();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut contenders: Vec<(f64, Vec<usize>)> = Vec::new();
    loop {
        let feasible = perm.iter().enumerate().all(|(i, &j)| m[(i, j)] > 0.0);
        if feasible {
            let cost: f64 = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| (m[(i, j)] - 1.0).abs())
                .sum();
            // permutations arrive in lexicographic order, so the first of
            // several equal-cost matchings is kept
            if best.as_ref().is_none_or(|(c, _)| cost < c - COST_EPS) {
                best = Some((cost, perm.clone()));
            }
            let bound = best
                .as_ref()
                .map_or(f64::INFINITY, |(c, _)| c + NEAR_TIE_MARGIN);
            if cost <= bound {
                contenders.push((cost, perm.clone()));
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let (total_deviation, chosen) = best.ok_or(Error::NoViablePairing)?;

    let pairs: Vec<Pair> = chosen
        .iter()
        .enumerate()
        .map(|(i, &j)| Pair {
            output: i,
            input: j,
            value: m[(i, j)],
        })
        .collect();

    let mut warnings: Vec<PairingWarning> = elimination.tie.into_iter().collect();
    warnings.extend(
        pairs
            .iter()
            .filter(|p| p.value < PREFERRED_MINIMUM)
            .map(|p| PairingWarning::BelowPreferred {
                output: p.output,
                input: p.input,
                value: p.value,
            }),
    );
    warnings.extend(
        contenders
            .into_iter()
            .filter(|(c, p)| *p != chosen && *c <= total_deviation + NEAR_TIE_MARGIN)
            .map(|(c, p)| PairingWarning::NearTie {
                inputs: p,
                cost_gap: c - total_deviation,
            }),
    );

    Ok(PairingPlan {
        basis,
        retained_inputs: elimination.retained,
        pairs,
        eliminated_inputs: elimination.eliminated,
        total_deviation,
        warnings,
    })
}
