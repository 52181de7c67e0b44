//! Randomized check of the structural properties of wide interaction arrays.
//!
//! Each trial draws a full-row-rank `r×s` matrix (`r < s`) with entries
//! uniform on `[−1, −0.05] ∪ [0.05, 1]`, then checks:
//!
//! - row sums equal one;
//! - column sums lie in `[0, 1]`, agree with the minor expansion and total `r`;
//! - output scaling leaves the array unchanged;
//! - non-uniform input scaling changes at least one element;
//! - row and column permutations carry through to the array (residual
//!   relative to `max(1, max|λ|)`);
//! - the tall formula on `Aᵀ` gives the transpose.
//!
//! Trial `k` draws from a ChaCha stream `k` under the master seed, so results
//! do not depend on thread scheduling.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arrays::{
    binet_cauchy_discrepancy, col_sums, permute, rnga, row_sums, scale_inputs, scale_outputs,
    GainArray, Permutation, Role,
};
use crate::error::{Error, Result};
use crate::matrixops::Matrix;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_TRIALS: usize = 1000;
pub const MAX_COLUMNS: usize = 8;

const MIN_MAGNITUDE: f64 = 0.05;
const ROW_SUM_TOL: f64 = 1e-9;
const COLUMN_SUM_TOL: f64 = 1e-9;
const OUTPUT_SCALING_TOL: f64 = 1e-10;
const INPUT_SCALING_WITNESS: f64 = 1e-8;
const PERMUTATION_TOL: f64 = 1e-12;
const DUALITY_TOL: f64 = 1e-12;
/// Redraws allowed per trial when the sampled matrix is rank deficient.
const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    pub trials: usize,
    pub max_r: usize,
    pub max_s: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: DEFAULT_TRIALS,
            max_r: 3,
            max_s: 6,
            seed: DEFAULT_SEED,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_r == 0 {
            return Err(Error::invalid("--max-r", "must be at least 1"));
        }
        if self.max_r >= self.max_s {
            return Err(Error::invalid(
                "--max-r/--max-s",
                format!("need max r < max s, got {} and {}", self.max_r, self.max_s),
            ));
        }
        if self.max_s > MAX_COLUMNS {
            return Err(Error::invalid(
                "--max-s",
                format!("must be at most {MAX_COLUMNS}"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    RowSums,
    ColumnSumBounds,
    ColumnSumMinors,
    ColumnSumTotal,
    OutputScaling,
    InputScaling,
    Permutation,
    TransposeDuality,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::RowSums,
        Property::ColumnSumBounds,
        Property::ColumnSumMinors,
        Property::ColumnSumTotal,
        Property::OutputScaling,
        Property::InputScaling,
        Property::Permutation,
        Property::TransposeDuality,
    ];

    pub fn description(self) -> &'static str {
        match self {
            Property::RowSums => "row sums equal 1",
            Property::ColumnSumBounds => "column sums within [0, 1]",
            Property::ColumnSumMinors => "column sums match the minor expansion",
            Property::ColumnSumTotal => "column sums total r",
            Property::OutputScaling => "output scaling invariance",
            Property::InputScaling => "input scaling changes the array",
            Property::Permutation => "permutations carry through (relative)",
            Property::TransposeDuality => "tall formula on the transpose",
        }
    }

    /// Residual bound; for input scaling, the smallest acceptable witness.
    pub fn tolerance(self) -> f64 {
        match self {
            Property::RowSums => ROW_SUM_TOL,
            Property::ColumnSumBounds | Property::ColumnSumMinors | Property::ColumnSumTotal => {
                COLUMN_SUM_TOL
            }
            Property::OutputScaling => OUTPUT_SCALING_TOL,
            Property::InputScaling => INPUT_SCALING_WITNESS,
            Property::Permutation => PERMUTATION_TOL,
            Property::TransposeDuality => DUALITY_TOL,
        }
    }

    fn passes(self, residual: f64) -> bool {
        match self {
            Property::InputScaling => residual > self.tolerance(),
            _ => residual <= self.tolerance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyTally {
    pub property: Property,
    pub description: &'static str,
    pub tolerance: f64,
    pub checked: usize,
    pub passed: usize,
    /// Largest residual seen. For input scaling this is the smallest witness.
    pub worst: Option<f64>,
    /// First failing trial, 0-based.
    pub first_failure: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub config: VerifyConfig,
    pub redraws: usize,
    pub properties: Vec<PropertyTally>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed == p.checked)
    }

    pub fn tally(&self, property: Property) -> &PropertyTally {
        self.properties
            .iter()
            .find(|p| p.property == property)
            .expect("every property is tallied")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "property suite: {} trials, r <= {}, s <= {}, seed {}",
            c.trials, c.max_r, c.max_s, c.seed
        );
        let _ = writeln!(out, "redrawn rank-deficient samples: {}", self.redraws);
        for p in &self.properties {
            let worst = p.worst.map_or("-".to_string(), |w| format!("{w:.3e}"));
            let status = if p.passed == p.checked {
                "pass"
            } else {
                "FAIL"
            };
            let _ = writeln!(
                out,
                "  [{status}] {:<40} {:>5}/{:<5} worst {worst:>10}  tol {:.0e}",
                p.description, p.passed, p.checked, p.tolerance
            );
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
struct TrialOutcome {
    redraws: usize,
    /// `None` when a property did not apply to the trial.
    residuals: [Option<f64>; 8],
}

fn draw_entry(rng: &mut ChaCha8Rng) -> f64 {
    let magnitude = rng.random_range(MIN_MAGNITUDE..=1.0);
    if rng.random_bool(0.5) {
        -magnitude
    } else {
        magnitude
    }
}

fn draw_matrix(rng: &mut ChaCha8Rng, r: usize, s: usize) -> Matrix {
    let data = (0..r * s).map(|_| draw_entry(rng)).collect();
    Matrix::new(r, s, data).expect("finite entries")
}

/// Positive diagonal with entries log-uniform on `[0.1, 10]`.
fn draw_scaling(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| 10f64.powf(rng.random_range(-1.0..=1.0)))
        .collect()
}

fn draw_permutation(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Permutation::new(v).expect("shuffle of 0..n")
}

fn run_trial(cfg: &VerifyConfig, trial: usize) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let r = rng.random_range(1..=cfg.max_r);
    let s = rng.random_range(r + 1..=cfg.max_s);

    let mut redraws = 0;
    let (a, lambda) = loop {
        let a = GainArray::new(Role::Nga, draw_matrix(&mut rng, r, s));
        match rnga(&a) {
            Ok(l) => break (a, l),
            Err(Error::SingularMatrix { .. }) if redraws < MAX_REDRAWS => redraws += 1,
            Err(e) => return Err(e),
        }
    };
    let lm = lambda.matrix();

    let mut res = [None; 8];
    let rows = row_sums(&lambda)?;
    res[0] = Some(
        rows.values
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max),
    );
    let cols = col_sums(&lambda)?;
    res[1] = Some(
        cols.values
            .iter()
            .map(|&c| (-c).max(c - 1.0).max(0.0))
            .fold(0.0, f64::max),
    );
    res[2] = Some(binet_cauchy_discrepancy(&a, &lambda)?);
    res[3] = Some((cols.total() - r as f64).abs());

    let qr = draw_scaling(&mut rng, r);
    res[4] = Some(rnga(&scale_outputs(&a, &qr)?)?.matrix().max_abs_diff(lm));

    let qs = draw_scaling(&mut rng, s);
    if qs.iter().any(|&q| q != qs[0]) {
        res[5] = Some(rnga(&scale_inputs(&a, &qs)?)?.matrix().max_abs_diff(lm));
    }

    let (pr, ps) = (draw_permutation(&mut rng, r), draw_permutation(&mut rng, s));
    let lhs = rnga(&permute(&a, &pr, &ps)?)?;
    let rhs = permute(&lambda, &pr, &ps)?;
    // rounding grows with the array entries, which reach O(10) on
    // ill-conditioned draws
    res[6] = Some(lhs.matrix().max_abs_diff(rhs.matrix()) / lm.max_abs().max(1.0));

    let tall = rnga(&a.transpose())?;
    res[7] = Some(tall.matrix().max_abs_diff(&lm.transpose()));

    Ok(TrialOutcome {
        redraws,
        residuals: res,
    })
}

/// Runs the suite. Trials execute in parallel; the summary is identical for
/// a given configuration.
pub fn run_suite(cfg: &VerifyConfig) -> Result<VerifySummary> {
    cfg.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| run_trial(cfg, k))
        .collect::<Result<_>>()?;

    let mut properties: Vec<PropertyTally> = Property::ALL
        .iter()
        .map(|&p| PropertyTally {
            property: p,
            description: p.description(),
            tolerance: p.tolerance(),
            checked: 0,
            passed: 0,
            worst: None,
            first_failure: None,
        })
        .collect();
    let mut redraws = 0;
    for (k, o) in outcomes.iter().enumerate() {
        redraws += o.redraws;
        for (t, res) in properties.iter_mut().zip(o.residuals) {
            let Some(v) = res else { continue };
            t.checked += 1;
            if t.property.passes(v) {
                t.passed += 1;
            } else if t.first_failure.is_none() {
                t.first_failure = Some(k);
            }
            t.worst = Some(match (t.worst, t.property) {
                (None, _) => v,
                (Some(w), Property::InputScaling) => w.min(v),
                (Some(w), _) => w.max(v),
            });
        }
    }
    Ok(VerifySummary {
        config: *cfg,
        redraws,
        properties,
    })
}
