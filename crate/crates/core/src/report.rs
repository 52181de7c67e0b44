//! Analysis reports: gain and interaction arrays, sums, pairings, controller
//! settings, closed-loop metrics and property checks, rendered as JSON or as
//! a plain-text table.
//!
//! Every number is kept at full precision. Arrays, sums and metrics also
//! carry a 4-decimal display string (round half to even). Indices in reports
//! are 1-based.

use std::fmt::Write as _;

use serde::Serialize;

use crate::arrays::{
    binet_cauchy_discrepancy, col_sums, interaction_array, row_sums, GainArray, Role, Shape,
};
use crate::error::Result;
use crate::model::{normalized_gain, steady_state_gain, TransferMatrix};
use crate::pairing::{Basis, PairingPlan};
use crate::simulate::{Scenario, TraceMetrics};
use crate::tuning::LoopTuning;

/// Tolerance for property assertions on interaction arrays.
pub const PROPERTY_TOLERANCE: f64 = 1e-9;
/// Tolerance for exact algebraic identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// 4-decimal display, ties to even, without negative zero.
pub fn display4(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantSummary {
    pub name: String,
    pub outputs: Vec<String>,
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vector {
    pub values: Vec<f64>,
    pub display: Vec<String>,
}

impl Vector {
    fn new(values: Vec<f64>) -> Self {
        let display = values.iter().map(|&v| display4(v)).collect();
        Vector { values, display }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArraySection {
    pub role: Role,
    pub shape: Shape,
    pub values: Vec<Vec<f64>>,
    pub display: Vec<Vec<String>>,
    /// Present for RGA and RNGA.
    pub row_sums: Option<Vector>,
    pub column_sums: Option<Vector>,
}

impl ArraySection {
    fn new(arr: &GainArray) -> Result<Self> {
        let relative = matches!(arr.role(), Role::Rga | Role::Rnga);
        let values = arr.matrix().to_rows();
        let display = values
            .iter()
            .map(|row| row.iter().map(|&v| display4(v)).collect())
            .collect();
        Ok(ArraySection {
            role: arr.role(),
            shape: arr.shape(),
            values,
            display,
            row_sums: relative
                .then(|| row_sums(arr))
                .transpose()?
                .map(|s| Vector::new(s.values)),
            column_sums: relative
                .then(|| col_sums(arr))
                .transpose()?
                .map(|s| Vector::new(s.values)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEntry {
    pub output: usize,
    pub input: usize,
    pub value: f64,
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliminatedEntry {
    pub input: usize,
    pub column_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanSection {
    pub basis: Basis,
    pub label: String,
    pub retained_inputs: Vec<usize>,
    pub pairs: Vec<PairEntry>,
    pub eliminated_inputs: Vec<EliminatedEntry>,
    pub total_deviation: f64,
    pub warnings: Vec<String>,
}

impl From<&PairingPlan> for PlanSection {
    fn from(plan: &PairingPlan) -> Self {
        PlanSection {
            basis: plan.basis,
            label: plan.label(),
            retained_inputs: plan.retained_inputs.iter().map(|j| j + 1).collect(),
            pairs: plan
                .pairs
                .iter()
                .map(|p| PairEntry {
                    output: p.output + 1,
                    input: p.input + 1,
                    value: p.value,
                    display: display4(p.value),
                })
                .collect(),
            eliminated_inputs: plan
                .eliminated_inputs
                .iter()
                .map(|e| EliminatedEntry {
                    input: e.input + 1,
                    column_sum: e.column_sum,
                })
                .collect(),
            total_deviation: plan.total_deviation,
            warnings: plan.warnings.iter().map(ToString::to_string).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopSettings {
    pub output: usize,
    pub input: usize,
    pub kc: f64,
    pub tau_i: f64,
    pub tau_d: f64,
    pub lambda_f: f64,
    pub derivative_filter_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningSection {
    pub basis: Basis,
    pub loops: Vec<LoopSettings>,
}

impl TuningSection {
    pub fn new(basis: Basis, tunings: &[LoopTuning]) -> Self {
        TuningSection {
            basis,
            loops: tunings
                .iter()
                .map(|t| LoopSettings {
                    output: t.pair.output + 1,
                    input: t.pair.input + 1,
                    kc: t.settings.kc,
                    tau_i: t.settings.tau_i,
                    tau_d: t.settings.tau_d,
                    lambda_f: t.settings.lambda_f,
                    derivative_filter_ratio: t.settings.derivative_filter_ratio,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepEntry {
    pub output: usize,
    pub magnitude: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioMetrics {
    pub basis: Basis,
    pub pairing: String,
    pub steps: Vec<StepEntry>,
    pub horizon: f64,
    pub step_size: f64,
    /// Per output.
    pub iae: Vector,
    /// Per input.
    pub isci: Vector,
}

impl ScenarioMetrics {
    pub fn new(plan: &PairingPlan, scenario: &Scenario, metrics: &TraceMetrics) -> Self {
        ScenarioMetrics {
            basis: plan.basis,
            pairing: plan.label(),
            steps: scenario
                .steps
                .iter()
                .map(|s| StepEntry {
                    output: s.output + 1,
                    magnitude: s.magnitude,
                    time: s.time,
                })
                .collect(),
            horizon: scenario.horizon,
            step_size: scenario.step_size,
            iae: Vector::new(metrics.iae.clone()),
            isci: Vector::new(metrics.isci.clone()),
        }
    }

    fn step_label(&self) -> String {
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| format!("r{} += {} at t = {}", s.output, s.magnitude, s.time))
            .collect();
        parts.join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl PropertyCheck {
    fn new(name: String, residual: f64, tolerance: f64) -> Self {
        PropertyCheck {
            name,
            passed: residual <= tolerance,
            residual,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub plant: PlantSummary,
    /// K, NGA, then the requested interaction arrays.
    pub arrays: Vec<ArraySection>,
    pub pairing: Option<Vec<PlanSection>>,
    pub tuning: Option<Vec<TuningSection>>,
    /// `None` when no scenario was simulated.
    pub metrics: Option<Vec<ScenarioMetrics>>,
    pub checks: Vec<PropertyCheck>,
}

impl AnalysisReport {
    /// Arrays, sums and property checks for the requested bases.
    pub fn analyze(tm: &TransferMatrix, bases: &[Basis]) -> Result<Self> {
        let k = steady_state_gain(tm);
        let nga = normalized_gain(tm);
        let mut arrays = vec![ArraySection::new(&k)?, ArraySection::new(&nga)?];
        let mut checks = Vec::new();
        for basis in bases {
            let base = match basis {
                Basis::Rga => &k,
                Basis::Rnga => &nga,
            };
            let rel = interaction_array(base)?;
            arrays.push(ArraySection::new(&rel)?);
            checks.extend(property_checks(base, &rel)?);
        }
        Ok(AnalysisReport {
            plant: PlantSummary {
                name: tm.name().to_string(),
                outputs: tm.output_names().to_vec(),
                inputs: tm.input_names().to_vec(),
            },
            arrays,
            pairing: None,
            tuning: None,
            metrics: None,
            checks,
        })
    }

    pub fn with_plans(mut self, plans: &[PairingPlan]) -> Self {
        self.pairing = Some(plans.iter().map(PlanSection::from).collect());
        self
    }

    pub fn with_tuning(mut self, sections: Vec<TuningSection>) -> Self {
        self.tuning = Some(sections);
        self
    }

    pub fn with_metrics(mut self, metrics: Vec<ScenarioMetrics>) -> Self {
        self.metrics = Some(metrics);
        self
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn array(&self, role: Role) -> Option<&ArraySection> {
        self.arrays.iter().find(|a| a.role == role)
    }
}

/// Structural checks on an interaction array computed from `base`.
fn property_checks(base: &GainArray, rel: &GainArray) -> Result<Vec<PropertyCheck>> {
    let role = rel.role();
    let mut out = Vec::new();
    if rel.shape() != Shape::Tall {
        let rows = row_sums(rel)?;
        let cols = col_sums(rel)?;
        let row_dev = rows
            .values
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max);
        out.push(PropertyCheck::new(
            format!("{role} row sums equal 1"),
            row_dev,
            PROPERTY_TOLERANCE,
        ));
        let outside = cols
            .values
            .iter()
            .map(|&c| (-c).max(c - 1.0).max(0.0))
            .fold(0.0, f64::max);
        out.push(PropertyCheck::new(
            format!("{role} column sums within [0, 1]"),
            outside,
            PROPERTY_TOLERANCE,
        ));
        out.push(PropertyCheck::new(
            format!("{role} column sums total the output count"),
            (cols.total() - rel.rows() as f64).abs(),
            PROPERTY_TOLERANCE,
        ));
        out.push(PropertyCheck::new(
            format!("{role} column sums match the minor expansion"),
            binet_cauchy_discrepancy(base, rel)?,
            PROPERTY_TOLERANCE,
        ));
    }
    let dual = interaction_array(&base.transpose())?;
    out.push(PropertyCheck::new(
        format!("{role} of the transpose is the transpose"),
        dual.matrix().max_abs_diff(&rel.matrix().transpose()),
        IDENTITY_TOLERANCE,
    ));
    Ok(out)
}

pub fn render(report: &AnalysisReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Table => render_table(report),
    }
}

fn matrix_block(out: &mut String, title: &str, sec: &ArraySection) {
    let cols = sec.values.first().map_or(0, Vec::len);
    let _ = writeln!(out, "{title}");
    let mut header = format!("{:>6}", "");
    for j in 1..=cols {
        let _ = write!(header, "{:>10}", format!("U{j}"));
    }
    if sec.row_sums.is_some() {
        let _ = write!(header, "{:>10}", "R(i)");
    }
    let _ = writeln!(out, "{}", header.trim_end());
    for (i, row) in sec.display.iter().enumerate() {
        let _ = write!(out, "{:>6}", format!("Y{}", i + 1));
        for v in row {
            let _ = write!(out, "{v:>10}");
        }
        if let Some(r) = &sec.row_sums {
            let _ = write!(out, "{:>10}", r.display[i]);
        }
        out.push('\n');
    }
    if let Some(c) = &sec.column_sums {
        let _ = write!(out, "{:>6}", "C(j)");
        for v in &c.display {
            let _ = write!(out, "{v:>10}");
        }
        out.push('\n');
    }
    out.push('\n');
}

fn render_table(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let p = &report.plant;
    let _ = writeln!(
        out,
        "plant {} ({} outputs x {} inputs)",
        p.name,
        p.outputs.len(),
        p.inputs.len()
    );
    for (i, n) in p.outputs.iter().enumerate() {
        let _ = writeln!(out, "  Y{} = {n}", i + 1);
    }
    for (j, n) in p.inputs.iter().enumerate() {
        let _ = writeln!(out, "  U{} = {n}", j + 1);
    }
    out.push('\n');

    for sec in &report.arrays {
        let title = match sec.role {
            Role::K => "K (steady-state gain)",
            Role::Nga => "NGA (normalized gain)",
            Role::Rga => "RGA",
            Role::Rnga => "RNGA",
        };
        matrix_block(&mut out, title, sec);
    }

    if let Some(plans) = &report.pairing {
        for plan in plans {
            let _ = writeln!(out, "{} pairing: {}", plan.basis, plan.label);
            let kept: Vec<String> = plan
                .retained_inputs
                .iter()
                .map(|j| format!("U{j}"))
                .collect();
            let _ = writeln!(out, "  retained inputs: {}", kept.join(", "));
            for e in &plan.eliminated_inputs {
                let _ = writeln!(
                    out,
                    "  eliminated U{} (column sum {})",
                    e.input,
                    display4(e.column_sum)
                );
            }
            for pr in &plan.pairs {
                let _ = writeln!(out, "  Y{}-U{}  {}", pr.output, pr.input, pr.display);
            }
            let _ = writeln!(
                out,
                "  total |lambda - 1|: {}",
                display4(plan.total_deviation)
            );
            for w in &plan.warnings {
                let _ = writeln!(out, "  warning: {w}");
            }
            out.push('\n');
        }
    }

    if let Some(sections) = &report.tuning {
        for sec in sections {
            let _ = writeln!(out, "{} controllers", sec.basis);
            let _ = writeln!(
                out,
                "{:>8}{:>10}{:>10}{:>10}{:>10}",
                "loop", "kc", "tau_i", "tau_d", "lambda_f"
            );
            for l in &sec.loops {
                let _ = writeln!(
                    out,
                    "{:>8}{:>10.3}{:>10.3}{:>10.3}{:>10.3}",
                    format!("Y{}-U{}", l.output, l.input),
                    l.kc,
                    l.tau_i,
                    l.tau_d,
                    l.lambda_f
                );
            }
            out.push('\n');
        }
    }

    match &report.metrics {
        None => {
            let _ = writeln!(out, "closed-loop metrics: absent (no scenario simulated)\n");
        }
        Some(runs) => render_metrics(&mut out, runs),
    }

    let _ = writeln!(out, "property checks");
    for c in &report.checks {
        let _ = writeln!(
            out,
            "  [{}] {} (residual {:.3e}, tolerance {:.0e})",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance
        );
    }
    out
}

fn render_metrics(out: &mut String, runs: &[ScenarioMetrics]) {
    let mut labels: Vec<String> = Vec::new();
    for r in runs {
        let l = r.step_label();
        if !labels.contains(&l) {
            labels.push(l);
        }
    }
    for label in labels {
        let group: Vec<&ScenarioMetrics> =
            runs.iter().filter(|r| r.step_label() == label).collect();
        let _ = writeln!(out, "closed loop, {label}");
        let outputs = group[0].iae.values.len();
        let inputs = group[0].isci.values.len();
        let mut header = format!("{:>6}{:>14}", "basis", "pairing");
        for i in 1..=outputs {
            let _ = write!(header, "{:>12}", format!("IAE(Y{i})"));
        }
        for j in 1..=inputs {
            let _ = write!(header, "{:>12}", format!("ISCI(U{j})"));
        }
        let _ = writeln!(out, "{header}");
        for r in group {
            let _ = write!(out, "{:>6}{:>14}", r.basis.to_string(), r.pairing);
            for v in r.iae.values.iter().chain(&r.isci.values) {
                let _ = write!(out, "{v:>12.4}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
}
