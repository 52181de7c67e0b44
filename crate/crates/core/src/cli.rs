//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a property check failed, 2 bad input (arguments,
//! plant file, scenario, singular or unsupported model, diverging loop),
//! 3 no viable pairing. Nothing is written to stdout or `--out` unless the
//! whole command succeeds.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::arrays::{interaction_array, GainArray};
use crate::error::{Error, Result};
use crate::model::{load_plant_file, normalized_gain, steady_state_gain, TransferMatrix};
use crate::pairing::{recommend, Basis, PairingPlan};
use crate::report::{render, AnalysisReport, Format, ScenarioMetrics, TuningSection};
use crate::simulate::{simulate, Scenario, SimulationTrace, DEFAULT_HORIZON, DEFAULT_STEP_SIZE};
use crate::tuning::{tune_plan, LoopTuning};
use crate::verify::{run_suite, VerifyConfig, DEFAULT_SEED, DEFAULT_TRIALS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILURE: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_NO_PAIRING: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "rnga",
    version,
    about = "Loop-pairing analysis with RGA and RNGA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gain arrays, interaction arrays, sums and property checks.
    Analyze {
        #[command(flatten)]
        plant: PlantArgs,
        /// Write the report as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pairing recommendation per basis.
    Pair {
        #[command(flatten)]
        plant: PlantArgs,
        /// Write the report as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// IMC-PID settings for the recommended loops.
    Tune {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        /// Write the report as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-loop setpoint-step simulation with IAE/ISCI.
    Simulate {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        /// 1-based output receiving a unit setpoint step; every output in turn
        /// when omitted.
        #[arg(long, value_name = "N")]
        step_output: Option<usize>,
        #[arg(long, value_name = "H", default_value_t = DEFAULT_STEP_SIZE)]
        step_size: f64,
        #[arg(long, value_name = "T", default_value_t = DEFAULT_HORIZON)]
        horizon: f64,
        /// Directory for CSV traces, metrics.json and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized property suite on wide matrices.
    Verify {
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_r: usize,
        #[arg(long, default_value_t = 6)]
        max_s: usize,
        /// Write the summary as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct PlantArgs {
    /// Plant model (TOML).
    #[arg(long, value_name = "PATH")]
    plant: PathBuf,
    #[arg(long, value_enum, default_value_t = BasisArg::Both)]
    basis: BasisArg,
}

#[derive(Debug, Args)]
struct LambdaArgs {
    /// IMC filter constant for one loop: `N=VALUE` for the loop on output N,
    /// or `YN-UM=VALUE` for that exact pair.
    #[arg(long = "lambda-f", value_name = "LOOP=VALUE", value_parser = parse_lambda)]
    lambda_f: Vec<LambdaOverride>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    Rga,
    Rnga,
    Both,
}

impl BasisArg {
    fn bases(self) -> &'static [Basis] {
        match self {
            BasisArg::Rga => &[Basis::Rga],
            BasisArg::Rnga => &[Basis::Rnga],
            BasisArg::Both => &[Basis::Rnga, Basis::Rga],
        }
    }
}

/// Filter constant for the loop on `output`, optionally only when it is
/// paired with `input`. Indices 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LambdaOverride {
    output: usize,
    input: Option<usize>,
    value: f64,
}

fn parse_index(s: &str, prefix: char) -> std::result::Result<usize, String> {
    let digits = s
        .strip_prefix(prefix)
        .or_else(|| s.strip_prefix(prefix.to_ascii_lowercase()))
        .unwrap_or(s);
    match digits.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n - 1),
        _ => Err(format!("`{s}` is not a 1-based index")),
    }
}

fn parse_lambda(s: &str) -> std::result::Result<LambdaOverride, String> {
    let (lhs, rhs) = s
        .split_once('=')
        .ok_or_else(|| format!("expected LOOP=VALUE, got `{s}`"))?;
    let value: f64 = rhs
        .trim()
        .parse()
        .map_err(|_| format!("`{rhs}` is not a number"))?;
    if !(value.is_finite() && value > 0.0) {
        return Err(format!("lambda_f must be > 0, got {rhs}"));
    }
    let lhs = lhs.trim();
    let (output, input) = match lhs.split_once('-') {
        Some((o, i)) => (parse_index(o, 'Y')?, Some(parse_index(i, 'U')?)),
        None => (parse_index(lhs, 'Y')?, None),
    };
    Ok(LambdaOverride {
        output,
        input,
        value,
    })
}

fn overrides_for(plan: &PairingPlan, all: &[LambdaOverride]) -> BTreeMap<usize, f64> {
    all.iter()
        .filter(|o| o.input.is_none_or(|j| plan.input_for(o.output) == Some(j)))
        .map(|o| (o.output, o.value))
        .collect()
}

fn check_overrides(tm: &TransferMatrix, all: &[LambdaOverride]) -> Result<()> {
    for o in all {
        if o.output >= tm.rows() || o.input.is_some_and(|j| j >= tm.cols()) {
            return Err(Error::invalid(
                "--lambda-f",
                format!(
                    "loop on output {} does not exist in a {}x{} plant",
                    o.output + 1,
                    tm.rows(),
                    tm.cols()
                ),
            ));
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoViablePairing => EXIT_NO_PAIRING,
        _ => EXIT_INVALID_INPUT,
    }
}

/// Files to write once every computation has succeeded.
#[derive(Default)]
struct Output {
    stdout: String,
    files: Vec<(PathBuf, Vec<u8>)>,
    code: i32,
}

fn base_array(tm: &TransferMatrix, basis: Basis) -> GainArray {
    match basis {
        Basis::Rga => steady_state_gain(tm),
        Basis::Rnga => normalized_gain(tm),
    }
}

fn plans(tm: &TransferMatrix, bases: &[Basis]) -> Result<Vec<PairingPlan>> {
    bases
        .iter()
        .map(|&b| recommend(&interaction_array(&base_array(tm, b))?))
        .collect()
}

fn tunings(
    tm: &TransferMatrix,
    plans: &[PairingPlan],
    lambda: &[LambdaOverride],
) -> Result<Vec<Vec<LoopTuning>>> {
    check_overrides(tm, lambda)?;
    plans
        .iter()
        .map(|p| tune_plan(tm, p, &overrides_for(p, lambda)))
        .collect()
}

fn tuning_sections(plans: &[PairingPlan], tunings: &[Vec<LoopTuning>]) -> Vec<TuningSection> {
    plans
        .iter()
        .zip(tunings)
        .map(|(p, t)| TuningSection::new(p.basis, t))
        .collect()
}

fn json_file(path: &Path, report: &AnalysisReport) -> (PathBuf, Vec<u8>) {
    (
        path.to_path_buf(),
        render(report, Format::Json).into_bytes(),
    )
}

fn run_analyze(plant: &PlantArgs, out: Option<&Path>) -> Result<Output> {
    let tm = load_plant_file(&plant.plant)?;
    let report = AnalysisReport::analyze(&tm, plant.basis.bases())?;
    let mut o = Output {
        stdout: render(&report, Format::Table),
        code: if report.all_checks_pass() {
            EXIT_OK
        } else {
            EXIT_PROPERTY_FAILURE
        },
        ..Output::default()
    };
    if let Some(p) = out {
        o.files.push(json_file(p, &report));
    }
    Ok(o)
}

fn run_pair(plant: &PlantArgs, out: Option<&Path>) -> Result<Output> {
    let tm = load_plant_file(&plant.plant)?;
    let bases = plant.basis.bases();
    let plans = plans(&tm, bases)?;
    let report = AnalysisReport::analyze(&tm, bases)?.with_plans(&plans);
    let mut o = Output {
        stdout: render(&report, Format::Table),
        ..Output::default()
    };
    if let Some(p) = out {
        o.files.push(json_file(p, &report));
    }
    Ok(o)
}

fn run_tune(plant: &PlantArgs, lambda: &LambdaArgs, out: Option<&Path>) -> Result<Output> {
    let tm = load_plant_file(&plant.plant)?;
    let bases = plant.basis.bases();
    let plans = plans(&tm, bases)?;
    let tunings = tunings(&tm, &plans, &lambda.lambda_f)?;
    let report = AnalysisReport::analyze(&tm, bases)?
        .with_plans(&plans)
        .with_tuning(tuning_sections(&plans, &tunings));
    let mut o = Output {
        stdout: render(&report, Format::Table),
        ..Output::default()
    };
    if let Some(p) = out {
        o.files.push(json_file(p, &report));
    }
    Ok(o)
}

struct SimulateArgs<'a> {
    plant: &'a PlantArgs,
    lambda: &'a LambdaArgs,
    step_output: Option<usize>,
    step_size: f64,
    horizon: f64,
    out: Option<&'a Path>,
}

fn run_simulate(a: SimulateArgs<'_>) -> Result<Output> {
    let tm = load_plant_file(&a.plant.plant)?;
    let outputs: Vec<usize> = match a.step_output {
        Some(n) if n >= 1 && n <= tm.rows() => vec![n - 1],
        Some(n) => {
            return Err(Error::invalid(
                "--step-output",
                format!("{n} is not an output of a {}-output plant", tm.rows()),
            ))
        }
        None => (0..tm.rows()).collect(),
    };
    let scenarios: Vec<Scenario> = outputs
        .iter()
        .map(|&i| {
            Scenario::unit_step(i)
                .with_step_size(a.step_size)
                .with_horizon(a.horizon)
        })
        .collect();
    for sc in &scenarios {
        sc.validate(&tm)?;
    }

    let bases = a.plant.basis.bases();
    let plans = plans(&tm, bases)?;
    let tunings = tunings(&tm, &plans, &a.lambda.lambda_f)?;

    let mut metrics = Vec::new();
    let mut traces: Vec<(String, SimulationTrace)> = Vec::new();
    for sc in &scenarios {
        for (plan, settings) in plans.iter().zip(&tunings) {
            let trace = simulate(&tm, plan, settings, sc)?;
            metrics.push(ScenarioMetrics::new(plan, sc, &trace.metrics()));
            let name = format!(
                "trace_{}_step_y{}.csv",
                plan.basis.to_string().to_lowercase(),
                sc.steps[0].output + 1
            );
            traces.push((name, trace));
        }
    }

    let report = AnalysisReport::analyze(&tm, bases)?
        .with_plans(&plans)
        .with_tuning(tuning_sections(&plans, &tunings))
        .with_metrics(metrics.clone());
    let mut stdout = render(&report, Format::Table);
    if bases.len() > 1 {
        stdout.push_str(&comparison(&metrics, &plans));
    }
    let mut o = Output {
        stdout,
        ..Output::default()
    };
    if let Some(dir) = a.out {
        for (name, trace) in &traces {
            let mut buf = Vec::new();
            trace.write_csv(&mut buf)?;
            o.files.push((dir.join(name), buf));
        }
        let mut m = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
        m.push('\n');
        o.files.push((dir.join("metrics.json"), m.into_bytes()));
        o.files.push(json_file(&dir.join("report.json"), &report));
    }
    Ok(o)
}

/// Side-by-side IAE of the first two bases and ISCI of their paired inputs.
fn comparison(metrics: &[ScenarioMetrics], plans: &[PairingPlan]) -> String {
    let (a, b) = (&plans[0], &plans[1]);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "comparison {} ({}) vs {} ({})",
        a.basis,
        a.label(),
        b.basis,
        b.label()
    );
    for pair in metrics.chunks(2) {
        let [ma, mb] = pair else { continue };
        let _ = writeln!(out, "  unit step on r{}", ma.steps[0].output);
        for (i, (x, y)) in ma.iae.values.iter().zip(&mb.iae.values).enumerate() {
            let mark = if x < y { "<" } else { ">=" };
            let _ = writeln!(out, "    IAE(Y{})   {x:>12.4} {mark:>2} {y:.4}", i + 1);
        }
        for (k, (pa, pb)) in a.pairs.iter().zip(&b.pairs).enumerate() {
            let (x, y) = (ma.isci.values[pa.input], mb.isci.values[pb.input]);
            let mark = if x < y { "<" } else { ">=" };
            let _ = writeln!(
                out,
                "    ISCI(loop {}) U{} {x:>10.4} {mark:>2} U{} {y:.4}",
                k + 1,
                pa.input + 1,
                pb.input + 1
            );
        }
    }
    out
}

fn run_verify(cfg: VerifyConfig, out: Option<&Path>) -> Result<Output> {
    let summary = run_suite(&cfg)?;
    let mut o = Output {
        stdout: summary.to_table(),
        code: if summary.all_passed() {
            EXIT_OK
        } else {
            EXIT_PROPERTY_FAILURE
        },
        ..Output::default()
    };
    if let Some(p) = out {
        o.files
            .push((p.to_path_buf(), summary.to_json().into_bytes()));
    }
    Ok(o)
}

fn dispatch(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Analyze { plant, out } => run_analyze(plant, out.as_deref()),
        Command::Pair { plant, out } => run_pair(plant, out.as_deref()),
        Command::Tune { plant, lambda, out } => run_tune(plant, lambda, out.as_deref()),
        Command::Simulate {
            plant,
            lambda,
            step_output,
            step_size,
            horizon,
            out,
        } => run_simulate(SimulateArgs {
            plant,
            lambda,
            step_output: *step_output,
            step_size: *step_size,
            horizon: *horizon,
            out: out.as_deref(),
        }),
        Command::Verify {
            trials,
            seed,
            max_r,
            max_s,
            out,
        } => run_verify(
            VerifyConfig {
                trials: *trials,
                max_r: *max_r,
                max_s: *max_s,
                seed: *seed,
            },
            out.as_deref(),
        ),
    }
}

fn write_files(files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    for (path, bytes) in files {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, bytes)?;
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_INVALID_INPUT;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = dispatch(&cli).and_then(|o| write_files(&o.files).map(|_| o));
    match result {
        Ok(o) => {
            if let Err(e) = stdout.write_all(o.stdout.as_bytes()) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_INVALID_INPUT;
            }
            o.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata<'_>) -> bool {
        metadata.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record<'_>) {
        if self.enabled(record.metadata()) {
            eprintln!(
                "{}: {}",
                record.level().as_str().to_lowercase(),
                record.args()
            );
        }
    }

    fn flush(&self) {}
}

/// Routes library warnings to stderr. Safe to call more than once.
pub fn init_logging() {
    static LOGGER: StderrLogger = StderrLogger;
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(log::LevelFilter::Warn);
    }
}
