//! Acceptance suite for the radiator reference case and the numerical
//! guarantees. Runs without the test harness so that every criterion prints
//! exactly one line; the process fails if any criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rnga::arrays::{col_sum_binet_cauchy, col_sums, rga, rnga, row_sums, GainArray};
use rnga::fixtures;
use rnga::model::{normalized_gain, steady_state_gain, TransferElement, TransferMatrix};
use rnga::pairing::{recommend, PairingPlan};
use rnga::simulate::{simulate, simulate_open_loop, InputStep, Scenario, TraceMetrics};
use rnga::tuning::{imc_pid_fopdt, tune_plan};
use rnga::verify::{run_suite, Property, VerifyConfig};

const RNGA_REF: [[f64; 4]; 2] = [
    [0.7166, -0.0370, 0.3470, -0.0267],
    [-0.0486, 0.6350, -0.0210, 0.4345],
];
const RGA_REF: [[f64; 4]; 2] = [
    [0.4884, -0.0194, 0.5664, -0.0354],
    [-0.0250, 0.3759, -0.0279, 0.6770],
];
const RNGA_COL_REF: [f64; 4] = [0.668, 0.598, 0.326, 0.4078];
const RGA_COL_REF: [f64; 4] = [0.4634, 0.3565, 0.5385, 0.6416];

/// `(output, input, kc, tau_i, tau_d)`, 0-based.
const TUNING_REF: [(usize, usize, f64, f64, f64); 4] = [
    (0, 0, -2.434, 49.305, 5.912),
    (1, 1, 1.928, 38.544, 6.501),
    (0, 2, 2.697, 82.576, 8.279),
    (1, 3, 2.372, 68.396, 7.914),
];

/// Reference IAE `[step on r1, step on r2][output]` as `(RNGA plan, RGA plan)`.
const IAE_REF: [[(f64, f64); 2]; 2] = [
    [(26.67, 51.91), (9.87, 16.15)],
    [(6.94, 12.10), (26.94, 35.98)],
];
/// Reference ISCI for the step on r1, per loop, as `(RNGA plan, RGA plan)`.
const ISCI_REF: [(f64, f64); 2] = [(768.1, 1092.0), (30.3, 49.97)];
const BAND: f64 = 0.15;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn max_dev(arr: &GainArray, reference: &[[f64; 4]; 2]) -> f64 {
    let m = arr.matrix();
    let mut worst: f64 = 0.0;
    for (i, row) in reference.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            worst = worst.max((m[(i, j)] - v).abs());
        }
    }
    worst
}

fn radiator_rnga() -> GainArray {
    rnga(&normalized_gain(&fixtures::radiator())).unwrap()
}

fn radiator_rga() -> GainArray {
    rga(&steady_state_gain(&fixtures::radiator())).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let arr = radiator_rnga();
    let elapsed = start.elapsed();
    let dev = max_dev(&arr, &RNGA_REF);
    outcome(
        dev <= 1e-3 && elapsed < Duration::from_secs(1),
        format!("RNGA max deviation {dev:.2e} (tol 1e-3), {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let dev = max_dev(&radiator_rga(), &RGA_REF);
    outcome(
        dev <= 1e-3,
        format!("RGA max deviation {dev:.2e} (tol 1e-3)"),
    )
}

fn criterion_3() -> Outcome {
    let tm = fixtures::radiator();
    let mut row_dev: f64 = 0.0;
    let mut col_dev: f64 = 0.0;
    let mut oracle_dev: f64 = 0.0;
    for (base, reference) in [
        (normalized_gain(&tm), RNGA_COL_REF),
        (steady_state_gain(&tm), RGA_COL_REF),
    ] {
        let arr = rnga::arrays::interaction_array(&base).unwrap();
        for r in row_sums(&arr).unwrap().values {
            row_dev = row_dev.max((r - 1.0).abs());
        }
        let cols = col_sums(&arr).unwrap().values;
        for (j, c) in cols.iter().enumerate() {
            col_dev = col_dev.max((c - reference[j]).abs());
            oracle_dev = oracle_dev.max((c - col_sum_binet_cauchy(&base, j).unwrap()).abs());
        }
    }
    outcome(
        row_dev <= 1e-9 && col_dev <= 1e-3 && oracle_dev <= 1e-9,
        format!(
            "row sums dev {row_dev:.1e} (tol 1e-9), column sums dev {col_dev:.1e} (tol 1e-3), \
             minor expansion dev {oracle_dev:.1e} (tol 1e-9)"
        ),
    )
}

fn pairs_of(plan: &PairingPlan) -> Vec<(usize, usize)> {
    plan.pairs.iter().map(|p| (p.output, p.input)).collect()
}

fn criterion_4() -> Outcome {
    let rn = recommend(&radiator_rnga()).unwrap();
    let rg = recommend(&radiator_rga()).unwrap();
    let ok = pairs_of(&rn) == [(0, 0), (1, 1)] && pairs_of(&rg) == [(0, 2), (1, 3)];
    outcome(ok, format!("RNGA {}, RGA {}", rn.label(), rg.label()))
}

fn criterion_5() -> Outcome {
    let tm = fixtures::radiator();
    let mut worst: f64 = 0.0;
    for (i, j, kc, ti, td) in TUNING_REF {
        let s = imc_pid_fopdt(tm.element(i, j), None).unwrap();
        worst = worst
            .max((s.kc - kc).abs())
            .max((s.tau_i - ti).abs())
            .max((s.tau_d - td).abs());
    }
    outcome(
        worst <= 0.01,
        format!("8 settings, max abs deviation {worst:.4} (tol 0.01)"),
    )
}

/// Metrics for `[step on r1, step on r2]` under each plan, plus the plans.
fn closed_loop(h: f64) -> ([PairingPlan; 2], [[TraceMetrics; 2]; 2]) {
    let tm = fixtures::radiator();
    let plans = [
        recommend(&radiator_rnga()).unwrap(),
        recommend(&radiator_rga()).unwrap(),
    ];
    let run = |plan: &PairingPlan, out: usize| {
        let settings = tune_plan(&tm, plan, &BTreeMap::new()).unwrap();
        let sc = Scenario::unit_step(out).with_step_size(h);
        simulate(&tm, plan, &settings, &sc).unwrap().metrics()
    };
    let metrics = [0, 1].map(|out| [run(&plans[0], out), run(&plans[1], out)]);
    (plans, metrics)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let (plans, m) = closed_loop(0.01);
    let elapsed = start.elapsed();

    let mut misses = Vec::new();
    let mut order_breaks = Vec::new();
    let mut check = |label: String, got: f64, want: f64| {
        let rel = (got - want) / want;
        if rel.abs() > BAND {
            misses.push(format!("{label} {got:.2} vs {want} ({:+.0}%)", rel * 100.0));
        }
    };
    for (step, per_output) in IAE_REF.iter().enumerate() {
        for (out, &(want_rn, want_rg)) in per_output.iter().enumerate() {
            let (rn, rg) = (m[step][0].iae[out], m[step][1].iae[out]);
            check(format!("IAE r{} Y{} RNGA", step + 1, out + 1), rn, want_rn);
            check(format!("IAE r{} Y{} RGA", step + 1, out + 1), rg, want_rg);
            if rn >= rg {
                order_breaks.push(format!(
                    "IAE r{} Y{}: {rn:.2} >= {rg:.2}",
                    step + 1,
                    out + 1
                ));
            }
        }
    }
    for (k, &(want_rn, want_rg)) in ISCI_REF.iter().enumerate() {
        let (u_rn, u_rg) = (plans[0].pairs[k].input, plans[1].pairs[k].input);
        let (rn, rg) = (m[0][0].isci[u_rn], m[0][1].isci[u_rg]);
        check(format!("ISCI loop {} RNGA", k + 1), rn, want_rn);
        check(format!("ISCI loop {} RGA", k + 1), rg, want_rg);
        if rn >= rg {
            order_breaks.push(format!("ISCI loop {}: {rn:.2} >= {rg:.2}", k + 1));
        }
    }
    let passed = misses.is_empty() && order_breaks.is_empty() && elapsed < Duration::from_secs(30);
    let mut detail = format!(
        "{}/12 values within 15%, {} ordering violations, {elapsed:.2?}",
        12 - misses.len(),
        order_breaks.len()
    );
    if !misses.is_empty() {
        detail.push_str(&format!("; outside band: {}", misses.join(", ")));
    }
    if !order_breaks.is_empty() {
        detail.push_str(&format!("; ordering: {}", order_breaks.join(", ")));
    }
    outcome(passed, detail)
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let summary = run_suite(&VerifyConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let failing: Vec<&str> = summary
        .properties
        .iter()
        .filter(|p| p.passed != p.checked)
        .map(|p| p.description)
        .collect();
    let witness = summary.tally(Property::InputScaling);
    let duality = summary.tally(Property::TransposeDuality);
    outcome(
        failing.is_empty() && elapsed < Duration::from_secs(10) && summary.config.trials == 1000,
        format!(
            "{} trials, failing properties: {}, input-scaling witnesses {}/{}, duality worst {:.1e}, {elapsed:.2?}",
            summary.config.trials,
            if failing.is_empty() { "none".to_string() } else { failing.join(", ") },
            witness.passed,
            witness.checked,
            duality.worst.unwrap_or(0.0)
        ),
    )
}

fn criterion_8() -> Outcome {
    let (k, tau, td) = (2.0, 10.0, 1.0);
    let el = TransferElement::fopdt(k, tau, td).unwrap();
    let tm =
        TransferMatrix::new("fopdt", vec!["y".into()], vec!["u".into()], vec![vec![el]]).unwrap();
    let step = InputStep {
        input: 0,
        magnitude: 1.0,
        time: 0.0,
    };
    let trace = simulate_open_loop(&tm, &[step], 30.0, 0.01).unwrap();
    let idx = trace
        .time
        .iter()
        .position(|&t| (t - (td + tau)).abs() < 1e-9)
        .unwrap();
    let analytic_dev = (trace.outputs[0][idx] - k * (1.0 - (-1.0f64).exp())).abs();

    let (_, coarse) = closed_loop(0.02);
    let (_, fine) = closed_loop(0.01);
    let mut worst: f64 = 0.0;
    for (cs, fs) in coarse.iter().flatten().zip(fine.iter().flatten()) {
        let pairs = cs
            .iae
            .iter()
            .zip(&fs.iae)
            .chain(cs.isci.iter().zip(&fs.isci));
        for (a, b) in pairs {
            if *b != 0.0 {
                worst = worst.max(((a - b) / b).abs());
            }
        }
    }
    outcome(
        analytic_dev <= 1e-3 && worst < 1e-3,
        format!(
            "open-loop deviation {analytic_dev:.1e} (tol 1e-3), step halving 0.02 -> 0.01 s changes metrics by at most {:.4}% (tol 0.1%)",
            worst * 100.0
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("RNGA of the radiator", criterion_1),
        ("RGA of the radiator", criterion_2),
        ("row and column sums", criterion_3),
        ("pairing recommendations", criterion_4),
        ("IMC-PID settings", criterion_5),
        ("closed-loop IAE and ISCI", criterion_6),
        ("randomized property suite", criterion_7),
        ("simulation numerics", criterion_8),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} ({})",
            n + 1,
            if o.passed { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
