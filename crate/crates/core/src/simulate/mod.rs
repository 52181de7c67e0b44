//! Fixed-step closed-loop simulation of a delayed transfer-matrix plant
//! under decentralized PID control.
//!
//! Every channel `G_ij` is realized as its own lag state(s) driven by the
//! delayed input `u_j(t − θ_ij)`; output `y_i` is the sum over its row. The
//! whole state (plant lags, PID integrators, derivative filters) advances with
//! classical RK4. Delayed inputs come from a per-input sample history on the
//! simulation grid. Across each step a delayed input is held at its mean over
//! the delayed interval, integrating the linear interpolant between samples
//! exactly. Channels without dead time read the control law directly from the
//! stage state.
//!
//! Everything is in deviation variables and starts at rest.

mod history;
mod metrics;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Lag, TransferMatrix};
use crate::pairing::PairingPlan;
use crate::tuning::LoopTuning;
use history::InputHistory;

pub use metrics::{iae, isci, trapezoid, TraceMetrics};

pub const DEFAULT_STEP_SIZE: f64 = 0.01;
pub const DEFAULT_HORIZON: f64 = 500.0;

/// Dead times must span at least this many steps.
pub const MIN_STEPS_PER_DEADTIME: f64 = 10.0;

const DIVERGENCE_LIMIT: f64 = 1e12;

/// Setpoint change `r_output += magnitude` at `time`. `output` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetpointStep {
    pub output: usize,
    pub magnitude: f64,
    pub time: f64,
}

/// Open-loop input change `u_input += magnitude` at `time`. `input` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputStep {
    pub input: usize,
    pub magnitude: f64,
    pub time: f64,
}

/// What drives inputs that no loop is paired with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnpairedPolicy {
    /// Held at zero deviation (steady state).
    #[default]
    HoldZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub steps: Vec<SetpointStep>,
    /// Simulated time span, s.
    pub horizon: f64,
    /// Integration step `h`, s.
    pub step_size: f64,
    pub unpaired: UnpairedPolicy,
    /// Symmetric clamp on every controller output. Off by default; there is
    /// no anti-windup.
    pub control_limit: Option<f64>,
}

impl Scenario {
    /// Unit setpoint step on one output at `t = 0` with default horizon and step.
    pub fn unit_step(output: usize) -> Self {
        Scenario {
            steps: vec![SetpointStep {
                output,
                magnitude: 1.0,
                time: 0.0,
            }],
            horizon: DEFAULT_HORIZON,
            step_size: DEFAULT_STEP_SIZE,
            unpaired: UnpairedPolicy::HoldZero,
            control_limit: None,
        }
    }

    pub fn with_step_size(mut self, h: f64) -> Self {
        self.step_size = h;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self, tm: &TransferMatrix) -> Result<()> {
        check_grid(tm, self.horizon, self.step_size)?;
        for st in &self.steps {
            if st.output >= tm.rows() {
                return Err(Error::invalid(
                    "scenario",
                    format!(
                        "setpoint step on output {} of a {}-output plant",
                        st.output + 1,
                        tm.rows()
                    ),
                ));
            }
            check_event(st.magnitude, st.time, self.horizon)?;
        }
        if let Some(l) = self.control_limit {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::invalid("scenario", "control limit must be > 0"));
            }
        }
        Ok(())
    }

    fn setpoint(&self, output: usize, t: f64) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.output == output && t >= s.time)
            .map(|s| s.magnitude)
            .sum()
    }
}

fn check_grid(tm: &TransferMatrix, horizon: f64, h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(
            "scenario",
            format!("step size must be > 0, got {h}"),
        ));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid(
            "scenario",
            format!("horizon must be > 0, got {horizon}"),
        ));
    }
    if h > horizon {
        return Err(Error::invalid("scenario", "step size exceeds the horizon"));
    }
    let max_delay = tm.elements().map(|(_, e)| e.deadtime()).fold(0.0, f64::max);
    if horizon <= max_delay {
        return Err(Error::invalid(
            "scenario",
            format!("horizon {horizon} s does not exceed the longest dead time {max_delay} s"),
        ));
    }
    let min_delay = tm
        .elements()
        .map(|(_, e)| e.deadtime())
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if h > min_delay / MIN_STEPS_PER_DEADTIME {
        return Err(Error::invalid(
            "scenario",
            format!(
                "step size {h} s is coarser than 1/{MIN_STEPS_PER_DEADTIME} of the shortest dead time {min_delay} s"
            ),
        ));
    }
    Ok(())
}

fn check_event(magnitude: f64, time: f64, horizon: f64) -> Result<()> {
    if !magnitude.is_finite() {
        return Err(Error::invalid("scenario", "step magnitude must be finite"));
    }
    if !(time.is_finite() && time >= 0.0) {
        return Err(Error::invalid(
            "scenario",
            format!("step time must be >= 0, got {time}"),
        ));
    }
    if time >= horizon {
        return Err(Error::invalid(
            "scenario",
            format!("horizon {horizon} s must exceed the step time {time} s"),
        ));
    }
    Ok(())
}

/// Time series on a shared grid. Series are indexed `[channel][sample]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub time: Vec<f64>,
    pub setpoints: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    pub controls: Vec<Vec<f64>>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn metrics(&self) -> TraceMetrics {
        TraceMetrics {
            iae: (0..self.outputs.len()).map(|i| iae(self, i)).collect(),
            isci: (0..self.controls.len()).map(|j| isci(self, j)).collect(),
        }
    }

    /// CSV with header `t,r1..rr,y1..yr,u1..us`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.setpoints.len()).map(|i| format!("r{i}")));
        header.extend((1..=self.outputs.len()).map(|i| format!("y{i}")));
        header.extend((1..=self.controls.len()).map(|j| format!("u{j}")));
        w.write_record(&header).map_err(csv_err)?;
        for k in 0..self.time.len() {
            let row = std::iter::once(self.time[k])
                .chain(self.setpoints.iter().map(|s| s[k]))
                .chain(self.outputs.iter().map(|s| s[k]))
                .chain(self.controls.iter().map(|s| s[k]))
                .map(|v| v.to_string());
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// One decentralized PID loop in parallel form with a first-order filtered
/// derivative on the error.
#[derive(Debug, Clone, Copy)]
struct Loop {
    output: usize,
    input: usize,
    kc: f64,
    tau_i: f64,
    /// `(τd, τd/N)` when derivative action is present.
    derivative: Option<(f64, f64)>,
}

enum Drive<'a> {
    Closed {
        scenario: &'a Scenario,
        loops: Vec<Loop>,
    },
    Open {
        steps: &'a [InputStep],
    },
}

/// Where each channel's states live in the flat state vector.
struct Cell {
    input: usize,
    gain: f64,
    lag: Lag,
    /// Dead time in grid steps.
    delay_steps: f64,
    state: usize,
}

struct Engine<'a> {
    rows: usize,
    cols: usize,
    cells: Vec<Cell>,
    drive: Drive<'a>,
    /// Start of the controller block in the state vector.
    ctrl_base: usize,
    dim: usize,
    h: f64,
}

impl Engine<'_> {
    fn output(&self, x: &[f64], i: usize) -> f64 {
        self.cells[i * self.cols..(i + 1) * self.cols]
            .iter()
            .map(|c| match c.lag {
                Lag::First { .. } => x[c.state],
                Lag::Second { .. } => x[c.state + 1],
            })
            .sum()
    }

    fn setpoint(&self, i: usize, t: f64) -> f64 {
        match &self.drive {
            Drive::Closed { scenario, .. } => scenario.setpoint(i, t),
            Drive::Open { .. } => 0.0,
        }
    }

    /// Control vector at time `t` for state `x`.
    fn controls(&self, t: f64, x: &[f64], u: &mut [f64]) {
        u.iter_mut().for_each(|v| *v = 0.0);
        match &self.drive {
            Drive::Closed { scenario, loops } => {
                for (l, lp) in loops.iter().enumerate() {
                    let e = scenario.setpoint(lp.output, t) - self.output(x, lp.output);
                    let integral = x[self.ctrl_base + 2 * l];
                    let mut v = lp.kc * (e + integral / lp.tau_i);
                    if let Some((tau_d, tf)) = lp.derivative {
                        let filtered = x[self.ctrl_base + 2 * l + 1];
                        v += lp.kc * tau_d * (e - filtered) / tf;
                    }
                    if let Some(lim) = scenario.control_limit {
                        v = v.clamp(-lim, lim);
                    }
                    u[lp.input] = v;
                }
            }
            Drive::Open { steps } => {
                for s in steps.iter().filter(|s| t >= s.time) {
                    u[s.input] += s.magnitude;
                }
            }
        }
    }

    /// State derivative at time `t`. `delayed` holds each cell's delayed
    /// input for the current step.
    fn derivative(&self, t: f64, x: &[f64], delayed: &[f64], u: &mut [f64], dx: &mut [f64]) {
        self.controls(t, x, u);
        for (c, &held) in self.cells.iter().zip(delayed) {
            let ud = if c.delay_steps == 0.0 {
                u[c.input]
            } else {
                held
            };
            match c.lag {
                Lag::First { tau } => dx[c.state] = (c.gain * ud - x[c.state]) / tau,
                Lag::Second { tau1, tau2 } => {
                    dx[c.state] = (c.gain * ud - x[c.state]) / tau1;
                    dx[c.state + 1] = (x[c.state] - x[c.state + 1]) / tau2;
                }
            }
        }
        if let Drive::Closed { loops, .. } = &self.drive {
            for (l, lp) in loops.iter().enumerate() {
                let e = self.setpoint(lp.output, t) - self.output(x, lp.output);
                let k = self.ctrl_base + 2 * l;
                dx[k] = e;
                dx[k + 1] = match lp.derivative {
                    Some((_, tf)) => (e - x[k + 1]) / tf,
                    None => 0.0,
                };
            }
        }
    }

    fn run(&self, horizon: f64) -> Result<SimulationTrace> {
        let h = self.h;
        let n_steps = (horizon / h).round() as usize;
        let max_delay = self.cells.iter().map(|c| c.delay_steps).fold(0.0, f64::max);
        let mut hist: Vec<InputHistory> = (0..self.cols)
            .map(|_| InputHistory::new(max_delay + 1.0))
            .collect();

        let mut x = vec![0.0; self.dim];
        let mut u = vec![0.0; self.cols];
        let mut k: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; self.dim]);
        let mut tmp = vec![0.0; self.dim];
        let mut delayed = vec![0.0; self.cells.len()];

        let mut trace = SimulationTrace {
            time: Vec::with_capacity(n_steps + 1),
            setpoints: vec![Vec::with_capacity(n_steps + 1); self.rows],
            outputs: vec![Vec::with_capacity(n_steps + 1); self.rows],
            controls: vec![Vec::with_capacity(n_steps + 1); self.cols],
        };

        for n in 0..=n_steps {
            let t = n as f64 * h;
            self.controls(t, &x, &mut u);
            for (hj, &uj) in hist.iter_mut().zip(&u) {
                hj.push(uj);
            }
            trace.time.push(t);
            for i in 0..self.rows {
                trace.setpoints[i].push(self.setpoint(i, t));
                trace.outputs[i].push(self.output(&x, i));
            }
            for (cj, &uj) in trace.controls.iter_mut().zip(&u) {
                cj.push(uj);
            }
            if n == n_steps {
                break;
            }

            for (d, c) in delayed.iter_mut().zip(&self.cells) {
                if c.delay_steps > 0.0 {
                    let from = n as f64 - c.delay_steps;
                    *d = hist[c.input].average(from, from + 1.0);
                }
            }
            let [k1, k2, k3, k4] = &mut k;
            self.derivative(t, &x, &delayed, &mut u, k1);
            axpy(&x, 0.5 * h, k1, &mut tmp);
            self.derivative(t + 0.5 * h, &tmp, &delayed, &mut u, k2);
            axpy(&x, 0.5 * h, k2, &mut tmp);
            self.derivative(t + 0.5 * h, &tmp, &delayed, &mut u, k3);
            axpy(&x, h, k3, &mut tmp);
            self.derivative(t + h, &tmp, &delayed, &mut u, k4);
            for q in 0..self.dim {
                x[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
            }
            if let Some(q) = x
                .iter()
                .position(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT)
            {
                return Err(Error::Divergence {
                    time: t + h,
                    what: format!("state {q} reached {}", x[q]),
                });
            }
        }
        Ok(trace)
    }
}

fn axpy(x: &[f64], a: f64, d: &[f64], out: &mut [f64]) {
    for ((o, xi), di) in out.iter_mut().zip(x).zip(d) {
        *o = xi + a * di;
    }
}

fn build_cells(tm: &TransferMatrix, h: f64) -> (Vec<Cell>, usize) {
    let mut next = 0;
    let cells = tm
        .elements()
        .map(|((_, j), e)| {
            let c = Cell {
                input: j,
                gain: e.gain(),
                lag: e.lag(),
                delay_steps: e.deadtime() / h,
                state: next,
            };
            next += match e.lag() {
                Lag::First { .. } => 1,
                Lag::Second { .. } => 2,
            };
            c
        })
        .collect();
    (cells, next)
}

/// Closed-loop run of `tm` under the decentralized controllers `settings`,
/// which must match the pairs of `plan`.
pub fn simulate(
    tm: &TransferMatrix,
    plan: &PairingPlan,
    settings: &[LoopTuning],
    scenario: &Scenario,
) -> Result<SimulationTrace> {
    scenario.validate(tm)?;
    if settings.len() != plan.pairs.len() {
        return Err(Error::invalid(
            "controller settings",
            format!(
                "{} settings for {} paired loops",
                settings.len(),
                plan.pairs.len()
            ),
        ));
    }
    let mut loops = Vec::with_capacity(settings.len());
    for lt in settings {
        let p = lt.pair;
        if p.output >= tm.rows()
            || p.input >= tm.cols()
            || plan.input_for(p.output) != Some(p.input)
        {
            return Err(Error::invalid(
                "controller settings",
                format!("loop {p} is not part of the {} plan", plan.basis),
            ));
        }
        let s = lt.settings;
        if !(s.tau_i > 0.0 && s.tau_d >= 0.0 && s.kc.is_finite()) {
            return Err(Error::invalid(
                format!("controller {p}"),
                "needs tau_i > 0 and tau_d >= 0",
            ));
        }
        let derivative = s.derivative_filter_time().map(|tf| (s.tau_d, tf));
        if derivative.is_some()
            && s.derivative_filter_ratio.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
        {
            return Err(Error::invalid(
                format!("controller {p}"),
                "derivative filter ratio must be > 0",
            ));
        }
        loops.push(Loop {
            output: p.output,
            input: p.input,
            kc: s.kc,
            tau_i: s.tau_i,
            derivative,
        });
    }

    let h = scenario.step_size;
    let (cells, plant_dim) = build_cells(tm, h);
    let engine = Engine {
        rows: tm.rows(),
        cols: tm.cols(),
        cells,
        ctrl_base: plant_dim,
        dim: plant_dim + 2 * loops.len(),
        drive: Drive::Closed { scenario, loops },
        h,
    };
    engine.run(scenario.horizon)
}

/// Open-loop response of `tm` to prescribed input steps, from rest.
pub fn simulate_open_loop(
    tm: &TransferMatrix,
    steps: &[InputStep],
    horizon: f64,
    step_size: f64,
) -> Result<SimulationTrace> {
    check_grid(tm, horizon, step_size)?;
    for s in steps {
        if s.input >= tm.cols() {
            return Err(Error::invalid(
                "input step",
                format!("input {} of a {}-input plant", s.input + 1, tm.cols()),
            ));
        }
        check_event(s.magnitude, s.time, horizon)?;
    }
    let (cells, dim) = build_cells(tm, step_size);
    let engine = Engine {
        rows: tm.rows(),
        cols: tm.cols(),
        cells,
        ctrl_base: dim,
        dim,
        drive: Drive::Open { steps },
        h: step_size,
    };
    engine.run(horizon)
}
