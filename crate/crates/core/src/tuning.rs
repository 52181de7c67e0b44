//! IMC-PID settings for FOPDT loops.
//!
//! With a first-order Padé approximation of the dead time, internal model
//! control of `k·e^{-θs}/(τs + 1)` with filter `1/(λs + 1)` yields an ideal
//! PID `kc·(1 + 1/(τi·s) + τd·s)` with
//!
//! ```text
//! kc = (2τ + θ) / (k·(2λ + θ))    τi = τ + θ/2    τd = τθ / (2τ + θ)
//! ```
//!
//! The filter constant defaults to λ = θ.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ElementKind, TransferElement, TransferMatrix};
use crate::pairing::{Pair, PairingPlan};

/// Derivative filter ratio `N`: the derivative acts through `τd·s/(τd/N·s + 1)`.
pub const DEFAULT_FILTER_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidSettings {
    /// Proportional gain; carries the sign of the inverse process gain.
    pub kc: f64,
    /// Integral time, s.
    pub tau_i: f64,
    /// Derivative time, s.
    pub tau_d: f64,
    /// IMC filter time constant used in the design, s.
    pub lambda_f: f64,
    pub derivative_filter_ratio: f64,
}

impl PidSettings {
    /// Derivative filter time constant `τd/N`, or `None` without derivative action.
    pub fn derivative_filter_time(&self) -> Option<f64> {
        (self.tau_d > 0.0).then(|| self.tau_d / self.derivative_filter_ratio)
    }
}

/// IMC-PID for one FOPDT channel. `lambda_f = None` uses the dead time.
pub fn imc_pid_fopdt(el: &TransferElement, lambda_f: Option<f64>) -> Result<PidSettings> {
    if el.kind() != ElementKind::Fopdt {
        return Err(Error::Unsupported(
            "IMC-PID rule is defined for FOPDT channels only".into(),
        ));
    }
    let (k, tau, theta) = (el.gain(), el.tau(), el.deadtime());
    if k == 0.0 {
        return Err(Error::invalid("tuning", "process gain is zero"));
    }
    let lambda = match lambda_f {
        Some(l) if l.is_finite() && l > 0.0 => l,
        Some(l) => {
            return Err(Error::invalid(
                "tuning",
                format!("lambda_f must be > 0, got {l}"),
            ))
        }
        None if theta > 0.0 => theta,
        None => {
            return Err(Error::invalid(
                "tuning",
                "dead time is zero, so lambda_f must be given explicitly",
            ))
        }
    };
    Ok(PidSettings {
        kc: (2.0 * tau + theta) / (k * (2.0 * lambda + theta)),
        tau_i: tau + theta / 2.0,
        tau_d: tau * theta / (2.0 * tau + theta),
        lambda_f: lambda,
        derivative_filter_ratio: DEFAULT_FILTER_RATIO,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopTuning {
    pub pair: Pair,
    pub settings: PidSettings,
}

/// Tunes every loop of `plan`, in output order. `lambda_overrides` maps a
/// 0-based output index to its filter constant.
pub fn tune_plan(
    tm: &TransferMatrix,
    plan: &PairingPlan,
    lambda_overrides: &BTreeMap<usize, f64>,
) -> Result<Vec<LoopTuning>> {
    if let Some(bad) = lambda_overrides.keys().find(|&&o| o >= tm.rows()) {
        return Err(Error::invalid(
            "lambda_f override",
            format!("loop {} does not exist", bad + 1),
        ));
    }
    let mut pairs = plan.pairs.clone();
    pairs.sort_by_key(|p| p.output);
    pairs
        .into_iter()
        .map(|pair| {
            let el = tm.element(pair.output, pair.input);
            let settings = imc_pid_fopdt(el, lambda_overrides.get(&pair.output).copied()).map_err(
                |e| match e {
                    Error::Unsupported(msg) => Error::Unsupported(format!("loop {pair}: {msg}")),
                    Error::Validation { reason, .. } => {
                        Error::invalid(format!("tuning of loop {pair}"), reason)
                    }
                    other => other,
                },
            )?;
            Ok(LoopTuning { pair, settings })
        })
        .collect()
}
