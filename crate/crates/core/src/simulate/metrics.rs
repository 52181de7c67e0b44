//! Integral performance indices over a simulation trace.

use serde::{Deserialize, Serialize};

use super::SimulationTrace;

/// Trapezoidal integral of samples `f` on the grid `t`.
pub fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    assert_eq!(t.len(), f.len(), "grid and samples differ in length");
    t.windows(2)
        .zip(f.windows(2))
        .map(|(tw, fw)| 0.5 * (tw[1] - tw[0]) * (fw[0] + fw[1]))
        .sum()
}

/// Integral of `|r_i − y_i|` over the trace.
pub fn iae(trace: &SimulationTrace, output: usize) -> f64 {
    let err: Vec<f64> = trace.setpoints[output]
        .iter()
        .zip(&trace.outputs[output])
        .map(|(r, y)| (r - y).abs())
        .collect();
    trapezoid(&trace.time, &err)
}

/// Integral of `u_j²` over the trace.
pub fn isci(trace: &SimulationTrace, input: usize) -> f64 {
    let sq: Vec<f64> = trace.controls[input].iter().map(|u| u * u).collect();
    trapezoid(&trace.time, &sq)
}

/// Per-output IAE and per-input ISCI, 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetrics {
    pub iae: Vec<f64>,
    pub isci: Vec<f64>,
}
