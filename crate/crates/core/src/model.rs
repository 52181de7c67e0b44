//! Transfer-matrix process models.
//!
//! A plant is an r×s grid of first- or second-order-plus-dead-time channels
//! in deviation variables. Times are in seconds and gains are dimensionless.
//!
//! Plants are read from a TOML document:
//!
//! ```toml
//! [plant]
//! name = "mixing tank"
//! outputs = ["level", "temperature"]
//! inputs = ["hot", "cold", "drain"]
//!
//! [[element]]
//! output = 1          # 1-based
//! input = 1
//! kind = "fopdt"      # or "sopdt", which also needs `tau2`
//! gain = 0.8
//! tau = 12.0
//! deadtime = 2.5
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arrays::{GainArray, Role};
use crate::error::{Error, Result};
use crate::matrixops::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Fopdt,
    Sopdt,
}

/// Lag structure of one channel. Second-order channels are two real poles in
/// cascade; equal time constants are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lag {
    First { tau: f64 },
    Second { tau1: f64, tau2: f64 },
}

/// One SISO channel `k·e^{-t_d s} / lag(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferElement {
    gain: f64,
    lag: Lag,
    deadtime: f64,
}

impl TransferElement {
    pub fn fopdt(gain: f64, tau: f64, deadtime: f64) -> Result<Self> {
        Self::checked(gain, Lag::First { tau }, deadtime, "element")
    }

    pub fn sopdt(gain: f64, tau1: f64, tau2: f64, deadtime: f64) -> Result<Self> {
        Self::checked(gain, Lag::Second { tau1, tau2 }, deadtime, "element")
    }

    fn checked(gain: f64, lag: Lag, deadtime: f64, at: &str) -> Result<Self> {
        if !gain.is_finite() {
            return Err(Error::invalid(at, "gain must be finite"));
        }
        let taus: &[(&str, f64)] = match &lag {
            Lag::First { tau } => &[("tau", *tau)],
            Lag::Second { tau1, tau2 } => &[("tau", *tau1), ("tau2", *tau2)],
        };
        for (name, t) in taus {
            if !(t.is_finite() && *t > 0.0) {
                return Err(Error::invalid(at, format!("{name} must be > 0, got {t}")));
            }
        }
        if !(deadtime.is_finite() && deadtime >= 0.0) {
            return Err(Error::invalid(
                at,
                format!("deadtime must be >= 0, got {deadtime}"),
            ));
        }
        Ok(TransferElement {
            gain,
            lag,
            deadtime,
        })
    }

    pub fn kind(&self) -> ElementKind {
        match self.lag {
            Lag::First { .. } => ElementKind::Fopdt,
            Lag::Second { .. } => ElementKind::Sopdt,
        }
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn lag(&self) -> Lag {
        self.lag
    }

    /// First (or only) time constant.
    pub fn tau(&self) -> f64 {
        match self.lag {
            Lag::First { tau } => tau,
            Lag::Second { tau1, .. } => tau1,
        }
    }

    pub fn tau2(&self) -> Option<f64> {
        match self.lag {
            Lag::First { .. } => None,
            Lag::Second { tau2, .. } => Some(tau2),
        }
    }

    pub fn deadtime(&self) -> f64 {
        self.deadtime
    }

    /// Average residence time: sum of time constants plus dead time.
    pub fn residence_time(&self) -> f64 {
        match self.lag {
            Lag::First { tau } => tau + self.deadtime,
            Lag::Second { tau1, tau2 } => tau1 + tau2 + self.deadtime,
        }
    }

    /// Same channel with every time parameter multiplied by `c`.
    pub fn time_scaled(&self, c: f64) -> Result<Self> {
        let lag = match self.lag {
            Lag::First { tau } => Lag::First { tau: tau * c },
            Lag::Second { tau1, tau2 } => Lag::Second {
                tau1: tau1 * c,
                tau2: tau2 * c,
            },
        };
        Self::checked(self.gain, lag, self.deadtime * c, "scaled element")
    }
}

/// r×s plant with labelled outputs (rows) and inputs (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    name: String,
    output_names: Vec<String>,
    input_names: Vec<String>,
    elements: Vec<TransferElement>,
}

impl TransferMatrix {
    /// `elements` is row-major, one row per output.
    pub fn new(
        name: impl Into<String>,
        output_names: Vec<String>,
        input_names: Vec<String>,
        elements: Vec<Vec<TransferElement>>,
    ) -> Result<Self> {
        let (r, s) = (output_names.len(), input_names.len());
        if r == 0 || s == 0 {
            return Err(Error::invalid(
                "plant",
                "needs at least one output and one input",
            ));
        }
        if elements.len() != r || elements.iter().any(|row| row.len() != s) {
            return Err(Error::invalid(
                "plant",
                format!("element grid does not match {r} outputs x {s} inputs"),
            ));
        }
        Ok(TransferMatrix {
            name: name.into(),
            output_names,
            input_names,
            elements: elements.into_iter().flatten().collect(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rows(&self) -> usize {
        self.output_names.len()
    }

    pub fn cols(&self) -> usize {
        self.input_names.len()
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    /// 0-based.
    pub fn element(&self, output: usize, input: usize) -> &TransferElement {
        &self.elements[output * self.cols() + input]
    }

    pub fn elements(&self) -> impl Iterator<Item = ((usize, usize), &TransferElement)> {
        let s = self.cols();
        self.elements
            .iter()
            .enumerate()
            .map(move |(n, e)| ((n / s, n % s), e))
    }

    fn cellwise(&self, f: impl Fn(&TransferElement) -> f64) -> Matrix {
        Matrix::new(
            self.rows(),
            self.cols(),
            self.elements.iter().map(f).collect(),
        )
        .expect("validated plant parameters are finite")
    }

    /// Plant with every time constant and dead time multiplied by `c`.
    pub fn time_scaled(&self, c: f64) -> Result<Self> {
        Ok(TransferMatrix {
            elements: self
                .elements
                .iter()
                .map(|e| e.time_scaled(c))
                .collect::<Result<_>>()?,
            ..self.clone()
        })
    }

    /// Serializes back to the plant document schema.
    pub fn to_toml(&self) -> String {
        let doc = PlantDoc {
            plant: PlantHeader {
                name: self.name.clone(),
                outputs: self.output_names.clone(),
                inputs: self.input_names.clone(),
            },
            element: self
                .elements()
                .map(|((i, j), e)| ElementDoc {
                    output: i as i64 + 1,
                    input: j as i64 + 1,
                    kind: e.kind(),
                    gain: e.gain,
                    tau: e.tau(),
                    tau2: e.tau2(),
                    deadtime: e.deadtime,
                })
                .collect(),
        };
        toml::to_string(&doc).expect("plant document serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantDoc {
    plant: PlantHeader,
    #[serde(default)]
    element: Vec<ElementDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantHeader {
    name: String,
    outputs: Vec<String>,
    inputs: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementDoc {
    output: i64,
    input: i64,
    kind: ElementKind,
    gain: f64,
    tau: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau2: Option<f64>,
    deadtime: f64,
}

/// Parses and validates a plant document.
pub fn load_plant(config_text: &str) -> Result<TransferMatrix> {
    let doc: PlantDoc = toml::from_str(config_text).map_err(|e| Error::Parse(e.to_string()))?;
    let (r, s) = (doc.plant.outputs.len(), doc.plant.inputs.len());
    if r == 0 || s == 0 {
        return Err(Error::invalid(
            "plant",
            "outputs and inputs must be non-empty",
        ));
    }
    for (what, names) in [("output", &doc.plant.outputs), ("input", &doc.plant.inputs)] {
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::invalid(
                "plant",
                format!("duplicate {what} label {dup:?}"),
            ));
        }
    }

    let mut cells: BTreeMap<(usize, usize), TransferElement> = BTreeMap::new();
    for el in &doc.element {
        let at = format!("element (output {}, input {})", el.output, el.input);
        if el.output < 1 || el.output as usize > r || el.input < 1 || el.input as usize > s {
            return Err(Error::invalid(
                at,
                format!("index outside the {r}x{s} plant"),
            ));
        }
        let lag = match (el.kind, el.tau2) {
            (ElementKind::Fopdt, None) => Lag::First { tau: el.tau },
            (ElementKind::Sopdt, Some(tau2)) => Lag::Second { tau1: el.tau, tau2 },
            (ElementKind::Fopdt, Some(_)) => {
                return Err(Error::invalid(
                    at,
                    "tau2 is only valid for kind = \"sopdt\"",
                ))
            }
            (ElementKind::Sopdt, None) => {
                return Err(Error::invalid(at, "kind = \"sopdt\" requires tau2"))
            }
        };
        let element = TransferElement::checked(el.gain, lag, el.deadtime, &at)?;
        let key = (el.output as usize - 1, el.input as usize - 1);
        if cells.insert(key, element).is_some() {
            return Err(Error::invalid(at, "duplicate entry"));
        }
    }

    let mut grid = Vec::with_capacity(r);
    for i in 0..r {
        let mut row = Vec::with_capacity(s);
        for j in 0..s {
            let e = cells.remove(&(i, j)).ok_or_else(|| {
                Error::invalid(
                    format!("element (output {}, input {})", i + 1, j + 1),
                    "missing cell",
                )
            })?;
            row.push(e);
        }
        grid.push(row);
    }
    TransferMatrix::new(doc.plant.name, doc.plant.outputs, doc.plant.inputs, grid)
}

pub fn load_plant_file(path: impl AsRef<Path>) -> Result<TransferMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    load_plant(&text)
}

/// Steady-state gain array `K = G(0)`.
pub fn steady_state_gain(tm: &TransferMatrix) -> GainArray {
    GainArray::new(Role::K, tm.cellwise(|e| e.gain))
}

/// Average residence times `b_ij` in seconds.
pub fn residence_time(tm: &TransferMatrix) -> Matrix {
    tm.cellwise(TransferElement::residence_time)
}

/// Normalized gain array `k_ij / b_ij`.
pub fn normalized_gain(tm: &TransferMatrix) -> GainArray {
    GainArray::new(Role::Nga, tm.cellwise(|e| e.gain / e.residence_time()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    const SCALAR: &str = r#"
        [plant]
        name = "scalar"
        outputs = ["y"]
        inputs = ["u"]

        [[element]]
        output = 1
        input = 1
        kind = "fopdt"
        gain = 2.0
        tau = 10.0
        deadtime = 1.0
    "#;

    #[test]
    fn radiator_fixture_loads() {
        let tm = fixtures::radiator();
        assert_eq!((tm.rows(), tm.cols()), (2, 4));
        let g11 = tm.element(0, 0);
        assert_eq!(g11.kind(), ElementKind::Fopdt);
        assert_eq!(g11.gain(), -0.9826);
        assert_eq!(g11.tau(), 42.435);
        assert_eq!(g11.deadtime(), 13.74);
        assert_eq!(tm.element(1, 3).gain(), 1.052);
        assert_eq!(tm.output_names(), ["T_AOUT", "T_WOUT"]);
    }

    #[test]
    fn minimal_plant() {
        let tm = load_plant(SCALAR).unwrap();
        assert_eq!((tm.rows(), tm.cols()), (1, 1));
        assert_eq!(tm.element(0, 0).residence_time(), 11.0);
    }

    #[test]
    fn zero_tau_is_rejected_with_cell_name() {
        let text = SCALAR.replace("tau = 10.0", "tau = 0.0");
        let err = load_plant(&text).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Validation { .. }));
        assert!(msg.contains("output 1, input 1"), "{msg}");
        assert!(msg.contains("tau"), "{msg}");
    }

    #[test]
    fn negative_deadtime_is_rejected() {
        let text = SCALAR.replace("deadtime = 1.0", "deadtime = -0.5");
        assert!(load_plant(&text)
            .unwrap_err()
            .to_string()
            .contains("deadtime"));
    }

    #[test]
    fn missing_cell_is_rejected() {
        let text = SCALAR.replace(r#"inputs = ["u"]"#, r#"inputs = ["u", "v"]"#);
        let msg = load_plant(&text).unwrap_err().to_string();
        assert!(msg.contains("input 2") && msg.contains("missing"), "{msg}");
    }

    #[test]
    fn duplicate_cell_is_rejected() {
        let dup = format!("{SCALAR}\n[[element]]\noutput = 1\ninput = 1\nkind = \"fopdt\"\ngain = 1.0\ntau = 1.0\ndeadtime = 0.0\n");
        assert!(load_plant(&dup)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let text = SCALAR.replace("output = 1", "output = 2");
        assert!(load_plant(&text)
            .unwrap_err()
            .to_string()
            .contains("outside"));
        let text = SCALAR.replace("input = 1", "input = 0");
        assert!(load_plant(&text).is_err());
    }

    #[test]
    fn tau2_must_match_kind() {
        let text = SCALAR.replace("deadtime = 1.0", "deadtime = 1.0\ntau2 = 3.0");
        assert!(load_plant(&text).unwrap_err().to_string().contains("tau2"));
        let text = SCALAR.replace("\"fopdt\"", "\"sopdt\"");
        assert!(load_plant(&text).unwrap_err().to_string().contains("tau2"));
    }

    #[test]
    fn malformed_document_is_parse_error() {
        assert!(matches!(load_plant("plant = 3"), Err(Error::Parse(_))));
        assert!(matches!(load_plant("[plant\nname="), Err(Error::Parse(_))));
        let typo = SCALAR.replace("deadtime", "dead_time");
        assert!(matches!(load_plant(&typo), Err(Error::Parse(_))));
    }

    #[test]
    fn empty_label_lists_are_rejected() {
        let text = SCALAR.replace(r#"outputs = ["y"]"#, "outputs = []");
        assert!(load_plant(&text).is_err());
    }

    #[test]
    fn steady_state_gain_is_the_gain_field() {
        let k = steady_state_gain(&fixtures::radiator());
        assert_eq!(k.role(), Role::K);
        assert_eq!(k.matrix()[(0, 0)], -0.9826);
        assert_eq!(k.matrix()[(1, 3)], 1.052);

        let el = TransferElement::sopdt(3.0, 1.0, 2.0, 0.0).unwrap();
        let tm =
            TransferMatrix::new("s", vec!["y".into()], vec!["u".into()], vec![vec![el]]).unwrap();
        assert_eq!(steady_state_gain(&tm).matrix()[(0, 0)], 3.0);
    }

    #[test]
    fn zero_gains_give_zero_array() {
        let el = TransferElement::fopdt(0.0, 5.0, 1.0).unwrap();
        let tm = TransferMatrix::new(
            "z",
            vec!["y1".into(), "y2".into()],
            vec!["u1".into(), "u2".into()],
            vec![vec![el; 2]; 2],
        )
        .unwrap();
        assert_eq!(steady_state_gain(&tm).matrix().max_abs(), 0.0);
    }

    #[test]
    fn residence_time_examples() {
        let b = residence_time(&fixtures::radiator());
        assert_relative_eq!(b[(0, 0)], 56.175, max_relative = 1e-15);
        assert_eq!(
            TransferElement::sopdt(1.0, 1.0, 2.0, 0.5)
                .unwrap()
                .residence_time(),
            3.5
        );
        assert_eq!(
            TransferElement::fopdt(1.0, 10.0, 0.0)
                .unwrap()
                .residence_time(),
            10.0
        );
    }

    #[test]
    fn normalized_gain_examples() {
        let a = normalized_gain(&fixtures::radiator());
        assert_eq!(a.role(), Role::Nga);
        assert!((a.matrix()[(0, 0)] - -0.017492).abs() < 5e-7);
        assert!((a.matrix()[(1, 1)] - 0.017181).abs() < 5e-7);

        let el = TransferElement::fopdt(1.0, 0.75, 0.25).unwrap();
        let tm = TransferMatrix::new(
            "u",
            vec!["y".into()],
            vec!["a".into(), "b".into()],
            vec![vec![el; 2]],
        )
        .unwrap();
        assert_eq!(
            normalized_gain(&tm).matrix(),
            steady_state_gain(&tm).matrix()
        );
    }

    #[test]
    fn normalized_gain_is_one_division() {
        let tm = fixtures::radiator();
        let (k, b, a) = (
            steady_state_gain(&tm),
            residence_time(&tm),
            normalized_gain(&tm),
        );
        for i in 0..2 {
            for j in 0..4 {
                assert_eq!(a.matrix()[(i, j)], k.matrix()[(i, j)] / b[(i, j)]);
            }
        }
    }

    #[test]
    fn sopdt_constructor_validates_both_poles() {
        assert!(TransferElement::sopdt(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(TransferElement::sopdt(1.0, 2.0, 2.0, 0.0).is_ok());
    }

    #[test]
    fn round_trip_through_toml() {
        let tm = fixtures::radiator();
        assert_eq!(load_plant(&tm.to_toml()).unwrap(), tm);

        let el = TransferElement::sopdt(-1.25, 0.1, 7.0, 0.0).unwrap();
        let tm =
            TransferMatrix::new("s", vec!["y".into()], vec!["u".into()], vec![vec![el]]).unwrap();
        assert_eq!(load_plant(&tm.to_toml()).unwrap(), tm);
    }
}
