//! Interaction analysis and decentralized control design for multivariable
//! plants described by FOPDT/SOPDT transfer matrices.
//!
//! The pipeline runs model → gain arrays → relative arrays (RGA, RNGA) →
//! pairing → IMC-PID tuning → closed-loop simulation. Square, wide and tall
//! plants are supported for analysis; pairing needs at least as many inputs
//! as outputs.
//!
//! ```
//! use rnga::{arrays, fixtures, model, pairing};
//!
//! let plant = fixtures::radiator();
//! let rn = arrays::rnga(&model::normalized_gain(&plant)).unwrap();
//! let plan = pairing::recommend(&rn).unwrap();
//! assert_eq!(plan.label(), "Y1-U1/Y2-U2");
//! ```

pub mod arrays;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod matrixops;
pub mod model;
pub mod pairing;
pub mod report;
pub mod simulate;
pub mod tuning;
pub mod verify;

pub use error::{Error, Result};
