//! Simulation and analysis toolkit for continuous-wave photon-pair sources
//! and two-source Hong-Ou-Mandel interference.
//!
//! The crate is split along the data flow of an experiment:
//!
//! * [`biphoton`] holds the analytic model: temporal wavefunctions, the
//!   four-fold interference curve and heralded-photon purity.
//! * [`montecarlo`] turns source and detector parameters into per-detector
//!   timestamp streams.
//! * [`tagstream`] is the timestamp data model, the `TTAG1` file format and
//!   the coincidence engines.
//! * [`analysis`] runs the physics estimators (g², heralded g², Cauchy-Schwarz
//!   factor, HOM scan, rate scaling) over tag streams.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod biphoton;
mod error;
pub mod montecarlo;
pub mod tagstream;

pub use error::{Error, Result};

pub use analysis::{G2Result, HomFit, HomScanResult, RateRow, RateScaling};
pub use biphoton::{BeamSplitter, BiphotonWavefunction, HomModelParams, Profile};
pub use montecarlo::{DetectorParams, EmissionEvent, ExperimentSetup, SourceParams};
pub use tagstream::{Histogram, Origin, TagRecord, TagStream};

/// Picoseconds per nanosecond.
pub const PS_PER_NS: f64 = 1_000.0;
/// Picoseconds per second.
pub const PS_PER_S: f64 = 1.0e12;

/// Converts nanoseconds to the nearest integer picosecond.
pub fn ns_to_ps(ns: f64) -> i64 {
    (ns * PS_PER_NS).round() as i64
}
