//! Event-level simulation of two autonomous CW photon-pair sources, the
//! fibre beam splitter where their idlers meet, and four single-photon
//! detectors.
//!
//! Simulation times are `f64` picoseconds until detection quantizes them
//! to the integer tag grid.

mod beamsplitter;
mod detector;
mod experiment;
mod generate;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::biphoton::BiphotonWavefunction;
use crate::{Error, Result};

pub use beamsplitter::{interfere_at_bs, opposite_port_probability, OverlapTable, Port};
pub use detector::detect;
pub use experiment::{simulate_experiment, simulate_pair_source, ExperimentSetup, SPD_COUNT};
pub use generate::{generate_pairs, generate_pairs_capped, DEFAULT_EVENT_CAP};

/// One SFWM source: pair generation rate, temporal wavefunction and the
/// flat transmittance of each arm up to the detector (or beam splitter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Pairs per second.
    pub pair_rate: f64,
    pub wavefunction: BiphotonWavefunction,
    pub transmittance_signal: f64,
    pub transmittance_idler: f64,
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate.is_finite() && self.pair_rate >= 0.0) {
            return Err(Error::domain(format!("pair rate must be >= 0, got {}", self.pair_rate)));
        }
        for (name, t) in [("signal", self.transmittance_signal), ("idler", self.transmittance_idler)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::domain(format!("{name} transmittance must lie in [0, 1], got {t}")));
            }
        }
        Ok(())
    }

    pub fn with_pair_rate(mut self, pair_rate: f64) -> Self {
        self.pair_rate = pair_rate;
        self
    }
}

/// Single-photon detector with non-paralyzable dead time and gaussian
/// timing jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub efficiency: f64,
    pub dead_time_ns: f64,
    /// Standard deviation of the timing jitter.
    pub jitter_sigma_ns: f64,
    /// Dark counts per second.
    pub dark_rate: f64,
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::domain(format!("detector efficiency must lie in [0, 1], got {}", self.efficiency)));
        }
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !nonneg(self.dead_time_ns) {
            return Err(Error::domain("detector dead time must be >= 0"));
        }
        if !nonneg(self.jitter_sigma_ns) {
            return Err(Error::domain("detector jitter must be >= 0"));
        }
        if !nonneg(self.dark_rate) {
            return Err(Error::domain("detector dark rate must be >= 0"));
        }
        Ok(())
    }

    /// An ideal detector: unit efficiency, no dead time, jitter or darks.
    pub fn ideal() -> Self {
        DetectorParams { efficiency: 1.0, dead_time_ns: 0.0, jitter_sigma_ns: 0.0, dark_rate: 0.0 }
    }
}

/// A generated photon pair. `signal_time` is the herald reference and
/// equals `pair_time`; `idler_time - signal_time` follows `|h|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionEvent {
    pub pair_time: f64,
    pub signal_time: f64,
    pub idler_time: f64,
}

/// A photon in flight. `emitted` is the creation time of its pair, which
/// anchors the wavepacket for interference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Photon {
    pub time: f64,
    pub emitted: f64,
}

/// SplitMix64 finalizer, used to derive independent per-chunk and
/// per-purpose seeds from one user seed.
pub(crate) fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
