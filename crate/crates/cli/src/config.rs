//! Experiment configuration file. Every dimensional key carries its unit.

use std::path::Path;

use homlab_core::biphoton::FWHM_PER_SIGMA;
use homlab_core::{BeamSplitter, BiphotonWavefunction, DetectorParams, ExperimentSetup, Profile, SourceParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub duration_s: f64,
    /// Scales both sources' interference term; 1 = indistinguishable.
    pub indistinguishability: f64,
    pub coherence_window_ns: f64,
    #[serde(default = "default_chunk")]
    pub chunk_s: f64,
    /// Read every detector's `jitter_ns` as a FWHM instead of a standard
    /// deviation.
    #[serde(default)]
    pub jitter_is_fwhm: bool,
    /// Also record source 1 with signal and idler detected directly.
    #[serde(default)]
    pub characterize: bool,
    pub beam_splitter: BeamSplitterConfig,
    pub source1: SourceConfig,
    pub source2: SourceConfig,
    pub spd1: DetectorConfig,
    pub spd2: DetectorConfig,
    pub spd3: DetectorConfig,
    pub spd4: DetectorConfig,
    pub analysis: AnalysisConfig,
}

fn default_chunk() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSplitterConfig {
    pub transmittance: f64,
    pub reflectance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub pair_rate_hz: f64,
    pub profile: Profile,
    pub width_ns: f64,
    #[serde(default)]
    pub center_offset_ns: f64,
    pub transmittance_signal: f64,
    pub transmittance_idler: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub efficiency: f64,
    pub dead_time_ns: f64,
    pub jitter_ns: f64,
    pub dark_rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub g2_bin_ns: f64,
    pub g2_range_ns: f64,
    pub heralded_window_ns: f64,
    pub cs_window_ns: f64,
    pub cs_thermal_substitution: bool,
    pub hom_window_ns: f64,
    pub hom_bin_ns: f64,
    pub hom_range_ns: f64,
    pub rates_window_ns: f64,
    pub rates_duration_s: f64,
    pub rates_scales: Vec<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field; the message names the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, msg: String| Err(CliError::Config(format!("{key}: {msg}")));
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad("duration_s", format!("must be > 0, got {}", self.duration_s));
        }
        if !(self.chunk_s > 0.0) {
            return bad("chunk_s", format!("must be > 0, got {}", self.chunk_s));
        }
        if let Err(e) = BeamSplitter::new(self.beam_splitter.transmittance, self.beam_splitter.reflectance) {
            return bad("beam_splitter", e.to_string());
        }
        for (key, s) in [("source1", &self.source1), ("source2", &self.source2)] {
            if let Err(e) = self.source(s) {
                return bad(key, e.to_string());
            }
        }
        for (key, d) in self.detector_configs() {
            if let Err(e) = self.detector(d).validate() {
                return bad(key, e.to_string());
            }
        }
        if let Err(e) = self.setup().validate() {
            return bad("setup", e.to_string());
        }
        let a = &self.analysis;
        let windows = [
            ("analysis.g2_range_ns", a.g2_range_ns, "analysis.g2_bin_ns", a.g2_bin_ns),
            ("analysis.hom_window_ns", a.hom_window_ns, "analysis.hom_bin_ns", a.hom_bin_ns),
            ("analysis.hom_range_ns", a.hom_range_ns, "analysis.hom_bin_ns", a.hom_bin_ns),
        ];
        for (wk, w, bk, b) in windows {
            if !(b > 0.0) {
                return bad(bk, format!("must be > 0, got {b}"));
            }
            if !(w > b) {
                return bad(wk, format!("must exceed {bk} ({w} <= {b})"));
            }
        }
        for (k, v) in [
            ("analysis.heralded_window_ns", a.heralded_window_ns),
            ("analysis.cs_window_ns", a.cs_window_ns),
            ("analysis.rates_window_ns", a.rates_window_ns),
            ("analysis.rates_duration_s", a.rates_duration_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(k, format!("must be > 0, got {v}"));
            }
        }
        if a.rates_scales.len() < 3 {
            return bad("analysis.rates_scales", format!("needs at least 3 points, got {}", a.rates_scales.len()));
        }
        if let Some(s) = a.rates_scales.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return bad("analysis.rates_scales", format!("points must be >= 0, got {s}"));
        }
        Ok(())
    }

    fn detector_configs(&self) -> [(&'static str, &DetectorConfig); 4] {
        [("spd1", &self.spd1), ("spd2", &self.spd2), ("spd3", &self.spd3), ("spd4", &self.spd4)]
    }

    pub fn source(&self, s: &SourceConfig) -> homlab_core::Result<SourceParams> {
        let p = SourceParams {
            pair_rate: s.pair_rate_hz,
            wavefunction: BiphotonWavefunction::new(s.profile, s.width_ns, s.center_offset_ns)?,
            transmittance_signal: s.transmittance_signal,
            transmittance_idler: s.transmittance_idler,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn detector(&self, d: &DetectorConfig) -> DetectorParams {
        let sigma = if self.jitter_is_fwhm { d.jitter_ns / FWHM_PER_SIGMA } else { d.jitter_ns };
        DetectorParams { efficiency: d.efficiency, dead_time_ns: d.dead_time_ns, jitter_sigma_ns: sigma, dark_rate: d.dark_rate_hz }
    }

    pub fn beam_splitter(&self) -> BeamSplitter {
        BeamSplitter::new(self.beam_splitter.transmittance, self.beam_splitter.reflectance).expect("validated beam splitter")
    }

    /// Core simulation parameters. Call after [`validate`](Self::validate).
    pub fn setup(&self) -> ExperimentSetup {
        let src = |s: &SourceConfig| self.source(s).expect("validated source");
        ExperimentSetup {
            sources: [src(&self.source1), src(&self.source2)],
            detectors: self.detector_configs().map(|(_, d)| self.detector(d)),
            beam_splitter: self.beam_splitter(),
            indistinguishability: self.indistinguishability,
            coherence_window_ns: self.coherence_window_ns,
            chunk_s: self.chunk_s,
        }
    }
}
