//! Result records written by `analyze` and read back by `report`.

use serde::{Deserialize, Serialize};

use homlab_core::analysis::{AutoG2, HeraldedG2, HomFit, RateRow};

pub const RESULTS_DIR: &str = "results";
pub const ANALYSES: [&str; 5] = ["g2", "heralded-g2", "cs", "hom", "rates"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Record {
    /// `signal/idler` for the characterization run, `spd1/spd2+spd3`
    /// otherwise.
    pub streams: String,
    pub bin_ns: f64,
    pub range_ns: f64,
    pub accidental_floor: f64,
    pub peak_value: f64,
    pub peak_delay_ns: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fwhm_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence_time_ns: Option<f64>,
    pub delay_ns: Vec<f64>,
    pub counts: Vec<u64>,
    pub g2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeraldedRecord {
    pub window_ns: f64,
    /// Mean over the heralds that gave a value.
    pub mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spd1: Option<HeraldedG2>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spd4: Option<HeraldedG2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsRecord {
    pub streams: String,
    pub window_ns: f64,
    pub r: f64,
    pub g_si_peak: f64,
    pub g_ss: AutoG2,
    pub g_ii: AutoG2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomRecord {
    pub window_ns: f64,
    pub bin_ns: f64,
    pub range_ns: f64,
    pub events: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heralded_g2: Option<f64>,
    /// Model visibility with the measured heralded g2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_visibility: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    pub dt_ns: Vec<f64>,
    pub counts: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fit_curve: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theory_curve: Vec<f64>,
}

/// [`HomFit`] without the residual vector, plus its summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub baseline: f64,
    pub visibility: f64,
    pub center_ns: f64,
    pub width_ns: f64,
    pub baseline_err: f64,
    pub visibility_err: f64,
    pub center_err_ns: f64,
    pub width_err_ns: f64,
    pub chi2: f64,
    pub dof: u64,
    pub residuals: Vec<f64>,
}

impl From<&HomFit> for FitRecord {
    fn from(f: &HomFit) -> Self {
        FitRecord {
            baseline: f.baseline,
            visibility: f.visibility,
            center_ns: f.center_ns,
            width_ns: f.width_ns,
            baseline_err: f.baseline_err,
            visibility_err: f.visibility_err,
            center_err_ns: f.center_err_ns,
            width_err_ns: f.width_err_ns,
            chi2: f.chi2,
            dof: f.dof as u64,
            residuals: f.residuals.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesRecord {
    pub window_ns: f64,
    pub duration_s: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rows: Vec<RateRow>,
}
