use serde::{Deserialize, Serialize};

use super::fit::linear_fit;
use crate::montecarlo::{mix_seed, simulate_pair_source, DetectorParams, SourceParams};
use crate::tagstream::count_coincidences;
use crate::{Error, Result, PS_PER_S};

/// Rates for one pump scale, all in counts per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub scale: f64,
    pub singles_signal: f64,
    pub singles_idler: f64,
    pub raw_coincidences: f64,
    pub accidental_coincidences: f64,
    pub net_coincidences: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateScaling {
    pub rows: Vec<RateRow>,
    /// Net coincidence rate per unit scale.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Simulates `src` at `pair_rate * scale` for each scale and measures the
/// singles and net coincidence rates within `window` (ps).
#[allow(clippy::too_many_arguments)]
pub fn rate_scaling(
    src: &SourceParams,
    det_signal: &DetectorParams,
    det_idler: &DetectorParams,
    scales: &[f64],
    duration_s: f64,
    window: i64,
    chunk_s: f64,
    seed: u64,
) -> Result<RateScaling> {
    if scales.len() < 3 {
        return Err(Error::domain(format!("rate scaling needs at least 3 scale points, got {}", scales.len())));
    }
    if let Some(bad) = scales.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::domain(format!("scale points must be >= 0, got {bad}")));
    }
    let mut rows = Vec::with_capacity(scales.len());
    for (k, &scale) in scales.iter().enumerate() {
        let point = src.with_pair_rate(src.pair_rate * scale);
        let (s, i) = simulate_pair_source(&point, det_signal, det_idler, duration_s, chunk_s, mix_seed(seed, k as u64, 0x7a7e))?;
        let t = s.duration() as f64 / PS_PER_S;
        let raw = count_coincidences(&s, &i, window, 0)? as f64 / t;
        let (rs, ri) = (s.len() as f64 / t, i.len() as f64 / t);
        // |dt| <= w/2 inclusive spans w + 1 integer picoseconds
        let acc = rs * ri * (window + 1) as f64 / PS_PER_S;
        rows.push(RateRow {
            scale,
            singles_signal: rs,
            singles_idler: ri,
            raw_coincidences: raw,
            accidental_coincidences: acc,
            net_coincidences: raw - acc,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.scale).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.net_coincidences).collect();
    let line = linear_fit(&x, &y)?;
    Ok(RateScaling { rows, slope: line.slope, intercept: line.intercept, r_squared: line.r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::BiphotonWavefunction;

    fn src() -> SourceParams {
        SourceParams {
            pair_rate: 2e5,
            wavefunction: BiphotonWavefunction::gaussian(0.6).unwrap(),
            transmittance_signal: 0.2,
            transmittance_idler: 0.2,
        }
    }

    #[test]
    fn zero_scale_gives_dark_rates() {
        let det = DetectorParams { efficiency: 0.6, dead_time_ns: 50.0, jitter_sigma_ns: 0.2, dark_rate: 5000.0 };
        let r = rate_scaling(&src(), &det, &det, &[0.0, 1.0, 2.0], 2.0, 7000, 0.01, 9).unwrap();
        let z = r.rows[0];
        for v in [z.singles_signal, z.singles_idler] {
            assert!((v - 5000.0).abs() < 4.0 * (5000.0f64 / 2.0).sqrt(), "{v}");
        }
        assert!(r.rows[2].net_coincidences > r.rows[1].net_coincidences);
    }

    #[test]
    fn needs_three_points() {
        let det = DetectorParams::ideal();
        assert!(rate_scaling(&src(), &det, &det, &[1.0, 2.0], 1.0, 7000, 0.01, 0).is_err());
    }
}
