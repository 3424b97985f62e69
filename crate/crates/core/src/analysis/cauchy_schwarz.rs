use rand::Rng;
use serde::{Deserialize, Serialize};

use super::g2::cross_g2;
use crate::montecarlo::{mix_seed, rng};
use crate::tagstream::{count_coincidences, TagStream};
use crate::{Error, Result};

/// Zero-delay auto-correlation from a virtual 50/50 split of one stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoG2 {
    /// Value used in the Cauchy-Schwarz ratio.
    pub value: f64,
    /// Value as measured, before any thermal substitution.
    pub measured: f64,
    pub sigma: f64,
    pub coincidences: u64,
    /// Measured value was within 3 sigma of 2 and replaced by 2.
    pub thermal_substituted: bool,
    /// Delay (ps) at which the halves were compared. Non-zero when the
    /// stream's minimum tag spacing masks the zero-delay window.
    pub delay_ps: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchySchwarz {
    pub r: f64,
    pub g_si_peak: f64,
    pub g_ss: AutoG2,
    pub g_ii: AutoG2,
}

/// Splits `stream` at random into two halves and counts coincidences between
/// them within `window`.
///
/// A single detector cannot report two tags closer than its dead time. When
/// the closest pair of tags is further apart than half the window, the
/// zero-delay bin is empty by construction, so the halves are compared at
/// `+-delay` just outside that masked region instead. A detector that has
/// just recovered counts at its input rate `m / (1 - m d)` rather than the
/// measured rate `m`, so the floor is raised by that factor.
pub fn auto_g2_zero(stream: &TagStream, window: i64, seed: u64, thermal: bool) -> Result<AutoG2> {
    if window <= 0 {
        return Err(Error::domain("auto-correlation window must be positive"));
    }
    let mut r = rng(mix_seed(seed, stream.channel() as u64, 0x5711));
    let (mut h1, mut h2) = (Vec::new(), Vec::new());
    for &t in stream.times() {
        if r.random::<bool>() {
            h1.push(t);
        } else {
            h2.push(t);
        }
    }
    let duration = stream.duration();
    let h1 = TagStream::new(0, h1, duration, stream.origin())?;
    let h2 = TagStream::new(1, h2, duration, stream.origin())?;
    if h1.is_empty() || h2.is_empty() || duration == 0 {
        return Err(Error::stats("stream too short to split"));
    }
    let min_gap = stream.times().windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
    let (count, delay, scale) = if 2 * min_gap as i128 > window as i128 {
        let d = min_gap as i64 + window / 2;
        let live = 1.0 - stream.len() as f64 * min_gap as f64 / duration as f64;
        if live <= 0.0 {
            return Err(Error::stats("stream is saturated by dead time"));
        }
        (count_coincidences(&h1, &h2, window, d)? + count_coincidences(&h1, &h2, window, -d)?, d, 2.0 / live)
    } else {
        (count_coincidences(&h1, &h2, window, 0)?, 0, 1.0)
    };
    // |dt| <= w/2 inclusive covers w + 1 integer picoseconds
    let floor = scale * h1.len() as f64 * h2.len() as f64 * (window + 1) as f64 / duration as f64;
    let measured = count as f64 / floor;
    let sigma = (count.max(1) as f64).sqrt() / floor;
    let thermal_substituted = thermal && (measured - 2.0).abs() <= 3.0 * sigma;
    let value = if thermal_substituted { 2.0 } else { measured };
    Ok(AutoG2 { value, measured, sigma, coincidences: count, thermal_substituted, delay_ps: delay })
}

/// `g_si(peak)^2 / (g_ss(0) g_ii(0))` with the peak taken over `window`-wide
/// bins of the cross-correlation.
pub fn cauchy_schwarz_r(signal: &TagStream, idler: &TagStream, window: i64, seed: u64, thermal: bool) -> Result<CauchySchwarz> {
    let half_range = (window * 25).max(10_000);
    let g = cross_g2(signal, idler, window, half_range)?;
    let g_ss = auto_g2_zero(signal, window, seed, thermal).map_err(|e| name(e, "g_ss(0)"))?;
    let g_ii = auto_g2_zero(idler, window, seed, thermal).map_err(|e| name(e, "g_ii(0)"))?;
    for (label, a) in [("g_ss(0)", &g_ss), ("g_ii(0)", &g_ii)] {
        if a.value <= 0.0 {
            return Err(Error::stats(format!("{label} denominator has no coincidences")));
        }
    }
    Ok(CauchySchwarz { r: g.peak_value * g.peak_value / (g_ss.value * g_ii.value), g_si_peak: g.peak_value, g_ss, g_ii })
}

fn name(e: Error, label: &str) -> Error {
    match e {
        Error::InsufficientStatistics(m) => Error::stats(format!("{label}: {m}")),
        other => other,
    }
}
