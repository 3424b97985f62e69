use serde::{Deserialize, Serialize};

use crate::tagstream::{histogram_streams, Histogram, TagStream};
use crate::{Error, Result, PS_PER_NS};

/// Normalized signal-idler cross-correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Result {
    /// Counts of `idler - signal` delays.
    pub histogram: Histogram,
    /// Expected accidental counts per bin, `n_s n_i bin / T`.
    pub accidental_floor: f64,
    /// `counts / accidental_floor` per bin.
    pub normalized: Vec<f64>,
    pub peak_value: f64,
    pub peak_delay_ns: f64,
    /// Full width at half of the peak height above the floor.
    pub fwhm_ns: Option<f64>,
    /// Full width at `1/e^2` of the peak height above the floor.
    pub coherence_time_ns: Option<f64>,
}

/// Histogram of `idler - signal` over `[-half_range, half_range]`,
/// normalized by the accidental floor computed from the measured singles.
pub fn cross_g2(signal: &TagStream, idler: &TagStream, bin_width: i64, half_range: i64) -> Result<G2Result> {
    let duration = signal.duration().max(idler.duration());
    if signal.is_empty() || idler.is_empty() || duration == 0 {
        return Err(Error::stats(format!(
            "undefined normalization: singles are zero (signal {}, idler {})",
            signal.len(),
            idler.len()
        )));
    }
    let mut histogram = histogram_streams(signal, idler, bin_width, -half_range, half_range)?;
    let floor = signal.len() as f64 * idler.len() as f64 * bin_width as f64 / duration as f64;
    histogram.accidental_floor = Some(floor);
    let normalized: Vec<f64> = histogram.counts.iter().map(|&c| c as f64 / floor).collect();

    let (k_peak, &peak_value) = normalized
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("histogram has at least one bin");
    let peak_delay_ns = histogram.center(k_peak) / PS_PER_NS;

    // a peak needs to stand 5 sigma above the floor
    let significant = (peak_value - 1.0) * floor > 5.0 * floor.sqrt().max(1.0);
    let (fwhm_ns, coherence_time_ns) = if significant {
        let width_at = |frac: f64| full_width(&histogram, &normalized, k_peak, 1.0 + frac * (peak_value - 1.0));
        (width_at(0.5), width_at((-2.0f64).exp()))
    } else {
        (None, None)
    };
    Ok(G2Result { histogram, accidental_floor: floor, normalized, peak_value, peak_delay_ns, fwhm_ns, coherence_time_ns })
}

/// Width between the outermost-adjacent crossings of `level` around the
/// peak, linearly interpolated between bin centres.
fn full_width(h: &Histogram, y: &[f64], peak: usize, level: f64) -> Option<f64> {
    let mut l = peak;
    while l > 0 && y[l - 1] >= level {
        l -= 1;
    }
    if l == 0 {
        return None;
    }
    let mut r = peak;
    while r + 1 < y.len() && y[r + 1] >= level {
        r += 1;
    }
    if r + 1 == y.len() {
        return None;
    }
    let cross = |inside: usize, outside: usize| {
        let (x0, x1) = (h.center(outside), h.center(inside));
        let (y0, y1) = (y[outside], y[inside]);
        x0 + (level - y0) / (y1 - y0) * (x1 - x0)
    };
    Some((cross(r, r + 1) - cross(l, l - 1)) / PS_PER_NS)
}
