use serde::{Deserialize, Serialize};

use super::fit::{fit_gaussian_dip, HomFit};
use super::heralded::heralded_g2;
use crate::biphoton::{hom_curve, HomModelParams};
use crate::tagstream::{nfold, Histogram, TagStream};
use crate::{Error, Result, PS_PER_NS};

/// Fewest four-fold events the dip fit accepts.
pub const MIN_FOURFOLD_EVENTS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomScanResult {
    /// Four-fold counts against `t(SPD1) - t(SPD4)`.
    pub histogram: Histogram,
    pub events: usize,
    pub fit: Option<HomFit>,
    /// Why the fit was refused or failed.
    pub fit_error: Option<String>,
    /// Heralded g2 averaged over the heralds that yielded a value.
    pub heralded_g2: Option<f64>,
    /// Per herald: SPD1, SPD4.
    pub heralded_g2_each: [Option<f64>; 2],
}

impl HomScanResult {
    /// The fit, or the insufficient-statistics error that refused it.
    pub fn require_fit(&self) -> Result<&HomFit> {
        match &self.fit {
            Some(f) => Ok(f),
            None => Err(Error::stats(self.fit_error.clone().unwrap_or_else(|| "no dip fit".into()))),
        }
    }
}

/// Four-fold HOM scan. Events are 4-fold coincidences within `window`;
/// the dip is histogrammed in `bin`-wide bins over `[-half_range, half_range]`.
pub fn hom_scan(spd: [&TagStream; 4], window: i64, bin: i64, half_range: i64) -> Result<HomScanResult> {
    if bin <= 0 || window <= bin {
        return Err(Error::domain("HOM window must exceed the bin width"));
    }
    let events = nfold(&spd, window)?;
    let mut histogram = Histogram::symmetric(bin, half_range)?;
    for e in &events {
        histogram.add(e[0] as i64 - e[3] as i64);
    }
    let g1 = heralded_g2(spd[0], spd[1], spd[2], window).ok().map(|g| g.value);
    let g4 = heralded_g2(spd[3], spd[1], spd[2], window).ok().map(|g| g.value);
    let heralded = match (g1, g4) {
        (Some(a), Some(b)) => Some(0.5 * (a + b)),
        (a, b) => a.or(b),
    };

    let (fit, fit_error) = if events.len() < MIN_FOURFOLD_EVENTS {
        (None, Some(format!("{} four-fold events, the dip fit needs at least {MIN_FOURFOLD_EVENTS}", events.len())))
    } else {
        let y: Vec<f64> = histogram.counts.iter().map(|&c| c as f64).collect();
        match fit_gaussian_dip(&histogram.centers_ns(), &y) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    Ok(HomScanResult { histogram, events: events.len(), fit, fit_error, heralded_g2: heralded, heralded_g2_each: [g1, g4] })
}

/// Interference curve of the analytic model at `centers_ns`, scaled so its
/// far-off baseline equals `baseline` counts.
pub fn theory_overlay(params: &HomModelParams, baseline: f64, centers_ns: &[f64]) -> Result<Vec<f64>> {
    let b0 = params.baseline();
    centers_ns.iter().map(|&dt| Ok(baseline * hom_curve(params, dt)? / b0)).collect()
}

impl HomScanResult {
    /// Bin centres in ns paired with counts.
    pub fn points(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        (0..self.histogram.len()).map(|k| (self.histogram.center(k) / PS_PER_NS, self.histogram.counts[k]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagstream::Origin;

    fn s(ch: u8, t: Vec<u64>) -> TagStream {
        TagStream::new(ch, t, 1_000_000_000_000, Origin::Imported).unwrap()
    }

    #[test]
    fn few_events_refuse_fit_but_keep_histogram() {
        let base: Vec<u64> = (1..=10).map(|k| k * 1_000_000).collect();
        let sh = |d: u64| base.iter().map(|t| t + d).collect::<Vec<_>>();
        let r = hom_scan([&s(0, sh(0)), &s(1, sh(1000)), &s(2, sh(1500)), &s(3, sh(400))], 7000, 400, 3500).unwrap();
        assert_eq!(r.events, 10);
        assert_eq!(r.histogram.len(), 17);
        assert_eq!(r.histogram.total(), 10);
        assert!(r.fit.is_none());
        assert!(matches!(r.require_fit(), Err(Error::InsufficientStatistics(_))));
    }

    #[test]
    fn window_must_exceed_bin() {
        let e = s(0, vec![]);
        assert!(hom_scan([&e, &e, &e, &e], 400, 400, 3500).is_err());
    }
}
