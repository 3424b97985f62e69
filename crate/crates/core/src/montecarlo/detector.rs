use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::tagstream::{Origin, TagStream};
use crate::{Error, Result, PS_PER_NS, PS_PER_S};

use super::generate::poisson_times;
use super::{rng, DetectorParams};

/// Efficiency thinning, timing jitter, dark counts and 1 ps quantization
/// for the photons of one time slice `[start, end)`. Tags landing outside
/// `[0, duration]` after jitter are lost.
pub(crate) fn detect_slice<R: Rng>(
    photons: &[f64],
    det: &DetectorParams,
    start: f64,
    end: f64,
    duration_ps: u64,
    r: &mut R,
    out: &mut Vec<u64>,
) {
    let sigma = det.jitter_sigma_ns * PS_PER_NS;
    let max = duration_ps as f64;
    let push = |t: f64, out: &mut Vec<u64>| {
        let q = t.round();
        if (0.0..=max).contains(&q) {
            out.push(q as u64);
        }
    };
    for &t in photons {
        if det.efficiency < 1.0 && r.random::<f64>() >= det.efficiency {
            continue;
        }
        let jitter = if sigma > 0.0 {
            let z: f64 = StandardNormal.sample(r);
            sigma * z
        } else {
            0.0
        };
        push(t + jitter, out);
    }
    let mut darks = Vec::new();
    poisson_times(r, det.dark_rate, start, end, &mut darks);
    for t in darks {
        push(t, out);
    }
}

/// Sorts raw tags and applies non-paralyzable dead time: a tag arriving
/// less than `dead_time` after the last accepted tag is discarded.
pub(crate) fn finalize(mut raw: Vec<u64>, det: &DetectorParams) -> Vec<u64> {
    raw.sort_unstable();
    let dead = (det.dead_time_ns * PS_PER_NS).round() as u64;
    if dead == 0 {
        raw.dedup();
        return raw;
    }
    let mut last: Option<u64> = None;
    raw.retain(|&t| match last {
        Some(l) if t - l < dead => false,
        _ => {
            last = Some(t);
            true
        }
    });
    raw
}

/// Detects `photons` (arrival times in ps within `[0, duration]`) on one
/// detector and returns the resulting tag stream.
pub fn detect(photons: &[f64], det: &DetectorParams, channel: u8, duration_s: f64, seed: u64) -> Result<TagStream> {
    det.validate()?;
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::domain(format!("duration must be positive, got {duration_s} s")));
    }
    let end = duration_s * PS_PER_S;
    if let Some(bad) = photons.iter().position(|&t| !(0.0..=end).contains(&t)) {
        return Err(Error::domain(format!("photon {bad} lies outside [0, duration]")));
    }
    let duration_ps = end.round() as u64;
    let mut r = rng(seed);
    let mut raw = Vec::with_capacity(photons.len());
    detect_slice(photons, det, 0.0, end, duration_ps, &mut r, &mut raw);
    TagStream::new(channel, finalize(raw, det), duration_ps, Origin::Simulated { seed })
}
