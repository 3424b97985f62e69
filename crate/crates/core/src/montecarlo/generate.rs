use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::biphoton::{BiphotonWavefunction, Profile};
use crate::{Error, Result, PS_PER_NS, PS_PER_S};

use super::{rng, EmissionEvent, SourceParams};

/// Largest expected event count `generate_pairs` accepts by default.
pub const DEFAULT_EVENT_CAP: u64 = 50_000_000;

/// Draws an idler-minus-signal delay (ps) from `|h|^2`.
pub(crate) struct DelaySampler {
    profile: Profile,
    normal: Normal<f64>,
    exp: Exp<f64>,
    offset_ps: f64,
}

impl DelaySampler {
    pub(crate) fn new(wf: &BiphotonWavefunction) -> Self {
        let w = wf.width() * PS_PER_NS;
        DelaySampler {
            profile: wf.profile(),
            normal: Normal::new(0.0, w).expect("width validated positive"),
            exp: Exp::new(1.0 / w).expect("width validated positive"),
            offset_ps: wf.center_offset() * PS_PER_NS,
        }
    }

    #[inline]
    pub(crate) fn sample<R: Rng>(&self, r: &mut R) -> f64 {
        self.offset_ps
            + match self.profile {
                Profile::Gaussian => self.normal.sample(r),
                Profile::ExponentialDecay => self.exp.sample(r),
            }
    }
}

/// Homogeneous Poisson arrival times (ps) of rate `rate` (1/s) on `[start, end)` ps.
pub(crate) fn poisson_times<R: Rng>(r: &mut R, rate: f64, start: f64, end: f64, out: &mut Vec<f64>) {
    if rate <= 0.0 || end <= start {
        return;
    }
    let gap = Exp::new(rate / PS_PER_S).expect("positive rate");
    let mut t = start + gap.sample(r);
    while t < end {
        out.push(t);
        t += gap.sample(r);
    }
}

/// Pair emission over `[0, duration_s]`: Poisson pair times at
/// `pair_rate`, idler delays drawn from `|h|^2`. Deterministic in `seed`.
pub fn generate_pairs(src: &SourceParams, duration_s: f64, seed: u64) -> Result<Vec<EmissionEvent>> {
    generate_pairs_capped(src, duration_s, seed, DEFAULT_EVENT_CAP)
}

pub fn generate_pairs_capped(src: &SourceParams, duration_s: f64, seed: u64, cap: u64) -> Result<Vec<EmissionEvent>> {
    src.validate()?;
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::domain(format!("duration must be positive, got {duration_s} s")));
    }
    let expected = (src.pair_rate * duration_s).ceil() as u64;
    if expected > cap {
        return Err(Error::Capacity { expected, cap });
    }
    let mut r = rng(seed);
    let mut times = Vec::with_capacity(expected as usize + 16);
    poisson_times(&mut r, src.pair_rate, 0.0, duration_s * PS_PER_S, &mut times);
    let delays = DelaySampler::new(&src.wavefunction);
    Ok(times
        .into_iter()
        .map(|t| EmissionEvent { pair_time: t, signal_time: t, idler_time: t + delays.sample(&mut r) })
        .collect())
}
