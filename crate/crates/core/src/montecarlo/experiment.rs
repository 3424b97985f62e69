use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biphoton::BeamSplitter;
use crate::tagstream::{Origin, TagStream};
use crate::{Error, Result, PS_PER_S};

use super::beamsplitter::{route, OverlapTable};
use super::detector::{detect_slice, finalize};
use super::generate::{poisson_times, DelaySampler};
use super::{mix_seed, rng, DetectorParams, Photon, SourceParams};

/// Number of detectors in the two-source layout.
pub const SPD_COUNT: usize = 4;

/// Two sources, one fibre beam splitter and four detectors:
/// signal 1 on SPD1, the beam-splitter outputs on SPD2 and SPD3, signal 2
/// on SPD4. Channel ids are 0..=3 in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSetup {
    pub sources: [SourceParams; 2],
    pub detectors: [DetectorParams; SPD_COUNT],
    pub beam_splitter: BeamSplitter,
    pub indistinguishability: f64,
    /// Emission-time window inside which idlers of the two sources are
    /// paired for interference.
    pub coherence_window_ns: f64,
    /// Length of one independently seeded generation chunk.
    pub chunk_s: f64,
}

impl ExperimentSetup {
    pub fn validate(&self) -> Result<()> {
        for s in &self.sources {
            s.validate()?;
        }
        for d in &self.detectors {
            d.validate()?;
        }
        if !(0.0..=1.0).contains(&self.indistinguishability) {
            return Err(Error::domain("indistinguishability must lie in [0, 1]"));
        }
        if !(self.coherence_window_ns > 0.0) {
            return Err(Error::domain("coherence window must be positive"));
        }
        if !(self.chunk_s > 0.0) {
            return Err(Error::domain("chunk length must be positive"));
        }
        Ok(())
    }
}

const PURPOSE_SOURCE: u64 = 1;
const PURPOSE_BS: u64 = 2;
const PURPOSE_DETECT: u64 = 3;

/// Emits the photons of one source that survive the arm transmittances
/// over `[start, end)` ps. Pairs losing both photons are never drawn: by
/// Poisson thinning the surviving pairs form a Poisson process of rate
/// `R (1 - (1 - Ts)(1 - Ti))`, each independently signal-only, idler-only
/// or complete in proportion to `Ts (1 - Ti)`, `(1 - Ts) Ti`, `Ts Ti`.
fn emit(src: &SourceParams, start: f64, end: f64, seed: u64) -> (Vec<f64>, Vec<Photon>) {
    let (ts, ti) = (src.transmittance_signal, src.transmittance_idler);
    let p_any = 1.0 - (1.0 - ts) * (1.0 - ti);
    let mut signals = Vec::new();
    let mut idlers = Vec::new();
    if p_any <= 0.0 || src.pair_rate <= 0.0 {
        return (signals, idlers);
    }
    let mut r = rng(seed);
    let mut times = Vec::new();
    poisson_times(&mut r, src.pair_rate * p_any, start, end, &mut times);
    let delays = DelaySampler::new(&src.wavefunction);
    let p_both = ts * ti;
    let p_sig_only = ts * (1.0 - ti);
    for t in times {
        let u = r.random::<f64>() * p_any;
        let (has_sig, has_idl) = if u < p_both {
            (true, true)
        } else if u < p_both + p_sig_only {
            (true, false)
        } else {
            (false, true)
        };
        if has_sig {
            signals.push(t);
        }
        if has_idl {
            idlers.push(Photon { time: t + delays.sample(&mut r), emitted: t });
        }
    }
    idlers.sort_by(|a, b| a.time.total_cmp(&b.time));
    (signals, idlers)
}

fn chunk_bounds(duration_ps: f64, chunk_ps: f64) -> Vec<(u64, f64, f64)> {
    let n = (duration_ps / chunk_ps).ceil().max(1.0) as u64;
    (0..n)
        .map(|k| (k, k as f64 * chunk_ps, ((k + 1) as f64 * chunk_ps).min(duration_ps)))
        .collect()
}

/// Runs `slice` over every chunk, batching so that at most a few chunks'
/// intermediates are alive at once, and concatenates the per-channel raw
/// tags in chunk order.
fn run_chunks<const N: usize, F>(duration_ps: f64, chunk_ps: f64, slice: F) -> Result<[Vec<u64>; N]>
where
    F: Fn(u64, f64, f64) -> Result<[Vec<u64>; N]> + Sync,
{
    let bounds = chunk_bounds(duration_ps, chunk_ps);
    let batch = 2 * rayon::current_num_threads().max(1);
    let mut out: [Vec<u64>; N] = std::array::from_fn(|_| Vec::new());
    for group in bounds.chunks(batch) {
        let parts: Vec<[Vec<u64>; N]> = group
            .par_iter()
            .map(|&(k, a, b)| slice(k, a, b))
            .collect::<Result<_>>()?;
        for p in parts {
            for (o, v) in out.iter_mut().zip(p) {
                o.extend_from_slice(&v);
            }
        }
    }
    Ok(out)
}

fn check_duration(duration_s: f64) -> Result<f64> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::domain(format!("duration must be positive, got {duration_s} s")));
    }
    Ok(duration_s * PS_PER_S)
}

/// Simulates the full two-source interference experiment and returns the
/// SPD1..SPD4 tag streams. Output depends only on `(setup, duration, seed)`.
pub fn simulate_experiment(setup: &ExperimentSetup, duration_s: f64, seed: u64) -> Result<[TagStream; SPD_COUNT]> {
    setup.validate()?;
    let duration = check_duration(duration_s)?;
    let duration_ps = duration.round() as u64;
    let table = OverlapTable::new(
        &setup.sources[0].wavefunction,
        &setup.sources[1].wavefunction,
        setup.coherence_window_ns,
    )?;
    let raw = run_chunks::<SPD_COUNT, _>(duration, setup.chunk_s * PS_PER_S, |k, a, b| {
        let (sig1, idl1) = emit(&setup.sources[0], a, b, mix_seed(seed, k, PURPOSE_SOURCE << 8));
        let (sig2, idl2) = emit(&setup.sources[1], a, b, mix_seed(seed, k, (PURPOSE_SOURCE << 8) | 1));
        let (port_a, port_b) = route(
            &idl1,
            &idl2,
            &table,
            &setup.beam_splitter,
            setup.indistinguishability,
            setup.coherence_window_ns,
            mix_seed(seed, k, PURPOSE_BS << 8),
        )?;
        let inputs: [&[f64]; SPD_COUNT] = [&sig1, &port_a, &port_b, &sig2];
        let mut out: [Vec<u64>; SPD_COUNT] = std::array::from_fn(|_| Vec::new());
        for (ch, photons) in inputs.iter().enumerate() {
            let mut r = rng(mix_seed(seed, k, (PURPOSE_DETECT << 8) | ch as u64));
            detect_slice(photons, &setup.detectors[ch], a, b, duration_ps, &mut r, &mut out[ch]);
        }
        Ok(out)
    })?;
    let mut streams = Vec::with_capacity(SPD_COUNT);
    for (ch, tags) in raw.into_iter().enumerate() {
        let tags = finalize(tags, &setup.detectors[ch]);
        streams.push(TagStream::new(ch as u8, tags, duration_ps, Origin::Simulated { seed })?);
    }
    Ok(streams.try_into().expect("four streams"))
}

/// One source with its signal on detector 0 and idler on detector 1, no
/// beam splitter. Used for rate and correlation characterization.
pub fn simulate_pair_source(
    src: &SourceParams,
    det_signal: &DetectorParams,
    det_idler: &DetectorParams,
    duration_s: f64,
    chunk_s: f64,
    seed: u64,
) -> Result<(TagStream, TagStream)> {
    src.validate()?;
    det_signal.validate()?;
    det_idler.validate()?;
    let duration = check_duration(duration_s)?;
    if !(chunk_s > 0.0) {
        return Err(Error::domain("chunk length must be positive"));
    }
    let duration_ps = duration.round() as u64;
    let [s, i] = run_chunks::<2, _>(duration, chunk_s * PS_PER_S, |k, a, b| {
        let (sig, idl) = emit(src, a, b, mix_seed(seed, k, PURPOSE_SOURCE << 8));
        let idl: Vec<f64> = idl.iter().map(|p| p.time).collect();
        let mut out: [Vec<u64>; 2] = [Vec::new(), Vec::new()];
        let mut r = rng(mix_seed(seed, k, PURPOSE_DETECT << 8));
        detect_slice(&sig, det_signal, a, b, duration_ps, &mut r, &mut out[0]);
        let mut r = rng(mix_seed(seed, k, (PURPOSE_DETECT << 8) | 1));
        detect_slice(&idl, det_idler, a, b, duration_ps, &mut r, &mut out[1]);
        Ok(out)
    })?;
    let origin = Origin::Simulated { seed };
    Ok((
        TagStream::new(0, finalize(s, det_signal), duration_ps, origin)?,
        TagStream::new(1, finalize(i, det_idler), duration_ps, origin)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::BiphotonWavefunction;

    fn setup(rate: f64, dark: f64) -> ExperimentSetup {
        let src = SourceParams {
            pair_rate: rate,
            wavefunction: BiphotonWavefunction::gaussian(0.85).unwrap(),
            transmittance_signal: 0.2,
            transmittance_idler: 0.2,
        };
        let det = DetectorParams { efficiency: 0.65, dead_time_ns: 50.0, jitter_sigma_ns: 0.19, dark_rate: dark };
        ExperimentSetup {
            sources: [src, src],
            detectors: [det; 4],
            beam_splitter: BeamSplitter::BALANCED,
            indistinguishability: 1.0,
            coherence_window_ns: 8.0,
            chunk_s: 0.01,
        }
    }

    #[test]
    fn silent_setup_gives_empty_streams() {
        let out = simulate_experiment(&setup(0.0, 0.0), 0.05, 1).unwrap();
        assert!(out.iter().all(|s| s.is_empty()));
    }

    #[test]
    fn bit_identical_under_seed() {
        let a = simulate_experiment(&setup(2e6, 300.0), 0.03, 7).unwrap();
        let b = simulate_experiment(&setup(2e6, 300.0), 0.03, 7).unwrap();
        assert_eq!(a, b);
        let c = simulate_experiment(&setup(2e6, 300.0), 0.03, 8).unwrap();
        assert_ne!(a[0], c[0]);
    }

    #[test]
    fn streams_sorted_and_dead_time_consistent() {
        let out = simulate_experiment(&setup(5e6, 300.0), 0.02, 3).unwrap();
        for s in &out {
            assert!(!s.is_empty());
            assert!(s.times().windows(2).all(|w| w[1] - w[0] >= 50_000 - 1));
        }
    }

    #[test]
    fn thinned_emission_matches_expected_rates() {
        let src = setup(1e6, 0.0).sources[0];
        let (sig, idl) = emit(&src, 0.0, 1e12, 5);
        let expect = 1e6 * 0.2;
        assert!((sig.len() as f64 - expect).abs() < 4.0 * expect.sqrt());
        assert!((idl.len() as f64 - expect).abs() < 4.0 * expect.sqrt());
    }
}
