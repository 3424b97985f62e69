//! Input generators shared by the benchmarks.

use homlab_core::biphoton::BeamSplitter;
use homlab_core::{BiphotonWavefunction, DetectorParams, ExperimentSetup, Origin, SourceParams, TagStream};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Poisson tag stream of `rate` per second over `duration_s`.
pub fn poisson_stream(channel: u8, rate: f64, duration_s: f64, seed: u64) -> TagStream {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let end = duration_s * 1e12;
    let gap = 1e12 / rate;
    let mut t = 0.0;
    let mut times = Vec::with_capacity((rate * duration_s * 1.01) as usize + 16);
    loop {
        t -= gap * (1.0 - r.random::<f64>()).ln();
        if t >= end {
            break;
        }
        times.push(t.round() as u64);
    }
    TagStream::new(channel, times, end as u64, Origin::Imported).expect("sorted")
}

/// Four-detector setup at `pair_rate` with the bundled detector model.
pub fn setup(pair_rate: f64) -> ExperimentSetup {
    let src = SourceParams {
        pair_rate,
        wavefunction: BiphotonWavefunction::gaussian(0.84).expect("positive width"),
        transmittance_signal: 0.048,
        transmittance_idler: 0.048,
    };
    let det = DetectorParams { efficiency: 0.65, dead_time_ns: 50.0, jitter_sigma_ns: 0.191, dark_rate: 250.0 };
    ExperimentSetup {
        sources: [src, src],
        detectors: [det; 4],
        beam_splitter: BeamSplitter::BALANCED,
        indistinguishability: 1.0,
        coherence_window_ns: 8.0,
        chunk_s: 0.01,
    }
}
