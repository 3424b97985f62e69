use homlab_core::analysis::hom_scan;
use homlab_core::montecarlo::{
    detect, generate_pairs, interfere_at_bs, opposite_port_probability, simulate_experiment, Photon, SPD_COUNT,
};
use homlab_core::tagstream::coincidences;
use homlab_core::{BeamSplitter, BiphotonWavefunction, DetectorParams, ExperimentSetup, Profile, SourceParams};

fn source(wf: BiphotonWavefunction, rate: f64, t: f64) -> SourceParams {
    SourceParams { pair_rate: rate, wavefunction: wf, transmittance_signal: t, transmittance_idler: t }
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn delays_follow_intensity_profile() {
    for wf in [
        BiphotonWavefunction::gaussian(0.84).unwrap(),
        BiphotonWavefunction::new(Profile::ExponentialDecay, 1.3, 0.4).unwrap(),
    ] {
        let ev = generate_pairs(&source(wf, 1e5, 1.0), 1.0, 77).unwrap();
        assert!(ev.len() > 99_000);
        let d: Vec<f64> = ev.iter().take(100_000).map(|e| (e.idler_time - e.signal_time) / 1000.0).collect();
        let n = d.len() as f64;
        let ks = ks_statistic(d, |x| wf.delay_cdf(x));
        assert!(ks < 1.628 / n.sqrt(), "{:?}: KS {ks}", wf.profile());
    }
}

/// Emission-time pairs one microsecond apart with source-2 offset `delta`;
/// returns the fraction leaving through opposite ports.
fn opposite_fraction(n: usize, delta_ps: f64, bs: BeamSplitter, indist: f64, seed: u64) -> f64 {
    let wf = BiphotonWavefunction::gaussian(0.84).unwrap();
    let spacing = 1e6;
    let one: Vec<Photon> = (0..n).map(|k| Photon { time: k as f64 * spacing + 100.0, emitted: k as f64 * spacing + 100.0 }).collect();
    let two: Vec<Photon> = (0..n)
        .map(|k| {
            let e = k as f64 * spacing + 100.0 + delta_ps;
            Photon { time: e + 1.0, emitted: e }
        })
        .collect();
    let (a, _b) = interfere_at_bs(&one, &two, &wf, &wf, &bs, indist, 8.0, seed).unwrap();
    let mut per_pair = vec![0u8; n];
    for t in a {
        per_pair[(t / spacing) as usize] += 1;
    }
    per_pair.iter().filter(|&&c| c == 1).count() as f64 / n as f64
}

#[test]
fn opposite_port_fraction_tracks_overlap() {
    let wf = BiphotonWavefunction::gaussian(0.84).unwrap();
    let n = 20_000;
    for (k, delta_ns) in [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0].iter().enumerate() {
        for (bs, indist) in [(BeamSplitter::BALANCED, 1.0), (BeamSplitter::new(0.7, 0.3).unwrap(), 0.8)] {
            let ov = homlab_core::biphoton::overlap(&wf, &wf, *delta_ns).unwrap();
            let p = opposite_port_probability(&bs, indist, ov);
            let f = opposite_fraction(n, delta_ns * 1000.0, bs, indist, k as u64);
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((f - p).abs() <= 3.0 * sigma + 1e-12, "delta {delta_ns}: {f} vs {p}");
        }
    }
    assert_eq!(opposite_fraction(5000, 0.0, BeamSplitter::BALANCED, 1.0, 1), 0.0);
    let f = opposite_fraction(n, 0.0, BeamSplitter::BALANCED, 0.0, 2);
    assert!((f - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt());
}

#[test]
fn routing_probabilities_are_complementary() {
    for k in 0..200 {
        let t = k as f64 / 199.0;
        let bs = BeamSplitter::new(t, 1.0 - t).unwrap();
        for (i, ov) in [(1.0, 1.0), (0.3, 0.7), (0.0, 0.5), (1.0, 0.0)] {
            let opp = opposite_port_probability(&bs, i, ov);
            let same = 2.0 * bs.t() * bs.r() * (1.0 + i * ov);
            assert!((opp + same - 1.0).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&opp));
        }
    }
}

#[test]
fn lone_photons_split_by_transmittance() {
    let wf = BiphotonWavefunction::gaussian(0.84).unwrap();
    let n = 100_000;
    let one: Vec<Photon> = (0..n).map(|k| Photon { time: k as f64 * 1e5, emitted: k as f64 * 1e5 }).collect();
    let (a, b) = interfere_at_bs(&one, &[], &wf, &wf, &BeamSplitter::BALANCED, 1.0, 8.0, 4).unwrap();
    assert_eq!(a.len() + b.len(), n);
    let f = a.len() as f64 / n as f64;
    assert!((f - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt(), "{f}");
}

#[test]
fn jitter_widens_delta_correlation() {
    let det = DetectorParams { efficiency: 1.0, dead_time_ns: 0.0, jitter_sigma_ns: 0.45, dark_rate: 0.0 };
    let photons: Vec<f64> = (1..200_000).map(|k| k as f64 * 50_000.0).collect();
    let dur = 200_000.0 * 50_000.0 / 1e12;
    let a = detect(&photons, &det, 0, dur, 1).unwrap();
    let b = detect(&photons, &det, 1, dur, 2).unwrap();
    let d: Vec<f64> = coincidences(&a, &b, 20_000, 0).unwrap().iter().map(|&(x, y)| y as f64 - x as f64).collect();
    assert!(d.len() > 190_000);
    let m = d.iter().sum::<f64>() / d.len() as f64;
    let sd = (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / d.len() as f64).sqrt() / 1000.0;
    let want = 0.45 * 2f64.sqrt();
    assert!((sd - want).abs() < 0.05 * want, "sd {sd}");
}

fn hom_setup(indist: f64) -> ExperimentSetup {
    let wf = BiphotonWavefunction::gaussian(0.84).unwrap();
    let det = DetectorParams { efficiency: 0.65, dead_time_ns: 50.0, jitter_sigma_ns: 0.19, dark_rate: 250.0 };
    ExperimentSetup {
        sources: [source(wf, 2e6, 0.5); 2],
        detectors: [det; SPD_COUNT],
        beam_splitter: BeamSplitter::BALANCED,
        indistinguishability: indist,
        coherence_window_ns: 8.0,
        chunk_s: 0.01,
    }
}

/// Centre-bin count and mean count of the bins with |dt| > 4 ns.
fn dip_and_baseline(indist: f64) -> (f64, f64, u64) {
    let st = simulate_experiment(&hom_setup(indist), 4.0, 21).unwrap();
    let r = hom_scan([&st[0], &st[1], &st[2], &st[3]], 14_000, 400, 7000).unwrap();
    let h = &r.histogram;
    let mid = h.len() / 2;
    assert!(h.center(mid).abs() < 1.0);
    let outer: Vec<u64> = (0..h.len()).filter(|&k| h.center(k).abs() > 4000.0).map(|k| h.counts[k]).collect();
    let sum: u64 = outer.iter().sum();
    (h.counts[mid] as f64, sum as f64 / outer.len() as f64, sum)
}

#[test]
fn end_to_end_dip_appears_only_when_indistinguishable() {
    let (center, base, n) = dip_and_baseline(1.0);
    assert!(n >= 200, "only {n} baseline events");
    assert!(center < 0.5 * base, "centre {center} vs baseline {base}");

    let (center, base, n) = dip_and_baseline(0.0);
    assert!(n >= 200);
    assert!((center - base).abs() <= 3.0 * base.sqrt(), "centre {center} vs baseline {base}");
}
