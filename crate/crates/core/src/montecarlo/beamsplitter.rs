use rand::Rng;

use crate::biphoton::{overlap, BeamSplitter, BiphotonWavefunction};
use crate::{Error, Result, PS_PER_NS};

use super::{rng, Photon};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    A,
    B,
}

/// `overlap(wf1, wf2, dt)` tabulated on a 1 ps grid over `[-half_range, half_range]`
/// and linearly interpolated; zero outside.
#[derive(Debug, Clone)]
pub struct OverlapTable {
    half_range_ps: f64,
    values: Vec<f64>,
}

impl OverlapTable {
    pub fn new(wf1: &BiphotonWavefunction, wf2: &BiphotonWavefunction, half_range_ns: f64) -> Result<Self> {
        if !(half_range_ns.is_finite() && half_range_ns > 0.0) {
            return Err(Error::domain("overlap table range must be positive"));
        }
        let n = (half_range_ns * PS_PER_NS).ceil() as i64;
        let values = (-n..=n)
            .map(|k| overlap(wf1, wf2, k as f64 / PS_PER_NS))
            .collect::<Result<Vec<_>>>()?;
        Ok(OverlapTable { half_range_ps: n as f64, values })
    }

    /// Overlap at a delay of `dt_ps` picoseconds.
    pub fn at(&self, dt_ps: f64) -> f64 {
        let x = dt_ps + self.half_range_ps;
        if !(x >= 0.0) || x > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.values[i];
        }
        let f = x - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// Probability that a matched cross-source pair leaves through opposite
/// ports: `T^2 + R^2 - 2 T R I overlap`.
pub fn opposite_port_probability(bs: &BeamSplitter, indistinguishability: f64, overlap: f64) -> f64 {
    let (t, r) = (bs.t(), bs.r());
    (t * t + r * r - 2.0 * t * r * indistinguishability * overlap).clamp(0.0, 1.0)
}

/// Routes the idlers of two sources through a beam splitter. Returns the
/// sorted arrival times at port A and port B.
///
/// Photons are grouped by emission time: a run of photons whose successive
/// emission times are no more than `coherence_window_ns` apart forms one
/// cluster. A cluster holding exactly one photon from each source is a
/// matched pair and interferes through [`opposite_port_probability`];
/// every other photon is split classically, source 1 to port A with
/// probability `T` and source 2 with probability `R`.
#[allow(clippy::too_many_arguments)]
pub fn interfere_at_bs(
    idlers1: &[Photon],
    idlers2: &[Photon],
    wf1: &BiphotonWavefunction,
    wf2: &BiphotonWavefunction,
    bs: &BeamSplitter,
    indistinguishability: f64,
    coherence_window_ns: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let table = OverlapTable::new(wf1, wf2, coherence_window_ns)?;
    route(idlers1, idlers2, &table, bs, indistinguishability, coherence_window_ns, seed)
}

pub(crate) fn route(
    idlers1: &[Photon],
    idlers2: &[Photon],
    table: &OverlapTable,
    bs: &BeamSplitter,
    indistinguishability: f64,
    coherence_window_ns: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    for (name, list) in [("source 1 idlers", idlers1), ("source 2 idlers", idlers2)] {
        if let Some(i) = list.windows(2).position(|w| w[1].time < w[0].time) {
            return Err(Error::Unsorted { what: name.into(), index: i + 1 });
        }
    }
    if !(0.0..=1.0).contains(&indistinguishability) {
        return Err(Error::domain("indistinguishability must lie in [0, 1]"));
    }
    let window = coherence_window_ns * PS_PER_NS;

    // (emission time, source, photon)
    let mut all: Vec<(f64, u8, f64)> = Vec::with_capacity(idlers1.len() + idlers2.len());
    all.extend(idlers1.iter().map(|p| (p.emitted, 0u8, p.time)));
    all.extend(idlers2.iter().map(|p| (p.emitted, 1u8, p.time)));
    all.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.total_cmp(&y.2)));

    let mut r = rng(seed);
    let mut port_a = Vec::with_capacity(all.len() / 2 + 16);
    let mut port_b = Vec::with_capacity(all.len() / 2 + 16);
    let mut send = |port: Port, t: f64| match port {
        Port::A => port_a.push(t),
        Port::B => port_b.push(t),
    };
    let (t_prob, r_prob) = (bs.t(), bs.r());

    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j].0 - all[j - 1].0 <= window {
            j += 1;
        }
        let cluster = &all[i..j];
        if cluster.len() == 2 && cluster[0].1 != cluster[1].1 {
            let (p1, p2) = if cluster[0].1 == 0 { (cluster[0], cluster[1]) } else { (cluster[1], cluster[0]) };
            let ov = table.at(p1.0 - p2.0);
            let p_opp = opposite_port_probability(bs, indistinguishability, ov);
            let opposite = r.random::<f64>() < p_opp;
            let first_to_a = r.random::<bool>();
            if opposite {
                let (x, y) = if first_to_a { (p1.2, p2.2) } else { (p2.2, p1.2) };
                send(Port::A, x);
                send(Port::B, y);
            } else {
                let port = if first_to_a { Port::A } else { Port::B };
                send(port, p1.2);
                send(port, p2.2);
            }
        } else {
            for &(_, src, t) in cluster {
                let p_a = if src == 0 { t_prob } else { r_prob };
                let port = if r.random::<f64>() < p_a { Port::A } else { Port::B };
                send(port, t);
            }
        }
        i = j;
    }
    port_a.sort_by(f64::total_cmp);
    port_b.sort_by(f64::total_cmp);
    Ok((port_a, port_b))
}
