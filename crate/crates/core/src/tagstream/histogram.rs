use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::coincidence::sweep;
use super::{check_sorted, TagStream};

/// Binned time differences.
///
/// Bin `k` covers `[lo + k * bin_width, lo + (k + 1) * bin_width)`. A value
/// below `lo` counts as underflow; a value at or above `hi` as overflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: i64,
    pub lo: i64,
    pub hi: i64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
    /// Number of values offered to the histogram, in or out of range.
    pub trials: u64,
    /// Expected accidental counts per bin, when an estimator has set it.
    pub accidental_floor: Option<f64>,
}

impl Histogram {
    /// Creates an empty histogram over `[lo, hi)`.
    ///
    /// If the span is not a multiple of `bin_width`, the bin count is
    /// rounded down and the range re-centred on the requested midpoint, so
    /// `[-3500, 3500]` with 400 ps bins becomes 17 bins over `[-3400, 3400)`.
    pub fn new(bin_width: i64, lo: i64, hi: i64) -> Result<Self> {
        if bin_width <= 0 {
            return Err(Error::domain(format!("bin width must be positive, got {bin_width} ps")));
        }
        if hi <= lo {
            return Err(Error::domain(format!("empty histogram range [{lo}, {hi}]")));
        }
        let n = (hi - lo) / bin_width;
        if n == 0 {
            return Err(Error::domain("range narrower than one bin"));
        }
        let span = n * bin_width;
        let (lo, hi) = if span == hi - lo {
            (lo, hi)
        } else {
            let mid2 = lo + hi; // twice the midpoint
            let lo2 = mid2 - span;
            let lo = lo2.div_euclid(2);
            (lo, lo + span)
        };
        Ok(Histogram {
            bin_width,
            lo,
            hi,
            counts: vec![0; n as usize],
            underflow: 0,
            overflow: 0,
            trials: 0,
            accidental_floor: None,
        })
    }

    /// Symmetric range `[-half_range, half_range]` with the rounding rule of [`Histogram::new`].
    pub fn symmetric(bin_width: i64, half_range: i64) -> Result<Self> {
        Self::new(bin_width, -half_range, half_range)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    #[inline]
    pub fn add(&mut self, value: i64) {
        self.trials += 1;
        if value < self.lo {
            self.underflow += 1;
        } else if value >= self.hi {
            self.overflow += 1;
        } else {
            self.counts[((value - self.lo) / self.bin_width) as usize] += 1;
        }
    }

    /// Bin centre in picoseconds.
    pub fn center(&self, k: usize) -> f64 {
        self.lo as f64 + (k as f64 + 0.5) * self.bin_width as f64
    }

    pub fn centers_ns(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.center(k) / crate::PS_PER_NS).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Adds another histogram with identical binning.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if other.bin_width != self.bin_width || other.lo != self.lo || other.hi != self.hi {
            return Err(Error::domain("cannot merge histograms with different binning"));
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.trials += other.trials;
        Ok(())
    }

    /// Two-column `center_ns count` text, one line per bin.
    pub fn to_columns(&self) -> String {
        let mut s = String::new();
        for (k, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{:.4}\t{}\n", self.center(k) / crate::PS_PER_NS, c));
        }
        s
    }
}

/// Histograms `time_b - time_a` over a list of pairs.
pub fn histogram(pairs: &[(u64, u64)], bin_width: i64, lo: i64, hi: i64) -> Result<Histogram> {
    let mut h = Histogram::new(bin_width, lo, hi)?;
    for &(a, b) in pairs {
        h.add(b as i64 - a as i64);
    }
    Ok(h)
}

fn sweep_into(a: &[u64], b: &[u64], h: &mut Histogram) {
    let window = h.hi - h.lo;
    // centre the sweep window on the range; both edges inclusive, `add` sorts out `hi`
    let (w, o) = if (h.lo + h.hi) % 2 == 0 {
        (window, (h.lo + h.hi) / 2)
    } else {
        (window + 1, (h.lo + h.hi).div_euclid(2))
    };
    sweep(a, b, w, o, |ta, tb| h.add(tb as i64 - ta as i64));
}

/// Histograms `b - a` for every cross-stream pair falling in the range,
/// without materializing the pair list. Pairs far outside the range are
/// never visited, so `underflow`/`overflow` only see edge values.
pub fn histogram_streams(a: &TagStream, b: &TagStream, bin_width: i64, lo: i64, hi: i64) -> Result<Histogram> {
    check_sorted(a.times(), "stream a")?;
    check_sorted(b.times(), "stream b")?;
    let mut h = Histogram::new(bin_width, lo, hi)?;
    sweep_into(a.times(), b.times(), &mut h);
    Ok(h)
}

/// Chunk-parallel version of [`histogram_streams`]; bin-identical output.
pub fn histogram_streams_parallel(
    a: &TagStream,
    b: &TagStream,
    bin_width: i64,
    lo: i64,
    hi: i64,
    chunk: usize,
) -> Result<Histogram> {
    check_sorted(a.times(), "stream a")?;
    check_sorted(b.times(), "stream b")?;
    let proto = Histogram::new(bin_width, lo, hi)?;
    let bt = b.times();
    let span_lo = proto.lo - 1;
    let parts: Vec<Histogram> = a
        .times()
        .par_chunks(chunk.max(1))
        .map(|ac| {
            let mut h = proto.clone();
            // first b tag that can pair with the chunk head
            let first = ac[0] as i64 + span_lo;
            let start = bt.partition_point(|&t| (t as i64) < first);
            sweep_into(ac, &bt[start..], &mut h);
            h
        })
        .collect();
    let mut out = proto;
    for p in &parts {
        out.merge(p)?;
    }
    Ok(out)
}
