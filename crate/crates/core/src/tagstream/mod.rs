//! Channel-tagged picosecond timestamps and the operations on them.
//!
//! All times are integer picoseconds. Durations and offsets passed to the
//! coincidence engines are signed `i64` picoseconds; absolute timestamps are
//! `u64`. A coincidence "within window `w`" always means
//! `|difference| <= w / 2`, inclusive.

mod coincidence;
mod histogram;
mod io;
mod merge;
mod nfold;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use coincidence::{coincidences, count_coincidences, for_each_coincidence};
pub use histogram::{histogram, histogram_streams, histogram_streams_parallel, Histogram};
pub use io::{read_tags, write_tags, HEADER_LEN, MAGIC, VERSION};
pub use merge::merge_sorted;
pub use nfold::nfold;

/// One detection event: channel id plus absolute time in picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagRecord {
    pub time: u64,
    pub channel: u8,
}

/// Where a stream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Simulated { seed: u64 },
    Imported,
}

/// Sorted timestamps recorded on a single channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagStream {
    channel: u8,
    times: Vec<u64>,
    duration: u64,
    origin: Origin,
}

impl TagStream {
    /// Builds a stream, checking that `times` is non-decreasing and that
    /// `duration` covers the last timestamp.
    pub fn new(channel: u8, times: Vec<u64>, duration: u64, origin: Origin) -> Result<Self> {
        check_sorted(&times, "timestamps")?;
        if let Some(&last) = times.last() {
            if last > duration {
                return Err(Error::domain(format!(
                    "duration {duration} ps is shorter than last timestamp {last} ps"
                )));
            }
        }
        Ok(TagStream { channel, times, duration, origin })
    }

    pub fn empty(channel: u8, duration: u64, origin: Origin) -> Self {
        TagStream { channel, times: Vec::new(), duration, origin }
    }

    pub fn channel(&self) -> u8 {
        self.channel
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    pub fn into_times(self) -> Vec<u64> {
        self.times
    }

    /// Acquisition length in picoseconds.
    pub fn duration(&self) -> u64 {
        self.duration
    }

    pub fn duration_s(&self) -> f64 {
        self.duration as f64 / crate::PS_PER_S
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Mean count rate in counts per second.
    pub fn rate(&self) -> f64 {
        if self.duration == 0 {
            return 0.0;
        }
        self.times.len() as f64 / self.duration_s()
    }

    /// Returns a copy with every timestamp shifted by `offset` ps, dropping
    /// tags that would leave `[0, duration]`.
    pub fn shifted(&self, offset: i64) -> TagStream {
        let times = self
            .times
            .iter()
            .filter_map(|&t| {
                let s = t as i128 + offset as i128;
                (s >= 0 && s <= self.duration as i128).then_some(s as u64)
            })
            .collect();
        TagStream { channel: self.channel, times, duration: self.duration, origin: self.origin }
    }

    pub fn with_channel(mut self, channel: u8) -> TagStream {
        self.channel = channel;
        self
    }

    pub fn records(&self) -> impl Iterator<Item = TagRecord> + '_ {
        self.times.iter().map(move |&time| TagRecord { time, channel: self.channel })
    }
}

/// Fails with [`Error::Unsorted`] at the first index where `times` decreases.
pub fn check_sorted(times: &[u64], what: &str) -> Result<()> {
    match times.windows(2).position(|w| w[1] < w[0]) {
        Some(i) => Err(Error::Unsorted { what: what.to_string(), index: i + 1 }),
        None => Ok(()),
    }
}
