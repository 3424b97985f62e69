use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::Result;

use super::{check_sorted, TagRecord, TagStream};

/// K-way merge into one time-ordered sequence; equal times are ordered by
/// ascending channel id.
pub fn merge_sorted(streams: &[&TagStream]) -> Result<Vec<TagRecord>> {
    for s in streams {
        check_sorted(s.times(), &format!("channel {}", s.channel()))?;
    }
    let total = streams.iter().map(|s| s.len()).sum();
    let mut out = Vec::with_capacity(total);
    // (time, channel, stream index, position)
    let mut heap = BinaryHeap::with_capacity(streams.len());
    for (i, s) in streams.iter().enumerate() {
        if let Some(&t) = s.times().first() {
            heap.push(Reverse((t, s.channel(), i, 0usize)));
        }
    }
    while let Some(Reverse((time, channel, i, pos))) = heap.pop() {
        out.push(TagRecord { time, channel });
        if let Some(&t) = streams[i].times().get(pos + 1) {
            heap.push(Reverse((t, channel, i, pos + 1)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagstream::Origin;

    fn s(ch: u8, t: &[u64]) -> TagStream {
        TagStream::new(ch, t.to_vec(), 100, Origin::Imported).unwrap()
    }

    #[test]
    fn interleaves() {
        let m = merge_sorted(&[&s(0, &[0, 2]), &s(1, &[1, 3])]).unwrap();
        let t: Vec<u64> = m.iter().map(|r| r.time).collect();
        assert_eq!(t, vec![0, 1, 2, 3]);
    }

    #[test]
    fn ties_by_channel() {
        let m = merge_sorted(&[&s(2, &[5]), &s(0, &[5])]).unwrap();
        assert_eq!(m[0], TagRecord { time: 5, channel: 0 });
        assert_eq!(m[1], TagRecord { time: 5, channel: 2 });
    }
}
