use crate::{Error, Result};

use super::{check_sorted, TagStream};

/// N-fold coincidences across `streams`: groups holding exactly one tag
/// per stream with `max - min <= window`. Returned events list one
/// timestamp per stream, in input order.
///
/// Sliding-window k-way merge over the stream heads. When the heads fit in
/// one window they form an event and are all consumed; otherwise the
/// earliest head (lowest channel on ties) can belong to no event and is
/// dropped. Where a channel has several candidates the earliest wins.
pub fn nfold(streams: &[&TagStream], window: i64) -> Result<Vec<Vec<u64>>> {
    if streams.len() < 2 {
        return Err(Error::domain("n-fold coincidences need at least two streams"));
    }
    if window < 0 {
        return Err(Error::domain(format!("negative window {window} ps")));
    }
    for s in streams {
        check_sorted(s.times(), &format!("channel {}", s.channel()))?;
    }
    let w = window as u64;
    let k = streams.len();
    let mut pos = vec![0usize; k];
    let mut out = Vec::new();
    'outer: loop {
        let mut min_i = 0;
        let mut min_t = u64::MAX;
        let mut max_t = 0u64;
        for i in 0..k {
            let Some(&t) = streams[i].times().get(pos[i]) else { break 'outer };
            if t < min_t || (t == min_t && streams[i].channel() < streams[min_i].channel()) {
                min_t = t;
                min_i = i;
            }
            max_t = max_t.max(t);
        }
        if max_t - min_t <= w {
            out.push((0..k).map(|i| streams[i].times()[pos[i]]).collect());
            pos.iter_mut().for_each(|p| *p += 1);
        } else {
            // skip every tag of the earliest channel that cannot reach max_t
            let times = streams[min_i].times();
            let bound = max_t - w;
            let p = &mut pos[min_i];
            *p += 1;
            while *p < times.len() && times[*p] < bound {
                *p += 1;
            }
        }
    }
    Ok(out)
}
