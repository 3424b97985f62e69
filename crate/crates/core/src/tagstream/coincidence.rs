use crate::{Error, Result};

use super::{check_sorted, TagStream};

fn validate(a: &TagStream, b: &TagStream, window: i64) -> Result<()> {
    if window <= 0 {
        return Err(Error::domain(format!("coincidence window must be positive, got {window} ps")));
    }
    check_sorted(a.times(), "stream a")?;
    check_sorted(b.times(), "stream b")
}

/// Calls `f(time_a, time_b)` for every pair with
/// `|time_b - time_a - offset| <= window / 2`, ordered by `time_a` then `time_b`.
///
/// Single forward sweep: the start pointer into `b` only moves forward, so
/// the cost is `O(len(a) + len(b) + pairs)`.
pub fn for_each_coincidence<F>(
    a: &TagStream,
    b: &TagStream,
    window: i64,
    offset: i64,
    f: F,
) -> Result<()>
where
    F: FnMut(u64, u64),
{
    validate(a, b, window)?;
    sweep(a.times(), b.times(), window, offset, f);
    Ok(())
}

/// Sweep kernel without precondition checks; `a` and `b` must be sorted.
pub(crate) fn sweep<F>(a: &[u64], b: &[u64], window: i64, offset: i64, mut f: F)
where
    F: FnMut(u64, u64),
{
    let w = window as i128;
    let o = offset as i128;
    let mut start = 0usize;
    for &ta in a {
        let ta_i = ta as i128;
        // advance past b tags that are too early for this (and every later) ta
        while start < b.len() && 2 * (b[start] as i128 - ta_i - o) < -w {
            start += 1;
        }
        let mut k = start;
        while k < b.len() && 2 * (b[k] as i128 - ta_i - o) <= w {
            f(ta, b[k]);
            k += 1;
        }
    }
}

/// Every coincident `(time_a, time_b)` pair; see [`for_each_coincidence`].
pub fn coincidences(a: &TagStream, b: &TagStream, window: i64, offset: i64) -> Result<Vec<(u64, u64)>> {
    let mut out = Vec::new();
    for_each_coincidence(a, b, window, offset, |x, y| out.push((x, y)))?;
    Ok(out)
}

pub fn count_coincidences(a: &TagStream, b: &TagStream, window: i64, offset: i64) -> Result<u64> {
    let mut n = 0u64;
    for_each_coincidence(a, b, window, offset, |_, _| n += 1)?;
    Ok(n)
}
