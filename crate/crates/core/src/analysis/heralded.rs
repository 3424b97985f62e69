use serde::{Deserialize, Serialize};

use crate::tagstream::{check_sorted, TagStream};
use crate::{Error, Result};

/// Heralded auto-correlation with the counts it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldedG2 {
    pub value: f64,
    pub heralds: u64,
    pub herald_a: u64,
    pub herald_b: u64,
    pub herald_a_b: u64,
}

/// `N_H N_HAB / (N_HA N_HB)`: every count is taken within `|dt| <= window/2`
/// of a herald tag; triples count every (a, b) combination per herald.
pub fn heralded_g2(herald: &TagStream, port_a: &TagStream, port_b: &TagStream, window: i64) -> Result<HeraldedG2> {
    if window <= 0 {
        return Err(Error::domain("heralded g2 window must be positive"));
    }
    check_sorted(herald.times(), "herald")?;
    check_sorted(port_a.times(), "port a")?;
    check_sorted(port_b.times(), "port b")?;
    let mut wa = Window::new(port_a.times(), window);
    let mut wb = Window::new(port_b.times(), window);
    let (mut na, mut nb, mut nab) = (0u64, 0u64, 0u64);
    for &h in herald.times() {
        let ca = wa.count_around(h);
        let cb = wb.count_around(h);
        na += ca;
        nb += cb;
        nab += ca * cb;
    }
    if na == 0 || nb == 0 {
        return Err(Error::stats(format!(
            "heralded g2 needs herald coincidences on both ports (N_HA = {na}, N_HB = {nb})"
        )));
    }
    let nh = herald.len() as u64;
    Ok(HeraldedG2 {
        value: nh as f64 * nab as f64 / (na as f64 * nb as f64),
        heralds: nh,
        herald_a: na,
        herald_b: nb,
        herald_a_b: nab,
    })
}

/// Forward-only window of tags `t` with `|t - h| <= window/2` for
/// non-decreasing `h`.
struct Window<'a> {
    times: &'a [u64],
    w: i128,
    lo: usize,
    hi: usize,
}

impl<'a> Window<'a> {
    fn new(times: &'a [u64], window: i64) -> Self {
        Window { times, w: window as i128, lo: 0, hi: 0 }
    }

    fn count_around(&mut self, h: u64) -> u64 {
        let h = h as i128;
        while self.lo < self.times.len() && 2 * (self.times[self.lo] as i128 - h) < -self.w {
            self.lo += 1;
        }
        self.hi = self.hi.max(self.lo);
        while self.hi < self.times.len() && 2 * (self.times[self.hi] as i128 - h) <= self.w {
            self.hi += 1;
        }
        (self.hi - self.lo) as u64
    }
}
