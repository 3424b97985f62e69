//! Purity of a heralded photon whose herald time is only known to within
//! a gaussian timing uncertainty.
//!
//! The conditional state is the mixture
//! `rho(t, t') = integral dt0 G(t0; sigma) h(t - t0) conj(h(t' - t0))`.
//! Writing it as `sum_k w_k |v_k><v_k|` over a quadrature grid in `t0`
//! gives `Tr rho = sum_k w_k <v_k|v_k>` and
//! `Tr rho^2 = sum_kl w_k w_l |<v_k|v_l>|^2`, with the inner products taken
//! on the `t` grid. Shifts are whole grid cells, so the Gram matrix is
//! Toeplitz and one row of it suffices.

use crate::{Error, Result};

use super::{BiphotonWavefunction, Profile};

const MIN_POINTS: usize = 512;
const MAX_POINTS: usize = 1 << 16;
const CONVERGENCE: f64 = 1e-4;

/// `Tr rho^2` on a `t` grid of `n` points.
pub fn heralded_purity_on_grid(wf: &BiphotonWavefunction, jitter_sigma_ns: f64, n: usize) -> Result<f64> {
    if !(jitter_sigma_ns.is_finite() && jitter_sigma_ns >= 0.0) {
        return Err(Error::domain(format!("trigger jitter must be >= 0, got {jitter_sigma_ns} ns")));
    }
    if n < 2 {
        return Err(Error::domain("purity grid needs at least two points"));
    }
    let s = jitter_sigma_ns;
    let w = wf.width();
    let c = wf.center_offset();
    let pad = 8.0 * (w + s);
    let (left, right) = match wf.profile() {
        Profile::Gaussian => (pad, pad),
        Profile::ExponentialDecay => (pad, 24.0 * w + pad),
    };
    // cell edges fall on c + k dt and herald shifts are whole cells, so the
    // exponential profile's step never lands inside a cell
    let dt = (left + right) / n as f64;
    let below = (left / dt).ceil();
    let lo = c - below * dt;
    let cells = below as usize + (right / dt).ceil() as usize;
    let grid: Vec<f64> = (0..cells).map(|i| lo + (i as f64 + 0.5) * dt).collect();

    // herald-time quadrature over +-6 sigma, weights summing to 1
    let (shifts, weights): (Vec<f64>, Vec<f64>) = if s == 0.0 {
        (vec![0.0], vec![1.0])
    } else {
        let target = 128 + n / 8;
        let step = dt * (12.0 * s / (target as f64 * dt)).floor().max(1.0);
        let half = (6.0 * s / step).ceil() as i64;
        let pts: Vec<f64> = (-half..=half).map(|k| k as f64 * step).collect();
        let raw: Vec<f64> = pts.iter().map(|x| (-0.5 * x * x / (s * s)).exp()).collect();
        let z: f64 = raw.iter().sum();
        (pts, raw.into_iter().map(|r| r / z).collect())
    };

    // shifts are whole cells, so <v_k|v_l> depends on |k - l| only
    let base: Vec<f64> = grid.iter().map(|&t| wf.real_amplitude(t)).collect();
    let m = shifts.len();
    let gram: Vec<f64> = (0..m)
        .map(|d| {
            let dd = shifts[d] - shifts[0];
            grid.iter().zip(&base).map(|(&t, &x)| x * wf.real_amplitude(t - dd)).sum::<f64>() * dt
        })
        .collect();
    let trace: f64 = gram[0];
    let mut trace_sq = 0.0;
    for k in 0..m {
        for l in 0..m {
            let g = gram[k.abs_diff(l)];
            trace_sq += weights[k] * weights[l] * g * g;
        }
    }
    if !(trace > 0.0) {
        return Err(Error::Numeric("density matrix has zero trace on the grid".into()));
    }
    Ok(trace_sq / (trace * trace))
}

/// Purity `Tr rho^2` of the heralded photon, refining the grid from 512
/// points until two successive doublings agree to 1e-4.
pub fn heralded_purity(wf: &BiphotonWavefunction, trigger_jitter_sigma_ns: f64) -> Result<f64> {
    let mut n = MIN_POINTS;
    let mut prev = heralded_purity_on_grid(wf, trigger_jitter_sigma_ns, n)?;
    while n < MAX_POINTS {
        n *= 2;
        let next = heralded_purity_on_grid(wf, trigger_jitter_sigma_ns, n)?;
        if (next - prev).abs() < CONVERGENCE {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Numeric(format!(
        "heralded purity not converged to {CONVERGENCE} at {MAX_POINTS} grid points"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_jitter_is_pure() {
        let wf = BiphotonWavefunction::gaussian(0.85).unwrap();
        assert!((heralded_purity(&wf, 0.0).unwrap() - 1.0).abs() < 1e-6);
        let wf = BiphotonWavefunction::new(Profile::ExponentialDecay, 1.0, 0.0).unwrap();
        assert!((heralded_purity(&wf, 0.0).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn negative_jitter_rejected() {
        let wf = BiphotonWavefunction::gaussian(1.0).unwrap();
        assert!(heralded_purity(&wf, -0.1).is_err());
    }

    #[test]
    fn monotone_in_jitter() {
        let wf = BiphotonWavefunction::gaussian(0.85).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..10 {
            let p = heralded_purity(&wf, 0.1 * k as f64).unwrap();
            assert!(p <= last + 1e-12, "purity rose at jitter {}", 0.1 * k as f64);
            last = p;
        }
    }
}
