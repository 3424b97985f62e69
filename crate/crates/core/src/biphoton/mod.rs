//! Biphoton temporal wavefunctions and the two-source interference model.
//!
//! Times are in nanoseconds; amplitudes in ns^(-1/2).

mod purity;
pub mod quadrature;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use purity::{heralded_purity, heralded_purity_on_grid};

/// FWHM of a unit-variance gaussian, `2 sqrt(2 ln 2)`.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

/// Relative tolerance used for every wavefunction integral.
pub const QUAD_REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `h(t) = (2 pi s^2)^(-1/4) exp(-(t - c)^2 / (4 s^2))`, so `|h|^2`
    /// is a normal density with standard deviation `s = width`.
    Gaussian,
    /// `h(t) = step(t - c) exp(-(t - c) / (2 tau)) / sqrt(tau)`, with
    /// `tau = width`.
    ExponentialDecay,
}

/// Temporal amplitude of a photon pair as a function of the idler delay
/// relative to the signal (herald) photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiphotonWavefunction {
    profile: Profile,
    width: f64,
    center_offset: f64,
}

impl BiphotonWavefunction {
    pub fn new(profile: Profile, width_ns: f64, center_offset_ns: f64) -> Result<Self> {
        if !(width_ns.is_finite() && width_ns > 0.0) {
            return Err(Error::domain(format!("wavefunction width must be positive and finite, got {width_ns} ns")));
        }
        if !center_offset_ns.is_finite() {
            return Err(Error::domain("wavefunction centre offset must be finite"));
        }
        Ok(BiphotonWavefunction { profile, width: width_ns, center_offset: center_offset_ns })
    }

    pub fn gaussian(sigma_ns: f64) -> Result<Self> {
        Self::new(Profile::Gaussian, sigma_ns, 0.0)
    }

    /// Gaussian whose intensity self-convolution `|h|^2 * |h|^2` has the
    /// given FWHM.
    pub fn gaussian_from_correlation_fwhm(fwhm_ns: f64) -> Result<Self> {
        Self::gaussian(fwhm_ns / FWHM_PER_SIGMA / std::f64::consts::SQRT_2)
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn center_offset(&self) -> f64 {
        self.center_offset
    }

    /// Real-valued amplitude; both profiles have a flat phase.
    #[inline]
    pub(crate) fn real_amplitude(&self, tau: f64) -> f64 {
        let x = tau - self.center_offset;
        match self.profile {
            Profile::Gaussian => {
                let s = self.width;
                (2.0 * std::f64::consts::PI * s * s).powf(-0.25) * (-x * x / (4.0 * s * s)).exp()
            }
            Profile::ExponentialDecay => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / (2.0 * self.width)).exp() / self.width.sqrt()
                }
            }
        }
    }

    /// `h(tau)` in ns^(-1/2).
    pub fn temporal_amplitude(&self, tau_ns: f64) -> Result<Complex64> {
        if !tau_ns.is_finite() {
            return Err(Error::domain("temporal_amplitude: non-finite delay"));
        }
        Ok(Complex64::new(self.real_amplitude(tau_ns), 0.0))
    }

    /// `|h(tau)|^2`, the idler-delay probability density.
    pub fn intensity(&self, tau_ns: f64) -> f64 {
        let a = self.real_amplitude(tau_ns);
        a * a
    }

    /// Interval outside which `|h|^2` carries less than ~1e-18 of the norm.
    pub fn support(&self) -> (f64, f64) {
        let c = self.center_offset;
        match self.profile {
            Profile::Gaussian => (c - 20.0 * self.width, c + 20.0 * self.width),
            Profile::ExponentialDecay => (c, c + 45.0 * self.width),
        }
    }

    /// Points where the amplitude is not smooth (used to split quadrature).
    fn kinks(&self) -> Vec<f64> {
        match self.profile {
            Profile::Gaussian => vec![self.center_offset],
            Profile::ExponentialDecay => vec![self.center_offset],
        }
    }

    /// `integral |h|^2` by quadrature.
    pub fn norm(&self) -> f64 {
        let (a, b) = self.support();
        let mut pts = vec![a];
        pts.extend(self.kinks().into_iter().filter(|&k| k > a && k < b));
        pts.push(b);
        quadrature::integrate_piecewise(|t| self.intensity(t), &pts, 1e-16, QUAD_REL_TOL)
    }

    /// Cumulative distribution of the idler delay, `integral_{-inf}^{tau} |h|^2`.
    pub fn delay_cdf(&self, tau_ns: f64) -> f64 {
        let x = tau_ns - self.center_offset;
        match self.profile {
            Profile::Gaussian => 0.5 * erfc(-x / (self.width * std::f64::consts::SQRT_2)),
            Profile::ExponentialDecay => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-x / self.width).exp()
                }
            }
        }
    }
}

/// `|integral conj(h1(tau)) h2(tau + dt) dtau|^2`.
pub fn overlap(wf1: &BiphotonWavefunction, wf2: &BiphotonWavefunction, dt_ns: f64) -> Result<f64> {
    if !dt_ns.is_finite() {
        return Err(Error::domain("overlap: non-finite delay"));
    }
    let (a1, b1) = wf1.support();
    let (a2, b2) = wf2.support();
    let lo = a1.max(a2 - dt_ns);
    let hi = b1.min(b2 - dt_ns);
    if lo >= hi {
        return Ok(0.0);
    }
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = wf1
        .kinks()
        .into_iter()
        .chain(wf2.kinks().into_iter().map(|k| k - dt_ns))
        .filter(|&k| k > lo && k < hi)
        .collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(hi);
    let amp = quadrature::integrate_piecewise(
        |t| wf1.real_amplitude(t) * wf2.real_amplitude(t + dt_ns),
        &pts,
        1e-18,
        QUAD_REL_TOL,
    );
    Ok((amp * amp).clamp(0.0, 1.0))
}

/// Lossless beam splitter, `T + R = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitter {
    transmittance: f64,
    reflectance: f64,
}

impl BeamSplitter {
    pub const BALANCED: BeamSplitter = BeamSplitter { transmittance: 0.5, reflectance: 0.5 };

    pub fn new(transmittance: f64, reflectance: f64) -> Result<Self> {
        let ok = |x: f64| (0.0..=1.0).contains(&x);
        if !ok(transmittance) || !ok(reflectance) {
            return Err(Error::domain("beam splitter T and R must lie in [0, 1]"));
        }
        if (transmittance + reflectance - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "beam splitter must be lossless: T + R = {} (expected 1)",
                transmittance + reflectance
            )));
        }
        Ok(BeamSplitter { transmittance, reflectance })
    }

    pub fn t(&self) -> f64 {
        self.transmittance
    }

    pub fn r(&self) -> f64 {
        self.reflectance
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomModelParams {
    pub wf1: BiphotonWavefunction,
    pub wf2: BiphotonWavefunction,
    pub bs: BeamSplitter,
    pub heralded_g2: f64,
    pub indistinguishability: f64,
}

impl HomModelParams {
    pub fn new(
        wf1: BiphotonWavefunction,
        wf2: BiphotonWavefunction,
        bs: BeamSplitter,
        heralded_g2: f64,
        indistinguishability: f64,
    ) -> Result<Self> {
        if !(heralded_g2.is_finite() && heralded_g2 >= 0.0) {
            return Err(Error::domain(format!("heralded g2 must be >= 0, got {heralded_g2}")));
        }
        if !(0.0..=1.0).contains(&indistinguishability) {
            return Err(Error::domain(format!("indistinguishability must lie in [0, 1], got {indistinguishability}")));
        }
        Ok(HomModelParams { wf1, wf2, bs, heralded_g2, indistinguishability })
    }

    /// Four-fold rate far from the dip, `T^2 + R^2 + T R g2`.
    pub fn baseline(&self) -> f64 {
        let (t, r) = (self.bs.t(), self.bs.r());
        t * t + r * r + t * r * self.heralded_g2
    }

    /// Delay of maximal wavepacket overlap, found by grid scan plus
    /// golden-section refinement.
    pub fn dip_center(&self) -> Result<f64> {
        let (a1, b1) = self.wf1.support();
        let (a2, b2) = self.wf2.support();
        let (lo, hi) = (a1 - b2, b1 - a2);
        let n = 400;
        let step = (hi - lo) / n as f64;
        let mut best = (lo, -1.0);
        for i in 0..=n {
            let x = lo + i as f64 * step;
            let v = overlap(&self.wf1, &self.wf2, x)?;
            if v > best.1 {
                best = (x, v);
            }
        }
        let (mut a, mut b) = (best.0 - step, best.0 + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if overlap(&self.wf1, &self.wf2, c)? > overlap(&self.wf1, &self.wf2, d)? {
                b = d;
            } else {
                a = c;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Analytic dip visibility `(baseline - minimum) / baseline`.
    pub fn visibility(&self) -> Result<f64> {
        let dt = self.dip_center()?;
        visibility(self.baseline(), hom_curve(self, dt)?)
    }
}

/// Four-fold coincidence probability versus herald delay `dt`.
///
/// `X (T^2 + R^2) - 2 T R I overlap(dt) + T R g2 X`, with `X = 1` for
/// normalized wavefunctions and `I` the indistinguishability.
pub fn hom_curve(p: &HomModelParams, dt_ns: f64) -> Result<f64> {
    let (t, r) = (p.bs.t(), p.bs.r());
    let ov = overlap(&p.wf1, &p.wf2, dt_ns)?;
    Ok(p.baseline() - 2.0 * t * r * p.indistinguishability * ov)
}

/// `(baseline - minimum) / baseline`.
pub fn visibility(baseline: f64, minimum: f64) -> Result<f64> {
    if !(baseline > 0.0) {
        return Err(Error::domain(format!("visibility: baseline must be positive, got {baseline}")));
    }
    if minimum > baseline {
        return Err(Error::domain(format!("visibility: minimum {minimum} exceeds baseline {baseline}")));
    }
    if minimum < 0.0 {
        return Err(Error::domain(format!("visibility: negative minimum {minimum}")));
    }
    Ok((baseline - minimum) / baseline)
}

/// Complementary error function, Chebyshev fit with fractional error below 1.2e-7.
pub(crate) fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t * (-z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
        .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: f64) -> BiphotonWavefunction {
        BiphotonWavefunction::gaussian(s).unwrap()
    }

    #[test]
    fn gaussian_peak_value() {
        let h = g(1.0).temporal_amplitude(0.0).unwrap();
        assert!((h.re - (2.0 * std::f64::consts::PI).powf(-0.25)).abs() < 1e-15);
        assert!((h.re - 0.6316).abs() < 1e-4);
    }

    #[test]
    fn non_finite_delay_rejected() {
        assert!(g(1.0).temporal_amplitude(f64::NAN).is_err());
        assert!(g(1.0).temporal_amplitude(f64::INFINITY).is_err());
    }

    #[test]
    fn invalid_width_rejected() {
        assert!(BiphotonWavefunction::gaussian(0.0).is_err());
        assert!(BiphotonWavefunction::new(Profile::ExponentialDecay, -1.0, 0.0).is_err());
    }

    #[test]
    fn normalized_profiles() {
        for wf in [
            g(0.3),
            g(2.5),
            BiphotonWavefunction::new(Profile::Gaussian, 0.85, -3.0).unwrap(),
            BiphotonWavefunction::new(Profile::ExponentialDecay, 1.0, 0.0).unwrap(),
            BiphotonWavefunction::new(Profile::ExponentialDecay, 0.2, 5.0).unwrap(),
        ] {
            assert!((wf.norm() - 1.0).abs() < 1e-9, "{wf:?}: {}", wf.norm());
        }
    }

    #[test]
    fn amplitude_peaks_at_center() {
        for wf in [
            BiphotonWavefunction::new(Profile::Gaussian, 0.7, 1.5).unwrap(),
            BiphotonWavefunction::new(Profile::ExponentialDecay, 0.7, 1.5).unwrap(),
        ] {
            let peak = wf.real_amplitude(1.5);
            for k in 1..200 {
                let d = k as f64 * 0.05;
                assert!(wf.real_amplitude(1.5 + d) < peak);
                assert!(wf.real_amplitude(1.5 - d) < peak);
            }
        }
    }

    #[test]
    fn self_overlap_and_far_separation() {
        assert!((overlap(&g(1.0), &g(1.0), 0.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(overlap(&g(1.0), &g(1.0), 50.0).unwrap() < 1e-12);
    }

    #[test]
    fn beam_splitter_constraint() {
        assert!(BeamSplitter::new(0.6, 0.5).is_err());
        assert!(BeamSplitter::new(0.3, 0.7).is_ok());
    }

    #[test]
    fn visibility_domain() {
        assert_eq!(visibility(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(visibility(1.0, 1.0).unwrap(), 0.0);
        assert!((visibility(0.589, 0.089).unwrap() - 0.5 / 0.589).abs() < 1e-12);
        assert!(visibility(0.0, 0.0).is_err());
        assert!(visibility(1.0, 1.5).is_err());
    }

    #[test]
    fn erfc_reference_values() {
        assert!((erfc(0.0) - 1.0).abs() < 1e-7);
        assert!((erfc(1.0) - 0.157_299_207_050_285_1).abs() < 2e-8);
        assert!((erfc(-1.0) - 1.842_700_792_949_715).abs() < 2e-8);
    }
}
