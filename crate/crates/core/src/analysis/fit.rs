use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Poisson-weighted fit of `B (1 - V exp(-(x - x0)^2 / (2 w^2)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomFit {
    pub baseline: f64,
    pub visibility: f64,
    /// Dip centre, ns.
    pub center_ns: f64,
    /// Gaussian dip width (standard deviation), ns.
    pub width_ns: f64,
    pub baseline_err: f64,
    pub visibility_err: f64,
    pub center_err_ns: f64,
    pub width_err_ns: f64,
    pub chi2: f64,
    pub dof: usize,
    /// `(observed - model) / sqrt(model)` per bin.
    pub residuals: Vec<f64>,
}

const NP: usize = 4;
const MAX_WIDTH_NS: f64 = 50.0;

fn model(p: &[f64; NP], x: f64) -> (f64, [f64; NP]) {
    let [b, v, x0, w] = *p;
    let u = x - x0;
    let g = (-u * u / (2.0 * w * w)).exp();
    let f = b * (1.0 - v * g);
    let d = [1.0 - v * g, -b * g, -b * v * g * u / (w * w), -b * v * g * u * u / (w * w * w)];
    (f, d)
}

fn clamp(p: &mut [f64; NP], lo: f64, hi: f64, min_w: f64) {
    p[0] = p[0].max(1e-9);
    p[1] = p[1].clamp(0.0, 1.0);
    p[2] = p[2].clamp(lo, hi);
    p[3] = p[3].clamp(min_w, MAX_WIDTH_NS);
}

/// Fits a gaussian dip to `(x_ns, counts)`. Weights are the model
/// prediction (Pearson chi-square), iterated to self-consistency; the
/// visibility is kept inside `[0, 1]`.
pub fn fit_gaussian_dip(x: &[f64], y: &[f64]) -> Result<HomFit> {
    let n = x.len();
    if n != y.len() || n <= NP {
        return Err(Error::stats(format!("dip fit needs more than {NP} bins, got {n}")));
    }
    let (lo, hi) = (x[0], x[n - 1]);
    let step = (hi - lo) / (n - 1) as f64;
    // the centre must leave baseline on both sides
    let (c_lo, c_hi) = (lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo));
    // a dip narrower than one bin is indistinguishable from a noisy bin
    let min_w = step;

    let edge = (n / 6).max(1);
    let outer: f64 = y[..edge].iter().chain(&y[n - edge..]).sum::<f64>() / (2 * edge) as f64;
    let b0 = outer.max(1.0);
    let k_min = y.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap();
    let mut best: Option<([f64; NP], f64)> = None;
    for x0 in [0.5 * (lo + hi), x[k_min].clamp(c_lo, c_hi)] {
        for w0 in [2.0 * step, (hi - lo) / 6.0] {
            let p = converge([b0, 0.5, x0, w0.max(min_w)], x, y, c_lo, c_hi, min_w);
            let c = chi2_of(&p, x, y, &variance(&p, x));
            if best.is_none_or(|(_, bc)| c < bc) {
                best = Some((p, c));
            }
        }
    }
    let (p, _) = best.unwrap();
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("dip fit diverged".into()));
    }
    let var = variance(&p, x);
    let (jtj, _) = normal_equations(&p, x, y, &var);
    let cov = covariance(jtj);
    let residuals: Vec<f64> = x.iter().zip(y).zip(&var).map(|((&xi, &yi), s2)| (yi - model(&p, xi).0) / s2.sqrt()).collect();
    let chi2 = residuals.iter().map(|r| r * r).sum();
    let err = |i: usize| cov[i][i].abs().sqrt();
    Ok(HomFit {
        baseline: p[0],
        visibility: p[1],
        center_ns: p[2],
        width_ns: p[3],
        baseline_err: err(0),
        visibility_err: err(1),
        center_err_ns: err(2),
        width_err_ns: err(3),
        chi2,
        dof: n - NP,
        residuals,
    })
}

/// Inverse of the curvature matrix over the parameters the data constrains.
/// At zero visibility the centre and width drop out; their errors are NaN.
fn covariance(jtj: [[f64; NP]; NP]) -> [[f64; NP]; NP] {
    let scale = (0..NP).map(|i| jtj[i][i]).fold(0.0, f64::max);
    let live: Vec<usize> = (0..NP).filter(|&i| jtj[i][i] > 1e-12 * scale).collect();
    let mut cov = [[f64::NAN; NP]; NP];
    let m = live.len();
    let mut sub = [[0.0; NP]; NP];
    for (i, row) in sub.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for (a, &i) in live.iter().enumerate() {
        for (b, &j) in live.iter().enumerate() {
            sub[a][b] = jtj[i][j];
        }
    }
    if let Some(inv) = invert(sub) {
        for a in 0..m {
            for b in 0..m {
                cov[live[a]][live[b]] = inv[a][b];
            }
        }
    }
    cov
}

fn variance(p: &[f64; NP], x: &[f64]) -> Vec<f64> {
    x.iter().map(|&xi| model(p, xi).0.max(0.5)).collect()
}

fn chi2_of(p: &[f64; NP], x: &[f64], y: &[f64], var: &[f64]) -> f64 {
    x.iter().zip(y).zip(var).map(|((&xi, &yi), &s2)| (yi - model(p, xi).0).powi(2) / s2).sum()
}

/// Levenberg-Marquardt with the weights refreshed from the model until
/// they stop moving.
fn converge(mut p: [f64; NP], x: &[f64], y: &[f64], lo: f64, hi: f64, min_w: f64) -> [f64; NP] {
    clamp(&mut p, lo, hi, min_w);
    for _ in 0..8 {
        let var = variance(&p, x);
        let mut lambda = 1e-3;
        let mut chi = chi2_of(&p, x, y, &var);
        for _ in 0..200 {
            let (jtj, jtr) = normal_equations(&p, x, y, &var);
            let mut a = jtj;
            for i in 0..NP {
                a[i][i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(delta) = solve(a, jtr) else {
                lambda *= 10.0;
                if lambda > 1e12 {
                    break;
                }
                continue;
            };
            let mut trial = p;
            for i in 0..NP {
                trial[i] += delta[i];
            }
            clamp(&mut trial, lo, hi, min_w);
            let c = chi2_of(&trial, x, y, &var);
            if c <= chi {
                let done = chi - c <= 1e-10 * chi.max(1.0);
                p = trial;
                chi = c;
                lambda = (lambda / 10.0).max(1e-12);
                if done {
                    break;
                }
            } else {
                lambda *= 10.0;
                if lambda > 1e12 {
                    break;
                }
            }
        }
        let moved = var.iter().zip(variance(&p, x)).map(|(a, b)| ((a - b) / a).abs()).fold(0.0, f64::max);
        if moved < 1e-6 {
            break;
        }
    }
    p
}

fn normal_equations(p: &[f64; NP], x: &[f64], y: &[f64], var: &[f64]) -> ([[f64; NP]; NP], [f64; NP]) {
    let mut jtj = [[0.0; NP]; NP];
    let mut jtr = [0.0; NP];
    for ((&xi, &yi), &s2) in x.iter().zip(y).zip(var) {
        let (f, d) = model(p, xi);
        for i in 0..NP {
            jtr[i] += d[i] * (yi - f) / s2;
            for j in 0..NP {
                jtj[i][j] += d[i] * d[j] / s2;
            }
        }
    }
    (jtj, jtr)
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for c in 0..N {
        let piv = (c..N).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..N {
            let f = a[r][c] / a[c][c];
            for k in c..N {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut out = [0.0; N];
    for r in (0..N).rev() {
        let s: f64 = (r + 1..N).map(|k| a[r][k] * out[k]).sum();
        out[r] = (b[r] - s) / a[r][r];
    }
    Some(out)
}

fn invert<const N: usize>(a: [[f64; N]; N]) -> Option<[[f64; N]; N]> {
    let mut inv = [[0.0; N]; N];
    for c in 0..N {
        let mut e = [0.0; N];
        e[c] = 1.0;
        let col = solve(a, e)?;
        for r in 0..N {
            inv[r][c] = col[r];
        }
    }
    Some(inv)
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return Err(Error::domain("linear fit needs at least two points"));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("linear fit needs distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit { slope, intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..17).map(|k| -3.2 + 0.4 * k as f64).collect()
    }

    #[test]
    fn recovers_noiseless_dip() {
        let x = grid();
        let truth = [120.0, 0.8, 0.3, 0.9];
        let y: Vec<f64> = x.iter().map(|&v| model(&truth, v).0).collect();
        let f = fit_gaussian_dip(&x, &y).unwrap();
        assert!((f.baseline - 120.0).abs() < 1e-4, "{f:?}");
        assert!((f.visibility - 0.8).abs() < 1e-6);
        assert!((f.center_ns - 0.3).abs() < 1e-6);
        assert!((f.width_ns - 0.9).abs() < 1e-6);
        assert!(f.chi2 < 1e-8);
        assert_eq!(f.dof, 13);
    }

    #[test]
    fn flat_data_gives_zero_visibility() {
        let x = grid();
        let y = vec![50.0; x.len()];
        let f = fit_gaussian_dip(&x, &y).unwrap();
        assert!(f.visibility < 1e-3, "{f:?}");
        assert!((f.baseline - 50.0).abs() < 1e-3);
    }

    #[test]
    fn solver_and_line() {
        let s = solve([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0]).unwrap();
        assert!((s[0] - 0.8).abs() < 1e-12 && (s[1] - 1.4).abs() < 1e-12);
        let l = linear_fit(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((l.slope - 2.0).abs() < 1e-12 && l.intercept.abs() < 1e-12 && (l.r_squared - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
    }
}
