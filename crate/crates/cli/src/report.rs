use std::fmt::Write as _;
use std::path::Path;

use homlab_core::biphoton::heralded_purity;
use serde::de::DeserializeOwned;

use crate::error::CliError;
use crate::files::write_atomic;
use crate::manifest::RunManifest;
use crate::results::{CsRecord, G2Record, HeraldedRecord, HomRecord, RatesRecord, ANALYSES};

pub const REPORT_NAME: &str = "report.txt";
pub const PLOTS_DIR: &str = "plots";

/// One collated estimate with its reference value and acceptance band.
struct Row {
    quantity: &'static str,
    measured: String,
    reference: &'static str,
    pass: Option<bool>,
}

impl Row {
    fn new(quantity: &'static str, reference: &'static str, value: Option<f64>, fmt: fn(f64) -> String, ok: impl Fn(f64) -> bool) -> Row {
        Row { quantity, reference, measured: value.map_or("n/a".into(), fmt), pass: Some(value.is_some_and(ok)) }
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn load<T: DeserializeOwned>(dir: &Path, m: &RunManifest, analysis: &str) -> Result<T, CliError> {
    let rel = m
        .results
        .iter()
        .find(|r| r.analysis == analysis && r.path.ends_with(".toml"))
        .map(|r| r.path.clone())
        .ok_or_else(|| CliError::Io(format!("no {analysis} result table recorded")))?;
    let path = dir.join(&rel);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.message())))
}

fn columns(x: &[f64], y: &[f64]) -> String {
    x.iter().zip(y).fold(String::new(), |mut s, (a, b)| {
        writeln!(s, "{a:.4}\t{b:.6}").unwrap();
        s
    })
}

pub fn run(manifest_path: &Path) -> Result<(), CliError> {
    let (m, dir) = RunManifest::load(manifest_path)?;
    let missing: Vec<&str> = ANALYSES
        .iter()
        .copied()
        .filter(|a| !m.results.iter().any(|r| r.analysis == *a && dir.join(&r.path).is_file()))
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Io(format!(
            "missing results: {} (run `homlab analyze <sub> --manifest {}`)",
            missing.join(", "),
            manifest_path.display()
        )));
    }
    for r in &m.results {
        RunManifest::check(&dir, &r.path, &r.sha256)?;
    }

    let g2: G2Record = load(&dir, &m, "g2")?;
    let her: HeraldedRecord = load(&dir, &m, "heralded-g2")?;
    let cs: CsRecord = load(&dir, &m, "cs")?;
    let hom: HomRecord = load(&dir, &m, "hom")?;
    let rates: RatesRecord = load(&dir, &m, "rates")?;

    let cfg = &m.config;
    let setup = cfg.setup();
    let purity = heralded_purity(&setup.sources[0].wavefunction, setup.detectors[0].jitter_sigma_ns).ok();
    let unit_rate = rates
        .rows
        .iter()
        .find(|r| r.scale == 1.0)
        .map_or(rates.slope + rates.intercept, |r| r.net_coincidences);

    let f3 = |x: f64| format!("{x:.3}");
    let f1 = |x: f64| format!("{x:.1}");
    let fit = hom.fit.as_ref();
    let z = match (fit, hom.analytic_visibility) {
        (Some(f), Some(v)) if f.visibility_err > 0.0 => Some((f.visibility - v) / f.visibility_err),
        _ => None,
    };
    let rows = [
        Row {
            quantity: "HOM visibility V",
            measured: fit.map_or("n/a".into(), |f| format!("{:.3} +/- {:.3}", f.visibility, f.visibility_err)),
            reference: "0.83 +/- 0.07",
            pass: Some(fit.is_some_and(|f| within(f.visibility, 0.83, 0.07))),
        },
        Row::new("V minus model V, sigmas", "|z| <= 3", z, |x| format!("{x:+.2}"), |x| x.abs() <= 3.0),
        Row { quantity: "model V at measured g2", measured: hom.analytic_visibility.map_or("n/a".into(), f3), reference: "-", pass: None },
        Row { quantity: "four-fold events", measured: hom.events.to_string(), reference: ">= 500", pass: Some(hom.events >= 500) },
        Row::new("heralded g2", "0.356 +/- 0.05", Some(her.mean), |x| format!("{x:.4}"), |x| within(x, 0.356, 0.05)),
        Row::new("g2_si FWHM (ns)", "2.0 +/- 10%", g2.fwhm_ns, f3, |x| within(x, 2.0, 0.2)),
        Row::new("coherence time 1/e^2 (ns)", "4.0 +/- 15%", g2.coherence_time_ns, f3, |x| within(x, 4.0, 0.6)),
        Row::new("heralded purity", "0.986 +/- 0.02", purity, |x| format!("{x:.4}"), |x| within(x, 0.986, 0.02)),
        Row::new("Cauchy-Schwarz R", "[500, 5000]", Some(cs.r), f1, |x| (500.0..=5000.0).contains(&x)),
        Row::new("net coincidences at scale 1 (cps)", "2e4 +/- 30%", Some(unit_rate), f1, |x| within(x, 2e4, 6e3)),
        Row::new("net rate linearity R^2", "> 0.99", Some(rates.r_squared), |x| format!("{x:.5}"), |x| x > 0.99),
    ];

    let mut text = String::new();
    writeln!(text, "homlab report").unwrap();
    writeln!(text, "tool {} {}, seed {}, duration {} s", m.tool, m.version, m.seed, m.duration_s).unwrap();
    writeln!(text).unwrap();
    writeln!(text, "{:<36}{:<24}{:<18}status", "quantity", "measured", "reference").unwrap();
    for r in &rows {
        let status = match r.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "-",
        };
        writeln!(text, "{:<36}{:<24}{:<18}{status}", r.quantity, r.measured, r.reference).unwrap();
    }
    writeln!(text).unwrap();
    writeln!(text, "g2 streams {}, CS streams {}", g2.streams, cs.streams).unwrap();
    for (name, a) in [("g_ss(0)", &cs.g_ss), ("g_ii(0)", &cs.g_ii)] {
        let sub = if a.thermal_substituted { ", thermal value 2 substituted" } else { "" };
        writeln!(text, "{name}: measured {:.3} +/- {:.3}{sub}", a.measured, a.sigma).unwrap();
    }
    if let Some(e) = &hom.fit_error {
        writeln!(text, "dip fit: {e}").unwrap();
    }

    let plots = dir.join(PLOTS_DIR);
    std::fs::create_dir_all(&plots).map_err(|e| CliError::io(&plots, e))?;
    let counts = |c: &[u64]| c.iter().map(|&v| v as f64).collect::<Vec<_>>();
    let scale: Vec<f64> = rates.rows.iter().map(|r| r.scale).collect();
    let series = |f: fn(&homlab_core::RateRow) -> f64| rates.rows.iter().map(f).collect::<Vec<_>>();
    let mut outputs = vec![
        ("g2.dat", columns(&g2.delay_ns, &g2.g2)),
        ("g2_counts.dat", columns(&g2.delay_ns, &counts(&g2.counts))),
        ("hom_counts.dat", columns(&hom.dt_ns, &counts(&hom.counts))),
        ("rates_net.dat", columns(&scale, &series(|r| r.net_coincidences))),
        ("rates_singles_signal.dat", columns(&scale, &series(|r| r.singles_signal))),
        ("rates_singles_idler.dat", columns(&scale, &series(|r| r.singles_idler))),
    ];
    if !hom.fit_curve.is_empty() {
        outputs.push(("hom_fit.dat", columns(&hom.dt_ns, &hom.fit_curve)));
    }
    if !hom.theory_curve.is_empty() {
        outputs.push(("hom_theory.dat", columns(&hom.dt_ns, &hom.theory_curve)));
    }
    for (name, body) in outputs {
        write_atomic(&plots.join(name), body.as_bytes())?;
    }
    write_atomic(&dir.join(REPORT_NAME), text.as_bytes())?;
    print!("{text}");
    Ok(())
}
