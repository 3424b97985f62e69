use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use homlab_core::analysis::{
    cauchy_schwarz_r, cross_g2, heralded_g2, hom_scan, rate_scaling, theory_overlay,
};
use homlab_core::biphoton::HomModelParams;
use homlab_core::tagstream::{merge_sorted, read_tags};
use homlab_core::{ns_to_ps, Origin, TagStream};

use crate::error::CliError;
use crate::files::write_atomic;
use crate::manifest::RunManifest;
use crate::results::{
    CsRecord, FitRecord, G2Record, HeraldedRecord, HomRecord, RatesRecord, RESULTS_DIR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Analysis {
    G2,
    HeraldedG2,
    Cs,
    Hom,
    Rates,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::G2 => "g2",
            Analysis::HeraldedG2 => "heralded-g2",
            Analysis::Cs => "cs",
            Analysis::Hom => "hom",
            Analysis::Rates => "rates",
        }
    }
}

/// Command-line overrides of the configured analysis parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub window_ns: Option<f64>,
    pub bin_ns: Option<f64>,
    pub range_ns: Option<f64>,
}

impl Overrides {
    fn reject_unused(&self, which: Analysis, window: bool, bin: bool, range: bool) -> Result<(), CliError> {
        for (flag, given, used) in [
            ("--window-ns", self.window_ns.is_some(), window),
            ("--bin-ns", self.bin_ns.is_some(), bin),
            ("--range-ns", self.range_ns.is_some(), range),
        ] {
            if given && !used {
                return Err(CliError::Config(format!("{flag} does not apply to `analyze {}`", which.name())));
            }
        }
        Ok(())
    }
}

fn positive(flag: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{flag}: must be > 0, got {v}")))
    }
}

struct Run {
    manifest: RunManifest,
    manifest_path: PathBuf,
    dir: PathBuf,
}

impl Run {
    fn stream(&self, role: &str) -> Result<TagStream, CliError> {
        let f = self
            .manifest
            .file(role)
            .ok_or_else(|| CliError::Io(format!("manifest lists no `{role}` tag file")))?;
        RunManifest::check(&self.dir, &f.path, &f.sha256)?;
        let path = self.dir.join(&f.path);
        let file = std::fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
        read_tags(std::io::BufReader::new(file)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    fn spd(&self) -> Result<[TagStream; 4], CliError> {
        Ok([self.stream("spd1")?, self.stream("spd2")?, self.stream("spd3")?, self.stream("spd4")?])
    }

    /// Signal and idler of one source: the characterization record when
    /// present, else SPD1 against the union of both beam-splitter ports.
    fn pair(&self) -> Result<(TagStream, TagStream, String), CliError> {
        if self.manifest.file("signal").is_some() && self.manifest.file("idler").is_some() {
            return Ok((self.stream("signal")?, self.stream("idler")?, "signal/idler".into()));
        }
        let s1 = self.stream("spd1")?;
        let (a, b) = (self.stream("spd2")?, self.stream("spd3")?);
        let times: Vec<u64> = merge_sorted(&[&a, &b])?.into_iter().map(|r| r.time).collect();
        let merged = TagStream::new(1, times, a.duration().max(b.duration()), Origin::Imported)?;
        Ok((s1, merged, "spd1/spd2+spd3".into()))
    }

    fn write(&mut self, analysis: Analysis, outputs: Vec<(String, String)>) -> Result<(), CliError> {
        let dir = self.dir.join(RESULTS_DIR);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let mut paths = Vec::new();
        for (name, text) in outputs {
            let rel = format!("{RESULTS_DIR}/{name}");
            write_atomic(&self.dir.join(&rel), text.as_bytes())?;
            paths.push(rel);
        }
        self.manifest.record_results(analysis.name(), &self.dir, &paths)?;
        self.manifest.save(&self.manifest_path)
    }
}

pub fn run(which: Analysis, manifest_path: &Path, o: Overrides) -> Result<(), CliError> {
    let (manifest, dir) = RunManifest::load(manifest_path)?;
    let mut run = Run { manifest, manifest_path: manifest_path.to_path_buf(), dir };
    match which {
        Analysis::G2 => g2(&mut run, o),
        Analysis::HeraldedG2 => heralded(&mut run, o),
        Analysis::Cs => cs(&mut run, o),
        Analysis::Hom => hom(&mut run, o),
        Analysis::Rates => rates(&mut run, o),
    }
}

fn toml_text<T: serde::Serialize>(v: &T) -> String {
    toml::to_string(v).expect("result serializes")
}

fn g2(run: &mut Run, o: Overrides) -> Result<(), CliError> {
    o.reject_unused(Analysis::G2, false, true, true)?;
    let a = &run.manifest.config.analysis;
    let bin_ns = positive("--bin-ns", o.bin_ns.unwrap_or(a.g2_bin_ns))?;
    let range_ns = positive("--range-ns", o.range_ns.unwrap_or(a.g2_range_ns))?;
    let (s, i, streams) = run.pair()?;
    let g = cross_g2(&s, &i, ns_to_ps(bin_ns), ns_to_ps(range_ns))?;
    let delay_ns: Vec<f64> = g.histogram.centers_ns();
    let mut dat = String::from("# delay_ns\tcounts\tg2\n");
    for ((d, c), y) in delay_ns.iter().zip(&g.histogram.counts).zip(&g.normalized) {
        writeln!(dat, "{d:.4}\t{c}\t{y:.6}").unwrap();
    }
    let rec = G2Record {
        streams,
        bin_ns,
        range_ns,
        accidental_floor: g.accidental_floor,
        peak_value: g.peak_value,
        peak_delay_ns: g.peak_delay_ns,
        fwhm_ns: g.fwhm_ns,
        coherence_time_ns: g.coherence_time_ns,
        delay_ns,
        counts: g.histogram.counts.clone(),
        g2: g.normalized.clone(),
    };
    run.write(Analysis::G2, vec![("g2.toml".into(), toml_text(&rec)), ("g2.dat".into(), dat)])?;
    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3} ns"));
    println!(
        "g2 ({}): peak {:.1} at {:.2} ns, FWHM {}, 1/e^2 width {}",
        rec.streams,
        rec.peak_value,
        rec.peak_delay_ns,
        opt(rec.fwhm_ns),
        opt(rec.coherence_time_ns)
    );
    Ok(())
}

fn heralded(run: &mut Run, o: Overrides) -> Result<(), CliError> {
    o.reject_unused(Analysis::HeraldedG2, true, false, false)?;
    let window_ns = positive("--window-ns", o.window_ns.unwrap_or(run.manifest.config.analysis.heralded_window_ns))?;
    let w = ns_to_ps(window_ns);
    let [s1, s2, s3, s4] = run.spd()?;
    let h1 = heralded_g2(&s1, &s2, &s3, w);
    let h4 = heralded_g2(&s4, &s2, &s3, w);
    let (spd1, spd4) = match (h1, h4) {
        (Err(e), Err(_)) => return Err(e.into()),
        (a, b) => (a.ok(), b.ok()),
    };
    let values: Vec<f64> = [spd1, spd4].iter().flatten().map(|h| h.value).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let rec = HeraldedRecord { window_ns, mean, spd1, spd4 };
    run.write(Analysis::HeraldedG2, vec![("heralded-g2.toml".into(), toml_text(&rec))])?;
    let show = |h: Option<homlab_core::analysis::HeraldedG2>| h.map_or("n/a".to_string(), |h| format!("{:.4}", h.value));
    println!("heralded-g2 ({window_ns} ns): {mean:.4} (SPD1 {}, SPD4 {})", show(spd1), show(spd4));
    Ok(())
}

fn cs(run: &mut Run, o: Overrides) -> Result<(), CliError> {
    o.reject_unused(Analysis::Cs, true, false, false)?;
    let a = &run.manifest.config.analysis;
    let window_ns = positive("--window-ns", o.window_ns.unwrap_or(a.cs_window_ns))?;
    let thermal = a.cs_thermal_substitution;
    let (s, i, streams) = run.pair()?;
    let c = cauchy_schwarz_r(&s, &i, ns_to_ps(window_ns), run.manifest.seed, thermal)?;
    let rec = CsRecord { streams, window_ns, r: c.r, g_si_peak: c.g_si_peak, g_ss: c.g_ss, g_ii: c.g_ii };
    run.write(Analysis::Cs, vec![("cs.toml".into(), toml_text(&rec))])?;
    let flag = |t: bool| if t { " (thermal 2 substituted)" } else { "" };
    println!(
        "cs ({}): R = {:.1}, g_si {:.1}, g_ss {:.3}{}, g_ii {:.3}{}",
        rec.streams,
        rec.r,
        rec.g_si_peak,
        rec.g_ss.value,
        flag(rec.g_ss.thermal_substituted),
        rec.g_ii.value,
        flag(rec.g_ii.thermal_substituted)
    );
    Ok(())
}

fn hom(run: &mut Run, o: Overrides) -> Result<(), CliError> {
    let a = &run.manifest.config.analysis;
    let window_ns = positive("--window-ns", o.window_ns.unwrap_or(a.hom_window_ns))?;
    let bin_ns = positive("--bin-ns", o.bin_ns.unwrap_or(a.hom_bin_ns))?;
    let range_ns = positive("--range-ns", o.range_ns.unwrap_or(a.hom_range_ns))?;
    if window_ns <= bin_ns {
        return Err(CliError::Config(format!("--window-ns: must exceed the bin width ({window_ns} <= {bin_ns})")));
    }
    let spd = run.spd()?;
    let scan = hom_scan([&spd[0], &spd[1], &spd[2], &spd[3]], ns_to_ps(window_ns), ns_to_ps(bin_ns), ns_to_ps(range_ns))?;
    let dt_ns = scan.histogram.centers_ns();

    let cfg = &run.manifest.config;
    let model = match scan.heralded_g2 {
        Some(g) => {
            let setup = cfg.setup();
            let p = HomModelParams::new(
                setup.sources[0].wavefunction,
                setup.sources[1].wavefunction,
                setup.beam_splitter,
                g,
                cfg.indistinguishability,
            )?;
            Some((p, p.visibility()?))
        }
        None => None,
    };
    let fit = scan.fit.as_ref().map(FitRecord::from);
    let fit_curve: Vec<f64> = match &fit {
        Some(f) => dt_ns
            .iter()
            .map(|x| f.baseline * (1.0 - f.visibility * (-(x - f.center_ns).powi(2) / (2.0 * f.width_ns.powi(2))).exp()))
            .collect(),
        None => Vec::new(),
    };
    let theory_curve = match (&model, &fit) {
        (Some((p, _)), Some(f)) => theory_overlay(p, f.baseline, &dt_ns)?,
        _ => Vec::new(),
    };

    let mut dat = String::from("# dt_ns\tcounts\tfit\ttheory\n");
    for (k, (x, c)) in dt_ns.iter().zip(&scan.histogram.counts).enumerate() {
        let col = |v: &[f64]| v.get(k).map_or("nan".to_string(), |y| format!("{y:.4}"));
        writeln!(dat, "{x:.4}\t{c}\t{}\t{}", col(&fit_curve), col(&theory_curve)).unwrap();
    }
    let rec = HomRecord {
        window_ns,
        bin_ns,
        range_ns,
        events: scan.events as u64,
        heralded_g2: scan.heralded_g2,
        analytic_visibility: model.map(|m| m.1),
        fit,
        fit_error: scan.fit_error.clone(),
        dt_ns,
        counts: scan.histogram.counts.clone(),
        fit_curve,
        theory_curve,
    };
    run.write(Analysis::Hom, vec![("hom.toml".into(), toml_text(&rec)), ("hom.dat".into(), dat)])?;

    let g = rec.heralded_g2.map_or("n/a".to_string(), |g| format!("{g:.3}"));
    match (&rec.fit, &rec.analytic_visibility) {
        (Some(f), av) => {
            let av = av.map_or("n/a".to_string(), |v| format!("{v:.3}"));
            println!(
                "hom: V = {:.3} +/- {:.3}, g2 = {g}, events = {}, model V = {av}, centre {:.2} ns, width {:.2} ns",
                f.visibility, f.visibility_err, rec.events, f.center_ns, f.width_ns
            );
            Ok(())
        }
        (None, _) => {
            println!("hom: no fit, g2 = {g}, events = {}", rec.events);
            scan.require_fit()?;
            Ok(())
        }
    }
}

fn rates(run: &mut Run, o: Overrides) -> Result<(), CliError> {
    o.reject_unused(Analysis::Rates, true, false, false)?;
    let cfg = run.manifest.config.clone();
    let a = &cfg.analysis;
    let window_ns = positive("--window-ns", o.window_ns.unwrap_or(a.rates_window_ns))?;
    let src = cfg.source(&cfg.source1)?;
    let r = rate_scaling(
        &src,
        &cfg.detector(&cfg.spd1),
        &cfg.detector(&cfg.spd2),
        &a.rates_scales,
        a.rates_duration_s,
        ns_to_ps(window_ns),
        cfg.chunk_s,
        cfg.seed,
    )?;
    let mut dat = String::from("# scale\tsingles_signal\tsingles_idler\traw\taccidental\tnet\n");
    for row in &r.rows {
        writeln!(
            dat,
            "{}\t{:.2}\t{:.2}\t{:.2}\t{:.2}\t{:.2}",
            row.scale,
            row.singles_signal,
            row.singles_idler,
            row.raw_coincidences,
            row.accidental_coincidences,
            row.net_coincidences
        )
        .unwrap();
    }
    let rec = RatesRecord {
        window_ns,
        duration_s: a.rates_duration_s,
        slope: r.slope,
        intercept: r.intercept,
        r_squared: r.r_squared,
        rows: r.rows,
    };
    run.write(Analysis::Rates, vec![("rates.toml".into(), toml_text(&rec)), ("rates.dat".into(), dat)])?;
    println!(
        "rates: {} points, net = {:.1} * scale + {:.1} cps, R^2 = {:.5}",
        rec.rows.len(),
        rec.slope,
        rec.intercept,
        rec.r_squared
    );
    Ok(())
}
