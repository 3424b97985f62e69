use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BUNDLED: &str = include_str!("../configs/paper-defaults.toml");

fn homlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homlab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Bundled config with textual edits, written into `dir`.
fn config(dir: &Path, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = BUNDLED.to_string();
    for (from, to) in edits {
        assert!(text.contains(from), "{from}");
        text = text.replace(from, to);
    }
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

const SHORT_RATES: (&str, &str) = ("rates_duration_s = 2.0", "rates_duration_s = 0.05");

fn simulate(dir: &Path, cfg: &Path, out: &str, duration: &str) -> PathBuf {
    let out = dir.join(out);
    let o = homlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--duration", duration]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out.join("manifest.toml")
}

fn analyze(manifest: &Path, sub: &str, extra: &[&str]) -> Output {
    let mut args = vec!["analyze", sub, "--manifest", manifest.to_str().unwrap()];
    args.extend_from_slice(extra);
    homlab(&args)
}

fn full_pipeline(manifest: &Path) {
    for sub in ["g2", "heralded-g2", "cs", "rates"] {
        let o = analyze(manifest, sub, &[]);
        assert_eq!(code(&o), 0, "{sub}: {}", stderr(&o));
    }
    // too few four-fold events in a short run: histogram written, exit 4
    let o = analyze(manifest, "hom", &[]);
    assert!(matches!(code(&o), 0 | 4), "{}", stderr(&o));
}

#[test]
fn simulate_writes_spd_files_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &[("characterize = true", "characterize = false")]);
    let m = simulate(tmp.path(), &cfg, "run", "1");
    let dir = m.parent().unwrap();
    for k in 1..=4 {
        let bytes = std::fs::read(dir.join(format!("spd{k}.ttag"))).unwrap();
        assert_eq!(&bytes[..6], b"TTAG1\0");
        assert!(bytes.len() > 32 + 8 * 100_000);
    }
    assert!(!dir.join("signal.ttag").exists());
    let text = std::fs::read_to_string(&m).unwrap();
    assert!(text.contains("seed = 20240601") && text.contains("dead_time_ns = 50.0"), "{text}");
}

#[test]
fn unbalanced_beam_splitter_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &[("reflectance = 0.5", "reflectance = 0.45")]);
    let out = tmp.path().join("run");
    let o = homlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("beam_splitter") && stderr(&o).contains("T + R"), "{}", stderr(&o));
    assert!(!out.join("manifest.toml").exists());
}

#[test]
fn unreadable_config_is_io_error() {
    let o = homlab(&["simulate", "--config", "/nonexistent/config.toml", "--out", "/tmp/unused"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn pipeline_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &[SHORT_RATES]);
    let runs: Vec<PathBuf> = ["a", "b"].iter().map(|r| simulate(tmp.path(), &cfg, r, "0.3")).collect();
    for m in &runs {
        full_pipeline(m);
        let o = homlab(&["report", "--manifest", m.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (a, b) = (runs[0].parent().unwrap(), runs[1].parent().unwrap());
    let mut compared = 0;
    for sub in [".", "results", "plots"] {
        for e in std::fs::read_dir(a.join(sub)).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() || p.file_name().unwrap() == "manifest.toml" {
                continue;
            }
            let rel = p.strip_prefix(a).unwrap();
            assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(b.join(rel)).unwrap(), "{}", rel.display());
            compared += 1;
        }
    }
    assert!(compared >= 18, "{compared}");
}

#[test]
fn thread_count_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &[]);
    let m1 = simulate(tmp.path(), &cfg, "default", "0.2");
    let out = tmp.path().join("one");
    let o = Command::new(env!("CARGO_BIN_EXE_homlab"))
        .args(["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--duration", "0.2"])
        .env("HOMLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    for f in ["spd1.ttag", "spd3.ttag", "idler.ttag"] {
        assert_eq!(std::fs::read(m1.parent().unwrap().join(f)).unwrap(), std::fs::read(out.join(f)).unwrap());
    }
}

#[test]
fn g2_on_empty_streams_is_insufficient_statistics() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &[("pair_rate_hz = 2.05e7", "pair_rate_hz = 0.0"), ("dark_rate_hz = 250.0", "dark_rate_hz = 0.0")]);
    let m = simulate(tmp.path(), &cfg, "run", "0.1");
    let o = analyze(&m, "g2", &[]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).contains("singles are zero"), "{}", stderr(&o));
}

#[test]
fn rates_table_has_one_row_per_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &[SHORT_RATES]);
    let m = simulate(tmp.path(), &cfg, "run", "0.05");
    let o = analyze(&m, "rates", &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dat = std::fs::read_to_string(m.parent().unwrap().join("results/rates.dat")).unwrap();
    let rows: Vec<&str> = dat.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5);
    let table = std::fs::read_to_string(m.parent().unwrap().join("results/rates.toml")).unwrap();
    assert!(table.contains("slope = ") && table.contains("r_squared = "));
}

#[test]
fn hom_table_spans_the_configured_range() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &[]);
    let m = simulate(tmp.path(), &cfg, "run", "0.1");
    let o = analyze(&m, "hom", &[]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("g2 = ") && stdout.contains("events = "), "{stdout}");
    let dat = std::fs::read_to_string(m.parent().unwrap().join("results/hom.dat")).unwrap();
    let dt: Vec<f64> = dat
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(dt.len(), 17);
    assert!((dt[0] + 3.2).abs() < 1e-9 && (dt[16] - 3.2).abs() < 1e-9);
    assert!(dt.windows(2).all(|w| (w[1] - w[0] - 0.4).abs() < 1e-9));
}

#[test]
fn override_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &[]);
    let m = simulate(tmp.path(), &cfg, "run", "0.05");
    assert_eq!(code(&analyze(&m, "hom", &["--window-ns", "0.4", "--bin-ns", "0.4"])), 2);
    assert_eq!(code(&analyze(&m, "heralded-g2", &["--bin-ns", "0.1"])), 2);
    assert_eq!(code(&analyze(&m, "g2", &["--bin-ns", "-1"])), 2);
}

#[test]
fn report_requires_all_results_and_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &[SHORT_RATES]);
    let m = simulate(tmp.path(), &cfg, "run", "0.3");
    let dir = m.parent().unwrap();
    assert_eq!(code(&analyze(&m, "g2", &[])), 0);

    let o = homlab(&["report", "--manifest", m.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("heralded-g2") && err.contains("cs") && err.contains("hom") && err.contains("rates"), "{err}");

    full_pipeline(&m);
    let o = homlab(&["report", "--manifest", m.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first = std::fs::read(dir.join("report.txt")).unwrap();
    let text = String::from_utf8_lossy(&first);
    for row in ["HOM visibility V", "heralded g2", "FWHM", "coherence time", "purity", "Cauchy-Schwarz R"] {
        assert!(text.contains(row), "{row}");
    }
    let o = homlab(&["report", "--manifest", m.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(dir.join("report.txt")).unwrap(), first);
    for plot in ["g2.dat", "hom_counts.dat", "rates_net.dat"] {
        let body = std::fs::read_to_string(dir.join("plots").join(plot)).unwrap();
        assert!(body.lines().all(|l| l.split('\t').count() == 2), "{plot}");
    }

    let hist = dir.join("results/hom.dat");
    let mut body = std::fs::read_to_string(&hist).unwrap();
    body.push_str("0.0\t999\tnan\tnan\n");
    std::fs::write(&hist, body).unwrap();
    let o = homlab(&["report", "--manifest", m.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("checksum mismatch"), "{}", stderr(&o));
}

#[test]
fn corrupted_tag_file_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &[]);
    let m = simulate(tmp.path(), &cfg, "run", "0.05");
    let f = m.parent().unwrap().join("spd2.ttag");
    let mut bytes = std::fs::read(&f).unwrap();
    bytes.truncate(bytes.len() - 3);
    std::fs::write(&f, bytes).unwrap();
    let o = analyze(&m, "heralded-g2", &[]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}
