use std::path::Path;
use std::time::Instant;

use homlab_core::montecarlo::{simulate_experiment, simulate_pair_source};
use homlab_core::tagstream::write_tags;
use homlab_core::TagStream;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::files::{sha256_hex, write_atomic};
use crate::manifest::{RunManifest, TagFile, MANIFEST_NAME};

pub const SPD_ROLES: [&str; 4] = ["spd1", "spd2", "spd3", "spd4"];

pub fn run(config: &Path, out: &Path, duration_s: Option<f64>, seed: Option<u64>) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(d) = duration_s {
        cfg.duration_s = d;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;

    let start = Instant::now();
    let streams = simulate_experiment(&cfg.setup(), cfg.duration_s, cfg.seed)?;
    let mut files = Vec::new();
    for (role, s) in SPD_ROLES.iter().zip(&streams) {
        files.push(write_stream(out, role, s)?);
    }
    if cfg.characterize {
        let src = cfg.source(&cfg.source1)?;
        let (sig, idl) = simulate_pair_source(
            &src,
            &cfg.detector(&cfg.spd1),
            &cfg.detector(&cfg.spd2),
            cfg.duration_s,
            cfg.chunk_s,
            characterization_seed(cfg.seed),
        )?;
        files.push(write_stream(out, "signal", &sig)?);
        files.push(write_stream(out, "idler", &idl)?);
    }
    let manifest = RunManifest {
        tool: "homlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        duration_s: cfg.duration_s,
        runtime_s: start.elapsed().as_secs_f64(),
        config: cfg,
        files,
        results: Vec::new(),
    };
    manifest.save(&out.join(MANIFEST_NAME))?;
    for f in &manifest.files {
        println!("{:<7} {:>12} tags  {}", f.role, f.tags, f.path);
    }
    println!("manifest {}", out.join(MANIFEST_NAME).display());
    Ok(())
}

/// Seed of the single-source run, kept apart from the four-detector run.
pub fn characterization_seed(seed: u64) -> u64 {
    seed ^ 0x6a09_e667_f3bc_c908
}

fn write_stream(dir: &Path, role: &str, s: &TagStream) -> Result<TagFile, CliError> {
    let mut bytes = Vec::with_capacity(32 + 8 * s.len());
    write_tags(s, &mut bytes)?;
    let path = format!("{role}.ttag");
    write_atomic(&dir.join(&path), &bytes)?;
    Ok(TagFile { role: role.into(), channel: s.channel(), path, tags: s.len() as u64, sha256: sha256_hex(&bytes) })
}
