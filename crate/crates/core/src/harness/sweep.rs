use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{RunConfig, SweepConfig};
use super::run::{run_single, to_json, write_report, RunReport, RunStatus};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const MANIFEST_HEADER: &str = "grid_index,repetition,seed,config_hash,run_dir,status,final_kl";
pub const SWEEP_CONFIG_FILE: &str = "sweep.toml";
pub const GRID_FILE: &str = "grid.json";

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "QNOISE_WORKERS";

/// One manifest row.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub grid_index: usize,
    pub repetition: usize,
    pub seed: u64,
    pub config_hash: String,
    /// Relative to the sweep directory.
    pub run_dir: String,
    pub status: RunStatus,
    pub final_kl: Option<f64>,
}

impl ManifestEntry {
    fn to_csv_row(&self) -> String {
        let kl = self.final_kl.map(|v| format!("{v:.16e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.grid_index, self.repetition, self.seed, self.config_hash, self.run_dir, self.status, kl
        )
    }
}

pub fn run_dir_name(grid_index: usize, repetition: usize) -> String {
    format!("run_{grid_index:05}_{repetition:03}")
}

/// Worker count from the environment, falling back to the number of CPUs.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&k| k > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_or_record(config: &RunConfig, dir: &Path) -> RunReport {
    match run_single(config, dir) {
        Ok(report) => report,
        Err(e) => {
            let report = RunReport {
                status: RunStatus::Failed,
                seed: config.seed,
                config_hash: config.hash(),
                final_kl: None,
                epochs_completed: 0,
                diverged_at: None,
                disc_steps: 0,
                gen_steps: 0,
                error: Some(e.to_string()),
                config: config.clone(),
            };
            // best effort: the manifest row still records the failure
            let _ = fs::create_dir_all(dir).map(|_| write_report(dir, &report));
            report
        }
    }
}

/// Runs every grid point `n_rep` times on `workers` threads and writes
/// `manifest.csv`. Each run is single-threaded and seeded independently,
/// so the output does not depend on scheduling.
pub fn run_sweep(sweep: &SweepConfig, out_dir: &Path, workers: usize) -> Result<Vec<ManifestEntry>> {
    sweep.validate()?;
    if workers == 0 {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(SWEEP_CONFIG_FILE);
    fs::write(&path, sweep.to_toml_string()).map_err(|e| Error::io(&path, e))?;
    let grid = sweep.grid();
    let path = out_dir.join(GRID_FILE);
    fs::write(&path, to_json(&grid)?).map_err(|e| Error::io(&path, e))?;

    let jobs: Vec<(usize, usize, RunConfig)> = grid
        .iter()
        .enumerate()
        .flat_map(|(g, point)| (0..sweep.n_rep).map(move |r| (g, r, point)))
        .map(|(g, r, point)| (g, r, sweep.run_config(point, sweep.seed(g, r))))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let entries: Vec<ManifestEntry> = pool.install(|| {
        jobs.par_iter()
            .map(|(g, r, config)| {
                let name = run_dir_name(*g, *r);
                let report = run_or_record(config, &out_dir.join(&name));
                ManifestEntry {
                    grid_index: *g,
                    repetition: *r,
                    seed: config.seed,
                    config_hash: report.config_hash,
                    run_dir: name,
                    status: report.status,
                    final_kl: report.final_kl,
                }
            })
            .collect()
    });

    write_manifest(&out_dir.join(MANIFEST_FILE), &entries)?;
    Ok(entries)
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut s = String::from(MANIFEST_HEADER);
    s.push('\n');
    for e in entries {
        let _ = writeln!(s, "{}", e.to_csv_row());
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(MANIFEST_HEADER) {
        return Err(Error::parse(path, "unexpected manifest header"));
    }
    lines
        .enumerate()
        .map(|(i, line)| parse_row(line).map_err(|m| Error::parse(path, format!("row {}: {m}", i + 1))))
        .collect()
}

fn parse_row(line: &str) -> std::result::Result<ManifestEntry, String> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 7 {
        return Err(format!("expected 7 fields, got {}", f.len()));
    }
    let num = |s: &str| s.parse::<u64>().map_err(|e| format!("{s:?}: {e}"));
    let status = match f[5] {
        "completed" => RunStatus::Completed,
        "diverged" => RunStatus::Diverged,
        "failed" => RunStatus::Failed,
        other => return Err(format!("unknown status {other:?}")),
    };
    let final_kl = match f[6] {
        "" => None,
        v => Some(v.parse::<f64>().map_err(|e| format!("{v:?}: {e}"))?),
    };
    Ok(ManifestEntry {
        grid_index: num(f[0])? as usize,
        repetition: num(f[1])? as usize,
        seed: num(f[2])?,
        config_hash: f[3].to_string(),
        run_dir: f[4].to_string(),
        status,
        final_kl,
    })
}

/// Directory of a manifest entry.
pub fn entry_dir(sweep_dir: &Path, entry: &ManifestEntry) -> PathBuf {
    sweep_dir.join(&entry.run_dir)
}
