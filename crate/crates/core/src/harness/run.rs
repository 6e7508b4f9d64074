use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::backend::Backend;
use crate::data::TargetSampler;
use crate::error::{Error, Result};
use crate::mitigation::{calibrate, CalibrationData};
use crate::qgan::{train, EpochRecord, GeneratorModel, TrainError, TrainOutcome};

pub const EPOCHS_FILE: &str = "epochs.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PARAMS_FILE: &str = "params.json";
pub const CALIBRATION_FILE: &str = "calibration.txt";
pub const CONFIG_FILE: &str = "config.toml";

pub const EPOCHS_HEADER: &str = "epoch,kl,loss_g,loss_d,lr_g,lr_d";

/// Calibration draws use their own stream so enabling mitigation does not
/// shift the training randomness.
const CALIBRATION_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Diverged,
    Failed,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Completed => "completed",
            RunStatus::Diverged => "diverged",
            RunStatus::Failed => "failed",
        })
    }
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: RunStatus,
    pub seed: u64,
    pub config_hash: String,
    /// KL after the last epoch; absent unless the run completed.
    pub final_kl: Option<f64>,
    pub epochs_completed: usize,
    pub diverged_at: Option<usize>,
    pub disc_steps: u64,
    pub gen_steps: u64,
    pub error: Option<String>,
    pub config: RunConfig,
}

#[derive(Serialize)]
struct SavedParams<'a> {
    theta: &'a [f64],
    discriminator_sizes: &'a [usize],
    discriminator: &'a [f64],
}

struct Prepared {
    model: GeneratorModel<f64>,
    sampler: TargetSampler,
    calibration: Option<CalibrationData<f64>>,
}

fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let noise = config.noise()?;
    let calibration = match config.mitigation.method() {
        Some(method) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(CALIBRATION_STREAM);
            let backend = Backend::new(noise.clone());
            Some(calibrate(
                method,
                &backend,
                config.settings.n_qubits,
                config.settings.calibration_shots,
                &mut rng,
            )?)
        }
        None => None,
    };
    let model = GeneratorModel::new(config.ansatz(), noise, config.settings.shots, calibration.as_ref())?;
    let sampler = TargetSampler::new(&config.settings.target, config.settings.n_qubits)?;
    Ok(Prepared {
        model,
        sampler,
        calibration,
    })
}

fn train_prepared(
    config: &RunConfig,
    prepared: &Prepared,
) -> std::result::Result<TrainOutcome<f64>, TrainError<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    train(&config.training(), &prepared.model, &prepared.sampler, &mut rng)
}

/// Trains in memory without touching the filesystem.
pub fn execute(config: &RunConfig) -> std::result::Result<TrainOutcome<f64>, TrainError<f64>> {
    let prepared = prepare(config)?;
    train_prepared(config, &prepared)
}

pub fn epochs_csv(records: &[EpochRecord]) -> String {
    let mut s = String::with_capacity(96 * (records.len() + 1));
    s.push_str(EPOCHS_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.epoch, r.kl, r.loss_g, r.loss_d, r.lr_g, r.lr_d
        );
    }
    s
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Runs one configuration and writes its artifacts into `out_dir`.
///
/// Divergence is not an error: the partial CSV is kept and the summary is
/// marked `diverged`. Invalid configurations and I/O problems are errors.
pub fn run_single(config: &RunConfig, out_dir: &Path) -> Result<RunReport> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write(&out_dir.join(CONFIG_FILE), config.to_toml_string())?;

    let prepared = prepare(config)?;
    if let Some(cal) = &prepared.calibration {
        cal.write_file(&out_dir.join(CALIBRATION_FILE))?;
    }

    let mut report = RunReport {
        status: RunStatus::Completed,
        seed: config.seed,
        config_hash: config.hash(),
        final_kl: None,
        epochs_completed: 0,
        diverged_at: None,
        disc_steps: 0,
        gen_steps: 0,
        error: None,
        config: config.clone(),
    };
    let outcome = match train_prepared(config, &prepared) {
        Ok(out) => {
            report.final_kl = out.final_kl();
            out
        }
        Err(TrainError::Diverged { epoch, partial }) => {
            report.status = RunStatus::Diverged;
            report.diverged_at = Some(epoch);
            *partial
        }
        Err(TrainError::Failed(e)) => return Err(e),
    };
    report.epochs_completed = outcome.records.len();
    report.disc_steps = outcome.disc_steps;
    report.gen_steps = outcome.gen_steps;

    write(&out_dir.join(EPOCHS_FILE), epochs_csv(&outcome.records))?;
    let params = SavedParams {
        theta: &outcome.params.theta,
        discriminator_sizes: outcome.discriminator.sizes(),
        discriminator: outcome.discriminator.params(),
    };
    write(&out_dir.join(PARAMS_FILE), to_json(&params)?)?;
    write_report(out_dir, &report)?;
    Ok(report)
}

pub(crate) fn write_report(out_dir: &Path, report: &RunReport) -> Result<()> {
    write(&out_dir.join(SUMMARY_FILE), to_json(report)?)
}

pub(crate) fn to_json<S: Serialize + ?Sized>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Contract(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn read_report(run_dir: &Path) -> Result<RunReport> {
    let path = run_dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.to_string()))
}

/// KL column of an `epochs.csv`.
pub fn read_kl_curve(run_dir: &Path) -> Result<Vec<f64>> {
    let path = run_dir.join(EPOCHS_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(EPOCHS_HEADER) {
        return Err(Error::parse(&path, "unexpected header"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .nth(1)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::parse(&path, format!("row {}: missing kl value", i + 1)))
        })
        .collect()
}
