use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::TargetSpec;
use crate::dist::Shots;
use crate::error::{Error, Result};
use crate::mitigation::MitigationMethod;
use crate::noise::{NoiseModel, ReadoutError};
use crate::qgan::{AnsatzConfig, RealInput, TrainingConfig};

/// Readout mitigation applied to the generator output, if any.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mitigation {
    #[default]
    None,
    Bf,
    Ibf,
}

impl Mitigation {
    pub fn method(self) -> Option<MitigationMethod> {
        match self {
            Mitigation::None => None,
            Mitigation::Bf => Some(MitigationMethod::Bf),
            Mitigation::Ibf => Some(MitigationMethod::Ibf),
        }
    }
}

impl fmt::Display for Mitigation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mitigation::None => "none",
            Mitigation::Bf => "bf",
            Mitigation::Ibf => "ibf",
        })
    }
}

impl FromStr for Mitigation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Mitigation::None),
            other => other.parse::<MitigationMethod>().map(|m| match m {
                MitigationMethod::Bf => Mitigation::Bf,
                MitigationMethod::Ibf => Mitigation::Ibf,
            }),
        }
    }
}

/// Everything about a run that a sweep does not vary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub hadamard_layer: bool,
    pub epochs: usize,
    pub batch_size: usize,
    /// Shots per generator evaluation.
    pub shots: Shots,
    /// Shots per calibration circuit.
    pub calibration_shots: Shots,
    pub init_mean: f64,
    pub init_std: f64,
    pub real_input: RealInput,
    pub target: TargetSpec,
}

impl Default for RunSettings {
    fn default() -> Self {
        let t = TrainingConfig::default();
        let a = AnsatzConfig::default();
        Self {
            n_qubits: a.n_qubits,
            n_layers: a.n_layers,
            hadamard_layer: a.hadamard_layer,
            epochs: t.epochs,
            batch_size: t.batch_size,
            shots: t.shots,
            calibration_shots: Shots::Exact,
            init_mean: t.init_mean,
            init_std: t.init_std,
            real_input: t.real_input,
            target: TargetSpec::default(),
        }
    }
}

/// One fully specified, deterministic training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub lr_g: f64,
    pub lr_d: f64,
    pub gamma: f64,
    pub k_d: usize,
    pub readout_p01: f64,
    pub readout_p10: f64,
    /// Two-qubit depolarizing rate after each CZ; 0 disables gate noise.
    pub gate_lambda: f64,
    pub mitigation: Mitigation,
    pub settings: RunSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainingConfig::default();
        Self {
            seed: 0,
            lr_g: t.lr_g,
            lr_d: t.lr_d,
            gamma: t.gamma,
            k_d: t.k_d,
            readout_p01: 0.0,
            readout_p10: 0.0,
            gate_lambda: 0.0,
            mitigation: Mitigation::None,
            settings: RunSettings::default(),
        }
    }
}

impl RunConfig {
    /// Noise-free run with the given schedule and default everything else.
    pub fn from_training(t: &TrainingConfig, seed: u64) -> Self {
        let mut cfg = Self {
            seed,
            lr_g: t.lr_g,
            lr_d: t.lr_d,
            gamma: t.gamma,
            k_d: t.k_d,
            ..Self::default()
        };
        let s = &mut cfg.settings;
        s.epochs = t.epochs;
        s.batch_size = t.batch_size;
        s.shots = t.shots;
        s.init_mean = t.init_mean;
        s.init_std = t.init_std;
        s.real_input = t.real_input;
        cfg
    }

    pub fn training(&self) -> TrainingConfig {
        let s = &self.settings;
        TrainingConfig {
            lr_g: self.lr_g,
            lr_d: self.lr_d,
            gamma: self.gamma,
            epochs: s.epochs,
            k_d: self.k_d,
            batch_size: s.batch_size,
            shots: s.shots,
            init_mean: s.init_mean,
            init_std: s.init_std,
            real_input: s.real_input,
        }
    }

    pub fn ansatz(&self) -> AnsatzConfig {
        AnsatzConfig {
            n_qubits: self.settings.n_qubits,
            n_layers: self.settings.n_layers,
            hadamard_layer: self.settings.hadamard_layer,
        }
    }

    pub fn noise(&self) -> Result<NoiseModel<f64>> {
        let mut noise = NoiseModel::ideal();
        if self.readout_p01 != 0.0 || self.readout_p10 != 0.0 {
            noise.readout = Some(ReadoutError::uniform(
                self.settings.n_qubits,
                self.readout_p01,
                self.readout_p10,
            )?);
        }
        if self.gate_lambda != 0.0 {
            noise = noise.with_gate_depolarizing(self.gate_lambda)?;
        }
        Ok(noise)
    }

    pub fn validate(&self) -> Result<()> {
        self.training().validate()?;
        self.ansatz().validate()?;
        self.settings.target.validate()?;
        self.settings.calibration_shots.validate()?;
        self.noise()?;
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config(format!("seed {} does not fit a config file integer", self.seed)));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = parse_toml(text, Path::new("<string>"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config is always representable")
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = parse_toml(&text, path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }
}

/// Full-factorial sweep. Every combination of the grid lists is one grid
/// point, repeated `n_rep` times with distinct seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base_seed: u64,
    pub n_rep: usize,
    pub k_d: usize,
    pub lr_g: Vec<f64>,
    pub lr_d: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Symmetric readout flip probability, `p01 = p10 = p`.
    pub p: Vec<f64>,
    pub gate_lambda: Vec<f64>,
    pub mitigation: Vec<Mitigation>,
    pub settings: RunSettings,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base_seed: 0,
            n_rep: 20,
            k_d: 1,
            lr_g: vec![1e-3, 1e-2, 1e-1],
            lr_d: vec![1e-3, 1e-2, 1e-1],
            gamma: vec![0.99, 0.999, 1.0],
            p: vec![0.01, 0.05, 0.1],
            gate_lambda: vec![0.0],
            mitigation: vec![Mitigation::None],
            settings: RunSettings::default(),
        }
    }
}

/// Swept coordinates of one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub p: f64,
    pub gate_lambda: f64,
    pub mitigation: Mitigation,
    pub lr_g: f64,
    pub lr_d: f64,
    pub gamma: f64,
}

impl SweepConfig {
    /// Grid points in index order: `gamma` varies fastest, then `lr_d`,
    /// `lr_g`, `p`, `gate_lambda`, `mitigation`.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(self.n_points());
        for &mitigation in &self.mitigation {
            for &gate_lambda in &self.gate_lambda {
                for &p in &self.p {
                    for &lr_g in &self.lr_g {
                        for &lr_d in &self.lr_d {
                            for &gamma in &self.gamma {
                                out.push(GridPoint {
                                    p,
                                    gate_lambda,
                                    mitigation,
                                    lr_g,
                                    lr_d,
                                    gamma,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn n_points(&self) -> usize {
        self.lr_g.len()
            * self.lr_d.len()
            * self.gamma.len()
            * self.p.len()
            * self.gate_lambda.len()
            * self.mitigation.len()
    }

    pub fn n_runs(&self) -> usize {
        self.n_points() * self.n_rep
    }

    pub fn seed(&self, grid_index: usize, repetition: usize) -> u64 {
        self.base_seed + (grid_index * self.n_rep + repetition) as u64
    }

    pub fn run_config(&self, point: &GridPoint, seed: u64) -> RunConfig {
        RunConfig {
            seed,
            lr_g: point.lr_g,
            lr_d: point.lr_d,
            gamma: point.gamma,
            k_d: self.k_d,
            readout_p01: point.p,
            readout_p10: point.p,
            gate_lambda: point.gate_lambda,
            mitigation: point.mitigation,
            settings: self.settings.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("lr_g", self.lr_g.len()),
            ("lr_d", self.lr_d.len()),
            ("gamma", self.gamma.len()),
            ("p", self.p.len()),
            ("gate_lambda", self.gate_lambda.len()),
            ("mitigation", self.mitigation.len()),
        ];
        for (name, len) in lists {
            if len == 0 {
                return Err(Error::Config(format!("sweep grid {name} is empty")));
            }
        }
        if self.n_rep == 0 {
            return Err(Error::Config("n_rep must be >= 1".into()));
        }
        let last = self.base_seed as u128 + self.n_runs() as u128;
        if last > i64::MAX as u128 {
            return Err(Error::Config("sweep seeds overflow".into()));
        }
        for point in self.grid() {
            self.run_config(&point, self.base_seed).validate()?;
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = parse_toml(text, Path::new("<string>"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("sweep config is always representable")
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = parse_toml(&text, path)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_toml<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::parse(path, e.to_string()))
}
