//! Target distributions: synthetic longitudinal-profile stand-ins and
//! histogram files, their discretization into `2^n` bins, and sampling of
//! continuous training data.

use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, RngCore};
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Gamma, LogNormal};

use crate::dist::BasisDistribution;
use crate::error::{Error, Result};

/// Relative tolerance of the bin integrals.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Absolute tolerance of inverse-CDF bisection.
pub const BISECTION_TOL: f64 = 1e-12;

/// Source of the target distribution, always restricted to `[min, max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetSpec {
    /// Gamma density with shape `a` and rate `b`.
    Gamma { shape: f64, rate: f64, min: f64, max: f64 },
    /// Log-normal with log-mean `mu` and log-std `sigma`.
    LogNormal { mu: f64, sigma: f64, min: f64, max: f64 },
    Uniform { min: f64, max: f64 },
    /// Plain-text histogram, one non-negative weight per line, spanning `[min, max]`.
    Histogram { path: PathBuf, min: f64, max: f64 },
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec::Gamma {
            shape: 2.0,
            rate: 1.0,
            min: 0.0,
            max: 8.0,
        }
    }
}

enum Density {
    Gamma(Gamma),
    LogNormal(LogNormal),
    Uniform,
}

impl Density {
    fn pdf(&self, x: f64) -> f64 {
        let v = match self {
            Density::Gamma(g) => g.pdf(x),
            Density::LogNormal(l) => l.pdf(x),
            Density::Uniform => 1.0,
        };
        if v.is_finite() { v } else { 0.0 }
    }

    fn cdf(&self, x: f64) -> f64 {
        match self {
            Density::Gamma(g) => g.cdf(x),
            Density::LogNormal(l) => l.cdf(x),
            Density::Uniform => x,
        }
    }
}

impl TargetSpec {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            TargetSpec::Gamma { min, max, .. }
            | TargetSpec::LogNormal { min, max, .. }
            | TargetSpec::Uniform { min, max }
            | TargetSpec::Histogram { min, max, .. } => (min, max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (min, max) = self.support();
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Config(format!("empty or non-finite support [{min}, {max}]")));
        }
        match *self {
            TargetSpec::Gamma { shape, rate, .. } => {
                if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
                    return Err(Error::Config(format!("gamma parameters must be positive, got ({shape}, {rate})")));
                }
                if min < 0.0 {
                    return Err(Error::Config("gamma support must lie in [0, inf)".into()));
                }
            }
            TargetSpec::LogNormal { mu, sigma, .. } => {
                if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
                    return Err(Error::Config(format!("log-normal sigma must be positive, got {sigma}")));
                }
                if min < 0.0 {
                    return Err(Error::Config("log-normal support must lie in [0, inf)".into()));
                }
            }
            TargetSpec::Uniform { .. } | TargetSpec::Histogram { .. } => {}
        }
        Ok(())
    }

    fn density(&self) -> Option<Density> {
        match *self {
            TargetSpec::Gamma { shape, rate, .. } => Some(Density::Gamma(
                Gamma::new(shape, rate).expect("validated gamma parameters"),
            )),
            TargetSpec::LogNormal { mu, sigma, .. } => Some(Density::LogNormal(
                LogNormal::new(mu, sigma).expect("validated log-normal parameters"),
            )),
            TargetSpec::Uniform { .. } => Some(Density::Uniform),
            TargetSpec::Histogram { .. } => None,
        }
    }
}

/// Target probabilities `P(x)` over the `2^n` bins plus the physical range.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedTarget {
    pub probs: BasisDistribution<f64>,
    pub data_min: f64,
    pub data_max: f64,
}

impl DiscretizedTarget {
    pub fn n_qubits(&self) -> usize {
        self.probs.n_qubits()
    }

    pub fn bin_width(&self) -> f64 {
        (self.data_max - self.data_min) / self.probs.len() as f64
    }

    /// Bin holding `value`; values outside the support go to the edge bins.
    pub fn bin_of(&self, value: f64) -> usize {
        let k = ((value - self.data_min) / self.bin_width()).floor();
        (k.max(0.0) as usize).min(self.probs.len() - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(fa, fm, fb, a, b);
    // coarse estimate to turn the relative tolerance into an absolute one
    let scale = {
        let n = 64;
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h).abs()).sum::<f64>() * h
    };
    let tol = (rel_tol * scale).max(f64::MIN_POSITIVE);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Reads a histogram file: one non-negative decimal per line.
pub fn read_histogram(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|e| Error::Ingestion(format!("{}: line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn write_histogram(path: &Path, weights: &[f64]) -> Result<()> {
    let body: String = weights.iter().map(|w| format!("{w:.16e}\n")).collect();
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Normalizes raw histogram weights into a distribution over `2^n` bins.
pub fn normalize_histogram(weights: &[f64], n_qubits: usize) -> Result<BasisDistribution<f64>> {
    let want = 1usize << n_qubits;
    if weights.len() != want {
        return Err(Error::Ingestion(format!(
            "histogram has {} entries, expected {want}",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::Ingestion(format!("invalid histogram weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Ingestion("histogram has no mass".into()));
    }
    BasisDistribution::new(weights.iter().map(|w| w / total).collect())
}

/// Integrates the target over `2^n` equal-width bins and normalizes.
pub fn discretize(spec: &TargetSpec, n_qubits: usize) -> Result<DiscretizedTarget> {
    spec.validate()?;
    if n_qubits == 0 || n_qubits > crate::simcore::MAX_QUBITS {
        return Err(Error::Config(format!("unsupported qubit count {n_qubits}")));
    }
    let (min, max) = spec.support();
    let probs = match spec {
        TargetSpec::Histogram { path, .. } => normalize_histogram(&read_histogram(path)?, n_qubits)?,
        _ => {
            let density = spec.density().expect("continuous spec");
            let bins = 1usize << n_qubits;
            let width = (max - min) / bins as f64;
            let pdf = |x: f64| density.pdf(x);
            let masses: Vec<f64> = (0..bins)
                .map(|k| {
                    let a = min + k as f64 * width;
                    let b = if k + 1 == bins { max } else { a + width };
                    adaptive_simpson(&pdf, a, b, QUADRATURE_TOL)
                })
                .collect();
            let total: f64 = masses.iter().sum();
            if !(total > 0.0) {
                return Err(Error::Config("target has no mass on its support".into()));
            }
            BasisDistribution::new(masses.iter().map(|m| m / total).collect())?
        }
    };
    Ok(DiscretizedTarget {
        probs,
        data_min: min,
        data_max: max,
    })
}

/// Draws continuous real data from a target.
///
/// Continuous specs use the inverse CDF of the truncated distribution,
/// located by bisection. Histograms pick a bin by weight, then a uniform
/// position inside it.
#[derive(Clone, Debug)]
pub struct TargetSampler {
    spec: TargetSpec,
    target: DiscretizedTarget,
    bins: WeightedIndex<f64>,
}

impl TargetSampler {
    pub fn new(spec: &TargetSpec, n_qubits: usize) -> Result<Self> {
        let target = discretize(spec, n_qubits)?;
        let bins = WeightedIndex::new(target.probs.as_slice().iter().copied())
            .map_err(|e| Error::Config(format!("cannot sample target: {e}")))?;
        Ok(Self {
            spec: spec.clone(),
            target,
            bins,
        })
    }

    pub fn target(&self) -> &DiscretizedTarget {
        &self.target
    }

    pub fn spec(&self) -> &TargetSpec {
        &self.spec
    }

    fn draw_value<R: Rng + ?Sized>(&self, density: Option<&Density>, rng: &mut R) -> f64 {
        let (min, max) = (self.target.data_min, self.target.data_max);
        match density {
            Some(Density::Uniform) => min + (max - min) * rng.random::<f64>(),
            Some(d) => {
                let (lo_cdf, hi_cdf) = (d.cdf(min), d.cdf(max));
                let u = lo_cdf + (hi_cdf - lo_cdf) * rng.random::<f64>();
                let (mut lo, mut hi) = (min, max);
                while hi - lo > BISECTION_TOL {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if d.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
            None => {
                let k = self.bins.sample(rng);
                let w = self.target.bin_width();
                self.target.data_min + w * (k as f64 + rng.random::<f64>())
            }
        }
    }

    /// `batch` independent continuous draws inside `[data_min, data_max]`.
    pub fn sample_values<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<f64> {
        let density = self.spec.density();
        (0..batch)
            .map(|_| self.draw_value(density.as_ref(), rng))
            .collect()
    }

    /// Bin indices of `batch` draws. Equal in law to binning
    /// [`TargetSampler::sample_values`], drawn directly from `P(x)`.
    pub fn sample_bins<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        (0..batch).map(|_| self.bins.sample(rng)).collect()
    }
}

/// Real-data source for the trainer.
pub trait RealSource {
    fn target(&self) -> &DiscretizedTarget;
    fn sample_values(&self, batch: usize, rng: &mut dyn RngCore) -> Vec<f64>;
    fn sample_bins(&self, batch: usize, rng: &mut dyn RngCore) -> Vec<usize>;
}

impl RealSource for TargetSampler {
    fn target(&self) -> &DiscretizedTarget {
        &self.target
    }

    fn sample_values(&self, batch: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        TargetSampler::sample_values(self, batch, rng)
    }

    fn sample_bins(&self, batch: usize, rng: &mut dyn RngCore) -> Vec<usize> {
        TargetSampler::sample_bins(self, batch, rng)
    }
}

/// One-shot convenience over [`TargetSampler`]; discretizes on every call.
pub fn sample_real<R: Rng + ?Sized>(spec: &TargetSpec, batch: usize, rng: &mut R) -> Result<Vec<f64>> {
    if batch == 0 {
        return Err(Error::Config("batch size must be >= 1".into()));
    }
    let n = match spec {
        TargetSpec::Histogram { path, .. } => {
            let len = read_histogram(path)?.len();
            if !len.is_power_of_two() || len < 2 {
                return Err(Error::Ingestion(format!("histogram has {len} entries, not 2^n")));
            }
            len.trailing_zeros() as usize
        }
        _ => 3,
    };
    Ok(TargetSampler::new(spec, n)?.sample_values(batch, rng))
}
