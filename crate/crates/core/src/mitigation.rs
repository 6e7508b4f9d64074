//! Readout-error mitigation.
//!
//! BF calibrates the full `2^n x 2^n` confusion matrix from one circuit per
//! basis state and inverts it with a dense solve. IBF assumes uncorrelated
//! readout, calibrates per-qubit flip pairs from just |0...0> and |1...1>,
//! and inverts factor by factor.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::dist::{BasisDistribution, Shots};
use crate::error::{Error, Result};
use crate::linalg::{norm1, Lu, SquareMatrix};
use crate::noise::{apply_factors, FlipPair, MAX_DENSE_QUBITS, MAX_FLIP};
use crate::scalar::Real;
use crate::simcore::Circuit;

/// Condition number above which a calibration is refused.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MitigationMethod {
    Bf,
    Ibf,
}

impl FromStr for MitigationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bf" => Ok(Self::Bf),
            "ibf" => Ok(Self::Ibf),
            other => Err(Error::Config(format!("unknown mitigation method {other:?}"))),
        }
    }
}

impl std::fmt::Display for MitigationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Bf => "bf",
            Self::Ibf => "ibf",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CalibrationModel<T = f64> {
    /// Estimated confusion matrix, column `y` = outcome distribution of |y>.
    Full(SquareMatrix<T>),
    /// Estimated flip pair per qubit.
    Factored(Vec<FlipPair<T>>),
}

/// Result of running calibration circuits. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationData<T = f64> {
    n_qubits: usize,
    model: CalibrationModel<T>,
    shots_used: Shots,
    precision_epsilon: f64,
    circuits_executed: usize,
}

/// Calibration circuits a method prepares: every basis state for BF,
/// |0...0> and |1...1> for IBF.
pub fn calibration_circuits<T: Real>(method: MitigationMethod, n_qubits: usize) -> Vec<Circuit<T>> {
    match method {
        MitigationMethod::Bf => (0..1usize << n_qubits)
            .map(|x| Circuit::basis_preparation(n_qubits, x))
            .collect(),
        MitigationMethod::Ibf => vec![
            Circuit::basis_preparation(n_qubits, 0),
            Circuit::basis_preparation(n_qubits, (1usize << n_qubits) - 1),
        ],
    }
}

/// Full-matrix calibration: one prepared basis state per column.
pub fn calibrate_bf<T: Real, R: Rng + ?Sized>(
    backend: &Backend<T>,
    n_qubits: usize,
    shots: Shots,
    rng: &mut R,
) -> Result<CalibrationData<T>> {
    if n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::Config(format!(
            "BF calibration limited to {MAX_DENSE_QUBITS} qubits, got {n_qubits}"
        )));
    }
    let shots = shots.validate()?;
    let circuits = calibration_circuits::<T>(MitigationMethod::Bf, n_qubits);
    let dim = 1usize << n_qubits;
    let mut m = SquareMatrix::identity(dim);
    for (col, circuit) in circuits.iter().enumerate() {
        let measured = backend.measure(circuit, shots, rng)?;
        for (row, p) in measured.as_slice().iter().enumerate() {
            m.set(row, col, *p);
        }
    }
    Ok(CalibrationData {
        n_qubits,
        model: CalibrationModel::Full(m),
        shots_used: shots,
        precision_epsilon: shots.epsilon(),
        circuits_executed: circuits.len(),
    })
}

/// Tensor-factored calibration from the all-zeros and all-ones states.
pub fn calibrate_ibf<T: Real, R: Rng + ?Sized>(
    backend: &Backend<T>,
    n_qubits: usize,
    shots: Shots,
    rng: &mut R,
) -> Result<CalibrationData<T>> {
    let shots = shots.validate()?;
    let circuits = calibration_circuits::<T>(MitigationMethod::Ibf, n_qubits);
    let zeros = backend.measure(&circuits[0], shots, rng)?;
    let ones = backend.measure(&circuits[1], shots, rng)?;
    let mut pairs = Vec::with_capacity(n_qubits);
    for q in 0..n_qubits {
        let p01 = zeros.marginal_one(q);
        let p10 = T::one() - ones.marginal_one(q);
        // round-off can push an exact zero slightly negative
        let (p01, p10) = (p01.max(T::zero()), p10.max(T::zero()));
        if p01 > T::lit(MAX_FLIP) || p10 > T::lit(MAX_FLIP) {
            return Err(Error::Calibration(format!(
                "qubit {q}: estimated flips p01={p01}, p10={p10} exceed {MAX_FLIP}"
            )));
        }
        pairs.push(FlipPair { p01, p10 });
    }
    Ok(CalibrationData {
        n_qubits,
        model: CalibrationModel::Factored(pairs),
        shots_used: shots,
        precision_epsilon: shots.epsilon(),
        circuits_executed: circuits.len(),
    })
}

/// Either calibration protocol.
pub fn calibrate<T: Real, R: Rng + ?Sized>(
    method: MitigationMethod,
    backend: &Backend<T>,
    n_qubits: usize,
    shots: Shots,
    rng: &mut R,
) -> Result<CalibrationData<T>> {
    match method {
        MitigationMethod::Bf => calibrate_bf(backend, n_qubits, shots, rng),
        MitigationMethod::Ibf => calibrate_ibf(backend, n_qubits, shots, rng),
    }
}

impl<T: Real> CalibrationData<T> {
    /// Wraps externally obtained calibration values.
    pub fn from_parts(
        n_qubits: usize,
        model: CalibrationModel<T>,
        shots_used: Shots,
        circuits_executed: usize,
    ) -> Result<Self> {
        match &model {
            CalibrationModel::Full(m) if m.dim() != 1usize << n_qubits => {
                return Err(Error::Contract(format!(
                    "calibration matrix of dim {} for {n_qubits} qubits",
                    m.dim()
                )))
            }
            CalibrationModel::Factored(p) if p.len() != n_qubits => {
                return Err(Error::Contract(format!(
                    "{} flip pairs for {n_qubits} qubits",
                    p.len()
                )))
            }
            CalibrationModel::Factored(p) => {
                for pair in p {
                    FlipPair::new(pair.p01, pair.p10)?;
                }
            }
            _ => {}
        }
        Ok(Self {
            n_qubits,
            model,
            shots_used,
            precision_epsilon: shots_used.epsilon(),
            circuits_executed,
        })
    }

    pub fn method(&self) -> MitigationMethod {
        match self.model {
            CalibrationModel::Full(_) => MitigationMethod::Bf,
            CalibrationModel::Factored(_) => MitigationMethod::Ibf,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn model(&self) -> &CalibrationModel<T> {
        &self.model
    }

    pub fn shots_used(&self) -> Shots {
        self.shots_used
    }

    pub fn precision_epsilon(&self) -> f64 {
        self.precision_epsilon
    }

    pub fn circuits_executed(&self) -> usize {
        self.circuits_executed
    }

    /// Per-qubit flip probabilities implied by the calibration. For BF these
    /// are the single-bit marginals averaged over the prepared states.
    pub fn bit_flip_estimates(&self) -> Vec<FlipPair<T>> {
        match &self.model {
            CalibrationModel::Factored(p) => p.clone(),
            CalibrationModel::Full(m) => {
                let dim = m.dim();
                let half = T::from_usize_lossy(dim / 2);
                (0..self.n_qubits)
                    .map(|q| {
                        let bit = 1usize << q;
                        let (mut p01, mut p10) = (T::zero(), T::zero());
                        for col in 0..dim {
                            for row in 0..dim {
                                let v = m.get(row, col);
                                if col & bit == 0 && row & bit != 0 {
                                    p01 = p01 + v;
                                } else if col & bit != 0 && row & bit == 0 {
                                    p10 = p10 + v;
                                }
                            }
                        }
                        FlipPair {
                            p01: p01 / half,
                            p10: p10 / half,
                        }
                    })
                    .collect()
            }
        }
    }

    /// Factorizes the calibration once so it can be applied repeatedly.
    pub fn mitigator(&self) -> Result<Mitigator<T>> {
        let limit = T::lit(MAX_CONDITION);
        let inner = match &self.model {
            CalibrationModel::Full(m) => {
                let lu = Lu::factor(m.as_slice(), m.dim())
                    .ok_or_else(|| Error::Mitigation("calibration matrix is singular".into()))?;
                let cond = norm1(m.as_slice(), m.dim()) * norm1(&lu.inverse(), m.dim());
                if !(cond <= limit) {
                    return Err(Error::Mitigation(format!(
                        "calibration matrix condition number {cond:e} exceeds {MAX_CONDITION:e}"
                    )));
                }
                Inverse::Dense(lu)
            }
            CalibrationModel::Factored(pairs) => {
                let mut cond = T::one();
                for p in pairs {
                    let det = T::one() - p.p01 - p.p10;
                    if det <= T::zero() {
                        return Err(Error::Mitigation(format!(
                            "flip pair ({}, {}) is singular",
                            p.p01, p.p10
                        )));
                    }
                    // 1-norm condition number of the 2x2 factor
                    let n = (T::one() - p.p01 + p.p01).max(p.p10 + T::one() - p.p10);
                    let inv = p.inverse_confusion();
                    let ninv = (inv[0][0].abs() + inv[1][0].abs()).max(inv[0][1].abs() + inv[1][1].abs());
                    cond = cond * n * ninv;
                }
                if !(cond <= limit) {
                    return Err(Error::Mitigation(format!(
                        "factored calibration condition number {cond:e} exceeds {MAX_CONDITION:e}"
                    )));
                }
                Inverse::Factored(pairs.iter().map(FlipPair::inverse_confusion).collect())
            }
        };
        Ok(Mitigator {
            n_qubits: self.n_qubits,
            inner,
        })
    }

    /// Text form: header lines `key = value`, then the matrix rows or flip
    /// pairs as whitespace-separated decimals with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let f = |v: T| format!("{:.16e}", v.to_f64_lossy());
        writeln!(out, "method = {}", self.method()).unwrap();
        writeln!(out, "n_qubits = {}", self.n_qubits).unwrap();
        writeln!(out, "shots_used = {}", self.shots_used).unwrap();
        writeln!(out, "epsilon = {:.16e}", self.precision_epsilon).unwrap();
        writeln!(out, "circuits_executed = {}", self.circuits_executed).unwrap();
        match &self.model {
            CalibrationModel::Full(m) => {
                writeln!(out, "matrix").unwrap();
                for r in 0..m.dim() {
                    let row: Vec<String> = (0..m.dim()).map(|c| f(m.get(r, c))).collect();
                    writeln!(out, "{}", row.join(" ")).unwrap();
                }
            }
            CalibrationModel::Factored(pairs) => {
                writeln!(out, "pairs").unwrap();
                for p in pairs {
                    writeln!(out, "{} {}", f(p.p01), f(p.p10)).unwrap();
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: String| Error::parse("<calibration>", m);
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut header = std::collections::BTreeMap::new();
        let body_kind = loop {
            let line = lines.next().ok_or_else(|| bad("missing matrix/pairs section".into()))?;
            if line == "matrix" || line == "pairs" {
                break line;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            header.insert(k.trim().to_string(), v.trim().to_string());
        };
        let get = |k: &str| header.get(k).ok_or_else(|| bad(format!("missing key {k}")));
        let method: MitigationMethod = get("method")?.parse()?;
        let n_qubits: usize = get("n_qubits")?.parse().map_err(|e| bad(format!("n_qubits: {e}")))?;
        let shots_used: Shots = get("shots_used")?.parse()?;
        let epsilon: f64 = get("epsilon")?.parse().map_err(|e| bad(format!("epsilon: {e}")))?;
        let circuits_executed: usize = get("circuits_executed")?
            .parse()
            .map_err(|e| bad(format!("circuits_executed: {e}")))?;
        if let Some(extra) = header
            .keys()
            .find(|k| !["method", "n_qubits", "shots_used", "epsilon", "circuits_executed"].contains(&k.as_str()))
        {
            return Err(bad(format!("unknown key {extra}")));
        }
        if n_qubits == 0 || n_qubits > MAX_DENSE_QUBITS.max(24) {
            return Err(bad(format!("unsupported n_qubits {n_qubits}")));
        }
        let rows: Vec<Vec<T>> = lines
            .map(|l| {
                l.split_whitespace()
                    .map(|v| v.parse::<f64>().map(T::lit).map_err(|e| bad(format!("{v:?}: {e}"))))
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<_>>()?;
        let model = match (method, body_kind) {
            (MitigationMethod::Bf, "matrix") => {
                let dim = 1usize << n_qubits;
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(bad(format!("matrix must be {dim}x{dim}")));
                }
                CalibrationModel::Full(SquareMatrix::from_row_major(dim, rows.concat()))
            }
            (MitigationMethod::Ibf, "pairs") => {
                if rows.len() != n_qubits || rows.iter().any(|r| r.len() != 2) {
                    return Err(bad(format!("expected {n_qubits} lines of two values")));
                }
                CalibrationModel::Factored(
                    rows.iter()
                        .map(|r| FlipPair::new(r[0], r[1]))
                        .collect::<Result<_>>()?,
                )
            }
            (m, kind) => return Err(bad(format!("method {m} cannot carry a {kind} section"))),
        };
        let mut cal = Self::from_parts(n_qubits, model, shots_used, circuits_executed)?;
        cal.precision_epsilon = epsilon;
        Ok(cal)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path, message),
            other => other,
        })
    }
}

#[derive(Clone, Debug)]
enum Inverse<T> {
    Dense(Lu<T>),
    Factored(Vec<[[T; 2]; 2]>),
}

/// Prepared inverse of a calibration.
#[derive(Clone, Debug)]
pub struct Mitigator<T = f64> {
    n_qubits: usize,
    inner: Inverse<T>,
}

impl<T: Real> Mitigator<T> {
    pub fn apply(&self, measured: &BasisDistribution<T>) -> Result<QuasiDistribution<T>> {
        if measured.len() != 1usize << self.n_qubits {
            return Err(Error::Contract(format!(
                "distribution of length {} for a {}-qubit calibration",
                measured.len(),
                self.n_qubits
            )));
        }
        let values = match &self.inner {
            Inverse::Dense(lu) => lu.solve(measured.as_slice()),
            Inverse::Factored(factors) => {
                let mut v = measured.as_slice().to_vec();
                apply_factors(&mut v, factors.iter().copied());
                v
            }
        };
        Ok(QuasiDistribution { values })
    }
}

/// Real vector with unit sum that may have negative entries.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiDistribution<T = f64> {
    values: Vec<T>,
}

impl<T: Real> QuasiDistribution<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }
}

/// Applies the inverse calibration to a measured distribution.
pub fn mitigate<T: Real>(
    measured: &BasisDistribution<T>,
    cal: &CalibrationData<T>,
) -> Result<QuasiDistribution<T>> {
    cal.mitigator()?.apply(measured)
}

/// Clamps negative entries to zero and renormalizes.
pub fn project_to_simplex<T: Real>(q: &QuasiDistribution<T>) -> Result<BasisDistribution<T>> {
    let sum = q.sum();
    if !((sum - T::one()).abs() <= T::lit(1e-6)) {
        return Err(Error::Contract(format!("quasi-distribution sums to {sum}, not 1")));
    }
    if q.values.iter().all(|v| *v >= T::zero()) {
        // already on the simplex up to normalization round-off
        return Ok(BasisDistribution::from_vec_unchecked(q.values.clone()));
    }
    let clamped: Vec<T> = q.values.iter().map(|v| v.max(T::zero())).collect();
    let total: T = clamped.iter().copied().sum();
    if total <= T::zero() {
        return Err(Error::DegenerateDistribution);
    }
    Ok(BasisDistribution::from_vec_unchecked(
        clamped.into_iter().map(|v| v / total).collect(),
    ))
}
