//! Readout-error model: per-qubit confusion matrices applied either to exact
//! distributions or to individual measured bitstrings.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::BasisDistribution;
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::scalar::Real;

/// Upper bound on any readout flip probability.
pub const MAX_FLIP: f64 = 0.5;

/// Largest register for which the dense `2^n x 2^n` confusion matrix is built.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Readout flip probabilities `(p01, p10)` of one qubit.
///
/// `p01` is the chance of reading 1 when the qubit was 0, `p10` the chance of
/// reading 0 when it was 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipPair<T = f64> {
    pub p01: T,
    pub p10: T,
}

impl<T: Real> FlipPair<T> {
    pub fn new(p01: T, p10: T) -> Result<Self> {
        for (name, p) in [("p01", p01), ("p10", p10)] {
            if !(p >= T::zero() && p <= T::lit(MAX_FLIP)) {
                return Err(Error::Config(format!("{name} = {p} outside [0, {MAX_FLIP}]")));
            }
        }
        Ok(Self { p01, p10 })
    }

    /// Column-stochastic `[[1-p01, p10], [p01, 1-p10]]`.
    pub fn confusion(&self) -> [[T; 2]; 2] {
        [
            [T::one() - self.p01, self.p10],
            [self.p01, T::one() - self.p10],
        ]
    }

    /// Inverse of [`FlipPair::confusion`].
    pub fn inverse_confusion(&self) -> [[T; 2]; 2] {
        let det = T::one() - self.p01 - self.p10;
        [
            [(T::one() - self.p10) / det, -self.p10 / det],
            [-self.p01 / det, (T::one() - self.p01) / det],
        ]
    }
}

/// Uncorrelated readout error, one flip pair per qubit (index = qubit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutError<T = f64> {
    pairs: Vec<FlipPair<T>>,
}

impl<T: Real> ReadoutError<T> {
    pub fn new(pairs: Vec<FlipPair<T>>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Config("readout error needs at least one qubit".into()));
        }
        for p in &pairs {
            FlipPair::new(p.p01, p.p10)?;
        }
        Ok(Self { pairs })
    }

    /// Same `(p01, p10)` on every qubit.
    pub fn uniform(n_qubits: usize, p01: T, p10: T) -> Result<Self> {
        Self::new(vec![FlipPair::new(p01, p10)?; n_qubits])
    }

    /// Symmetric flip probability `p = p01 = p10` on every qubit.
    pub fn symmetric(n_qubits: usize, p: T) -> Result<Self> {
        Self::uniform(n_qubits, p, p)
    }

    pub fn n_qubits(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[FlipPair<T>] {
        &self.pairs
    }

    pub fn is_trivial(&self) -> bool {
        self.pairs.iter().all(|p| p.p01 == T::zero() && p.p10 == T::zero())
    }
}

/// Noise on the simulated backend. Both parts absent means an ideal device.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct NoiseModel<T = f64> {
    pub readout: Option<ReadoutError<T>>,
    /// Two-qubit depolarizing rate applied after every CZ.
    pub gate_depolarizing: Option<T>,
}

impl<T: Real> NoiseModel<T> {
    pub fn ideal() -> Self {
        Self {
            readout: None,
            gate_depolarizing: None,
        }
    }

    pub fn readout_only(err: ReadoutError<T>) -> Self {
        Self {
            readout: Some(err),
            gate_depolarizing: None,
        }
    }

    pub fn with_gate_depolarizing(mut self, lambda: T) -> Result<Self> {
        if !(lambda >= T::zero() && lambda <= T::one()) {
            return Err(Error::Config(format!("gate depolarizing rate {lambda} outside [0, 1]")));
        }
        self.gate_depolarizing = Some(lambda);
        Ok(self)
    }

    /// Rate to use on the density-matrix path, `None` when gates are ideal.
    pub fn active_gate_lambda(&self) -> Option<T> {
        self.gate_depolarizing.filter(|l| *l > T::zero())
    }
}

/// Single-qubit confusion matrix for the given flip probabilities.
pub fn single_qubit_confusion<T: Real>(p01: T, p10: T) -> Result<[[T; 2]; 2]> {
    Ok(FlipPair::new(p01, p10)?.confusion())
}

/// Applies 2x2 factors to a length-`2^n` vector, qubit by qubit, in `O(n 2^n)`.
pub(crate) fn apply_factors<T: Real>(v: &mut [T], factors: impl Iterator<Item = [[T; 2]; 2]>) {
    for (q, m) in factors.enumerate() {
        let bit = 1usize << q;
        for i in 0..v.len() {
            if i & bit != 0 {
                continue;
            }
            let j = i | bit;
            let (a, b) = (v[i], v[j]);
            v[i] = m[0][0] * a + m[0][1] * b;
            v[j] = m[1][0] * a + m[1][1] * b;
        }
    }
}

fn check_dims<T: Real>(len: usize, err: &ReadoutError<T>) -> Result<()> {
    if len != 1usize << err.n_qubits() {
        return Err(Error::Contract(format!(
            "vector of length {len} does not match {} readout qubits",
            err.n_qubits()
        )));
    }
    Ok(())
}

/// Noisy distribution `(M_1 x ... x M_n) dist`.
pub fn apply_readout_to_distribution<T: Real>(
    dist: &BasisDistribution<T>,
    err: &ReadoutError<T>,
) -> Result<BasisDistribution<T>> {
    check_dims(dist.len(), err)?;
    let mut v = dist.as_slice().to_vec();
    apply_factors(&mut v, err.pairs.iter().map(FlipPair::confusion));
    Ok(BasisDistribution::from_vec_unchecked(v))
}

/// Flips each bit of a measured outcome independently.
pub fn apply_readout_to_bits<T: Real, R: Rng + ?Sized>(
    outcome: usize,
    err: &ReadoutError<T>,
    rng: &mut R,
) -> usize {
    debug_assert!(outcome < 1usize << err.n_qubits());
    let mut out = outcome;
    for (q, pair) in err.pairs.iter().enumerate() {
        let p = if (outcome >> q) & 1 == 0 { pair.p01 } else { pair.p10 };
        if p > T::zero() && rng.random::<f64>() < p.to_f64_lossy() {
            out ^= 1 << q;
        }
    }
    out
}

/// Explicit Kronecker product of the per-qubit confusion matrices.
pub fn full_confusion_matrix<T: Real>(err: &ReadoutError<T>, n_qubits: usize) -> Result<SquareMatrix<T>> {
    if n_qubits != err.n_qubits() {
        return Err(Error::Contract(format!(
            "readout error covers {} qubits, asked for {n_qubits}",
            err.n_qubits()
        )));
    }
    if n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::Config(format!(
            "dense confusion matrix limited to {MAX_DENSE_QUBITS} qubits, got {n_qubits}"
        )));
    }
    let factors: Vec<_> = err.pairs.iter().map(FlipPair::confusion).collect();
    let dim = 1usize << n_qubits;
    let mut m = SquareMatrix::identity(dim);
    for row in 0..dim {
        for col in 0..dim {
            let v = factors
                .iter()
                .enumerate()
                .map(|(q, f)| f[(row >> q) & 1][(col >> q) & 1])
                .fold(T::one(), |acc, x| acc * x);
            m.set(row, col, v);
        }
    }
    Ok(m)
}
