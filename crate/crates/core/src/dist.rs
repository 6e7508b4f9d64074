//! Probability vectors over computational basis states, and shot budgets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Probability vector over the basis states `x in 0..2^n`.
///
/// Bit `q` of the index `x` is the outcome of qubit `q` (qubit 0 is the
/// least-significant bit).
#[derive(Clone, Debug, PartialEq)]
pub struct BasisDistribution<T = f64> {
    probs: Vec<T>,
}

/// Tolerance on the total mass accepted by [`BasisDistribution::new`].
pub const NORMALIZATION_TOL: f64 = 1e-10;

impl<T: Real> BasisDistribution<T> {
    /// Validates length (a power of two), non-negativity and normalization.
    pub fn new(probs: Vec<T>) -> Result<Self> {
        let len = probs.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Contract(format!(
                "distribution length {len} is not 2^n with n >= 1"
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < T::zero()) {
            return Err(Error::Contract(format!("invalid probability entry {bad}")));
        }
        let total: T = probs.iter().copied().sum();
        let tol = T::lit(NORMALIZATION_TOL).max(T::roundoff());
        if (total - T::one()).abs() > tol {
            return Err(Error::Contract(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Wraps a vector the caller already knows to be a distribution.
    pub(crate) fn from_vec_unchecked(probs: Vec<T>) -> Self {
        debug_assert!(probs.len().is_power_of_two());
        Self { probs }
    }

    /// Clamps tiny negative entries, then rescales to unit mass.
    pub(crate) fn normalized_from(mut probs: Vec<T>) -> Self {
        let thresh = T::roundoff();
        for p in probs.iter_mut() {
            if *p < T::zero() {
                debug_assert!(*p >= -thresh, "negative probability {p} beyond round-off");
                *p = T::zero();
            }
        }
        let total: T = probs.iter().copied().sum();
        if total > T::zero() {
            for p in probs.iter_mut() {
                *p = *p / total;
            }
        }
        Self { probs }
    }

    pub fn uniform(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let w = T::one() / T::from_usize_lossy(dim);
        Self {
            probs: vec![w; dim],
        }
    }

    /// All mass on basis state `x`.
    pub fn point(n_qubits: usize, x: usize) -> Self {
        let mut probs = vec![T::zero(); 1usize << n_qubits];
        probs[x] = T::one();
        Self { probs }
    }

    pub fn n_qubits(&self) -> usize {
        self.probs.len().trailing_zeros() as usize
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }

    pub fn get(&self, x: usize) -> T {
        self.probs[x]
    }

    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }

    /// Half the L1 distance between two distributions of equal length.
    pub fn total_variation(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len(), "total variation needs equal lengths");
        let l1: T = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (*a - *b).abs())
            .sum();
        l1 / T::lit(2.0)
    }

    /// Probability that qubit `q` reads 1.
    pub fn marginal_one(&self, q: usize) -> T {
        self.probs
            .iter()
            .enumerate()
            .filter(|(x, _)| (x >> q) & 1 == 1)
            .map(|(_, p)| *p)
            .sum()
    }

    pub fn cast<U: Real>(&self) -> BasisDistribution<U> {
        BasisDistribution {
            probs: self.probs.iter().map(|p| U::lit(p.to_f64_lossy())).collect(),
        }
    }
}

/// Number of measurement repetitions, or the infinite-shot limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Shots {
    #[default]
    Exact,
    Finite(u64),
}

impl Shots {
    pub fn is_exact(self) -> bool {
        matches!(self, Shots::Exact)
    }

    /// Statistical precision `1/sqrt(shots)`; zero in the exact limit.
    pub fn epsilon(self) -> f64 {
        match self {
            Shots::Exact => 0.0,
            Shots::Finite(n) => 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Shots::Finite(0) => Err(Error::Config("shots must be >= 1".into())),
            s => Ok(s),
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Finite(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("exact") {
            return Ok(Shots::Exact);
        }
        let n: u64 = s
            .parse()
            .map_err(|_| Error::Config(format!("shots must be a positive integer or \"exact\", got {s:?}")))?;
        Shots::Finite(n).validate()
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => ser.serialize_str("exact"),
            Shots::Finite(n) => ser.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(u64),
            Word(String),
        }
        match Repr::deserialize(de)? {
            Repr::Count(n) => Shots::Finite(n).validate().map_err(serde::de::Error::custom),
            Repr::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}
