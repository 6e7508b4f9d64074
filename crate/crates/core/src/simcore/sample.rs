use rand::Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Binomial, Distribution};

use crate::dist::BasisDistribution;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome counts from `shots` independent measurements of `dist`.
///
/// Counts are drawn as a chain of conditional binomials, so the cost is
/// `O(2^n)` regardless of the shot count.
pub fn sample_histogram<T: Real, R: Rng + ?Sized>(
    dist: &BasisDistribution<T>,
    shots: u64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::Config("shots must be >= 1".into()));
    }
    let probs: Vec<f64> = dist.as_slice().iter().map(|p| p.to_f64_lossy()).collect();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    for (x, p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if x + 1 == probs.len() {
            counts[x] = remaining;
            break;
        }
        let q = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q)
            .expect("binomial parameters are clamped")
            .sample(rng);
        counts[x] = k;
        remaining -= k;
        mass_left -= p;
    }
    Ok(counts)
}

/// Empirical distribution `counts / shots`.
pub fn sample_counts<T: Real, R: Rng + ?Sized>(
    dist: &BasisDistribution<T>,
    shots: u64,
    rng: &mut R,
) -> Result<BasisDistribution<T>> {
    let counts = sample_histogram(dist, shots, rng)?;
    Ok(counts_to_distribution(&counts))
}

fn counts_to_distribution<T: Real>(counts: &[u64]) -> BasisDistribution<T> {
    let total: u64 = counts.iter().sum();
    let denom = T::lit(total as f64);
    BasisDistribution::from_vec_unchecked(
        counts.iter().map(|&c| T::lit(c as f64) / denom).collect(),
    )
}

/// Individual measurement outcomes, one basis index per shot.
pub fn sample_outcomes<T: Real, R: Rng + ?Sized>(
    dist: &BasisDistribution<T>,
    shots: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if shots == 0 {
        return Err(Error::Config("shots must be >= 1".into()));
    }
    let weights = dist.as_slice().iter().map(|p| p.to_f64_lossy());
    let index = WeightedIndex::new(weights)
        .map_err(|e| Error::Contract(format!("cannot sample distribution: {e}")))?;
    Ok((0..shots).map(|_| index.sample(rng)).collect())
}
