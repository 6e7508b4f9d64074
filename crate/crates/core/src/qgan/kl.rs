use crate::dist::BasisDistribution;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Floor applied to `Q(x)` inside the logarithm.
pub const KL_FLOOR: f64 = 1e-12;

/// Relative entropy `sum_x P(x) ln(P(x) / Q(x))` in nats.
///
/// Terms with `P(x) = 0` contribute nothing; `Q(x)` is floored at
/// [`KL_FLOOR`] so the result stays finite.
pub fn kl_divergence<T: Real>(p: &BasisDistribution<T>, q: &BasisDistribution<T>) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::Contract(format!(
            "KL between distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    let floor = T::lit(KL_FLOOR);
    let kl: T = p
        .as_slice()
        .iter()
        .zip(q.as_slice())
        .filter(|(pi, _)| **pi > T::zero())
        .map(|(pi, qi)| *pi * (*pi / qi.max(floor)).ln())
        .sum();
    // round-off can leave a tiny negative value for near-identical inputs
    Ok(kl.max(T::zero()))
}
