//! Exact probabilities that a seeded tree turns symmetric in its first two
//! vertices, and the hub sizes they imply.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::ModelKind;

/// Largest `(d-1)^r` accepted by [`symmetry_prob_diffusion`].
pub const MAX_DIFFUSION_LEVEL: u64 = 1 << 16;

fn factorial(n: u64) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Probability that the `k - 1` vertices after a `k`-leaf star hub all attach
/// to vertex 1 under preferential attachment: `1 / (2^(k-1) C(2k-2, k-1))`.
pub fn symmetry_prob_pa(k: usize) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::domain(format!("hub size must be >= 2, got {k}")));
    }
    let k = k as u64;
    let den = (BigUint::one() << (k - 1)) * binomial(2 * k - 2, k - 1);
    Ok(ratio(BigUint::one(), den))
}

/// Same event under uniform attachment: `k! / (2k-1)!`.
pub fn symmetry_prob_ua(k: usize) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::domain(format!("hub size must be >= 2, got {k}")));
    }
    let k = k as u64;
    Ok(ratio(factorial(k), factorial(2 * k - 1)))
}

fn diffusion_level(d: usize, r: usize) -> Result<u64> {
    if d < 3 || r < 1 {
        return Err(Error::domain(format!("need d >= 3 and r >= 1, got d={d}, r={r}")));
    }
    let mut m: u64 = 1;
    for _ in 0..r {
        m = m
            .checked_mul(d as u64 - 1)
            .filter(|&m| m <= MAX_DIFFUSION_LEVEL)
            .ok_or_else(|| Error::Overflow(format!("(d-1)^r exceeds {MAX_DIFFUSION_LEVEL} for d={d}, r={r}")))?;
    }
    Ok(m)
}

/// Probability that, starting from the radius-`r` ball, the next `(d-1)^r`
/// vertices complete the next level below vertex 1, making it a mirror image
/// of vertex 0: `M! / prod_{i<M} (dM + i(d-2))` with `M = (d-1)^r`.
pub fn symmetry_prob_diffusion(d: usize, r: usize) -> Result<BigRational> {
    let m = diffusion_level(d, r)?;
    let d = d as u64;
    let den: BigUint = (0..m).map(|i| BigUint::from(d * m + i * (d - 2))).product();
    Ok(ratio(factorial(m), den))
}

/// Smallest `K` with `5 * 2^(-K/4) < epsilon`.
///
/// The underlying bound only holds once `K` exceeds an unspecified constant;
/// the value returned is the formula's, with no claim for tiny `K`.
pub fn sufficient_hub_size(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 5.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 5), got {epsilon}")));
    }
    let bound = |k: usize| 5.0 * (-(k as f64) / 4.0).exp2();
    let mut k = (4.0 * (5.0 / epsilon).log2()).floor() as usize + 1;
    // Guard the float formula against rounding at exact powers.
    while bound(k) >= epsilon {
        k += 1;
    }
    while k > 0 && bound(k - 1) < epsilon {
        k -= 1;
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessaryBoundReport {
    pub model: String,
    pub epsilon: f64,
    /// Smallest hub size (or radius) allowed by the relaxed inequality.
    pub relaxed: Option<usize>,
    /// Smallest hub size (or radius) whose exact symmetry probability is at
    /// most `2 * epsilon`; `None` when it lies beyond the computable range.
    pub exact: Option<usize>,
    /// Symmetry probability at `exact`, as a rational string.
    pub exact_prob: Option<String>,
    /// Sufficient hub size for the attachment models.
    pub sufficient: Option<usize>,
}

const MAX_HUB_SEARCH: usize = 4096;

fn smallest_with<F>(mut prob: F, two_eps: &BigRational, range: impl Iterator<Item = usize>) -> Result<Option<(usize, BigRational)>>
where
    F: FnMut(usize) -> Result<BigRational>,
{
    for k in range {
        match prob(k) {
            Ok(p) if &p <= two_eps => return Ok(Some((k, p))),
            Ok(_) => {}
            Err(Error::Overflow(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Lower bounds on the seed size needed for vertex 0 to stay the centroid
/// with probability at least `1 - epsilon`.
pub fn necessary_bound_report(kind: ModelKind, epsilon: f64) -> Result<NecessaryBoundReport> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let two_eps = BigRational::from_float(2.0 * epsilon).expect("finite");
    let target = (1.0 / (2.0 * epsilon)).ln();
    let (relaxed, exact, sufficient) = match kind {
        ModelKind::PreferentialAttachment => {
            // P_k >= 2^-(3k-3).
            let relaxed = (2..).find(|&k| (3 * k - 3) as f64 * std::f64::consts::LN_2 >= target);
            let exact = smallest_with(symmetry_prob_pa, &two_eps, 2..=MAX_HUB_SEARCH)?;
            (relaxed, exact, Some(sufficient_hub_size(epsilon)?))
        }
        ModelKind::UniformAttachment => {
            let exact = smallest_with(symmetry_prob_ua, &two_eps, 2..=MAX_HUB_SEARCH)?;
            (exact.as_ref().map(|e| e.0), exact, Some(sufficient_hub_size(epsilon)?))
        }
        ModelKind::DiffusionRegular { d } => {
            if d < 3 {
                return Err(Error::UnsupportedModel(format!("diffusion with d = {d}")));
            }
            let df = d as f64;
            let lhs = |r: usize| {
                let level = (df - 1.0).powi(r as i32);
                level * (df - 2.0).ln() + (df.powi(r as i32 + 1) + level) * std::f64::consts::LN_2
            };
            let relaxed = (1..64).find(|&r| lhs(r) >= target);
            let exact = smallest_with(|r| symmetry_prob_diffusion(d, r), &two_eps, 1..64)?;
            (relaxed, exact, None)
        }
    };
    Ok(NecessaryBoundReport {
        model: kind.to_string(),
        epsilon,
        relaxed,
        exact_prob: exact.as_ref().map(|(_, p)| p.to_string()),
        exact: exact.map(|(k, _)| k),
        sufficient,
    })
}

/// Decimal value of an exact probability.
pub fn to_f64(p: &BigRational) -> f64 {
    p.to_f64().unwrap_or(0.0)
}
