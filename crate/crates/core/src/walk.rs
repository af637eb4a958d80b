//! The weighted up/right lattice walk that decides whether a late vertex ever
//! catches up with an older one.
//!
//! From `(i, j)` the walk steps right with probability proportional to
//! `alpha * i + beta` and up with probability proportional to
//! `alpha * j + beta`. Started below the diagonal at `(A, 1)`, the quantity of
//! interest is `f(A)`, the probability of ever touching the diagonal. It is
//! computed two independent ways: a series over first-hit points `(m, m)`
//! (reflection-principle path counts times the common path probability) and a
//! dynamic program over lattice states.

use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::ModelKind;

/// Terms with `m` up to this bound are evaluated in exact rational
/// arithmetic; larger `m` continue in log space.
pub const EXACT_TERM_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WalkParams {
    #[serde(serialize_with = "ser_ratio")]
    pub alpha: Rational64,
    #[serde(serialize_with = "ser_ratio")]
    pub beta: Rational64,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl WalkParams {
    pub fn new(alpha: Rational64, beta: Rational64) -> Result<Self> {
        if alpha <= Rational64::zero() {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        if alpha + beta < Rational64::zero() {
            return Err(Error::domain(format!("alpha + beta must be >= 0, got {}", alpha + beta)));
        }
        Ok(WalkParams { alpha, beta })
    }

    pub fn from_ints(alpha: i64, beta: i64) -> Result<Self> {
        Self::new(Rational64::from_integer(alpha), Rational64::from_integer(beta))
    }

    /// `beta / alpha`: the additive offset per unit of subtree size.
    pub fn offset(&self) -> Rational64 {
        self.beta / self.alpha
    }

    pub fn u_ceil(&self) -> i64 {
        self.offset().ceil().to_integer()
    }

    fn offset_big(&self) -> BigRational {
        let c = self.offset();
        BigRational::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()))
    }

    fn offset_f64(&self) -> f64 {
        *self.offset().numer() as f64 / *self.offset().denom() as f64
    }

    /// Exact probability of a right step from `(i, j)`.
    pub fn right_prob(&self, i: u64, j: u64) -> BigRational {
        let c = self.offset_big();
        let w = BigRational::from_integer(BigInt::from(i)) + &c;
        let total = BigRational::from_integer(BigInt::from(i + j)) + &c + &c;
        w / total
    }

    /// Exact probability of an up step from `(i, j)`.
    pub fn up_prob(&self, i: u64, j: u64) -> BigRational {
        self.right_prob(j, i)
    }

    #[inline]
    fn right_prob_f64(c: f64, i: usize, j: usize) -> f64 {
        (i as f64 + c) / ((i + j) as f64 + 2.0 * c)
    }
}

/// Walk weights induced by each growth model on a pair of competing subtrees.
pub fn params_for_model(kind: ModelKind) -> Result<WalkParams> {
    match kind {
        ModelKind::PreferentialAttachment => WalkParams::from_ints(2, -1),
        ModelKind::UniformAttachment => WalkParams::from_ints(1, 0),
        ModelKind::DiffusionRegular { d } if d >= 3 => WalkParams::from_ints(d as i64 - 2, 1),
        ModelKind::DiffusionRegular { d } => Err(Error::UnsupportedModel(format!(
            "diffusion with d = {d}: the walk degenerates and persistence fails"
        ))),
    }
}

fn check_endpoints(a: usize, b: usize, m: usize) -> Result<()> {
    if b < 1 || b >= a || m < a {
        return Err(Error::domain(format!("need 1 <= B < A <= m, got A={a}, B={b}, m={m}")));
    }
    Ok(())
}

fn factorial(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Number of monotone paths `(A, B) -> (m, m)` that stay strictly below the
/// diagonal until the endpoint.
pub fn theta_paths(a: usize, b: usize, m: usize) -> Result<BigUint> {
    check_endpoints(a, b, m)?;
    let num = factorial(2 * m - 1 - a - b) * BigUint::from(a - b);
    Ok(num / (factorial(m - a) * factorial(m - b)))
}

/// Probability of any single such path. Every path collects the same right
/// weights `A..m` and up weights `B..m` over the same totals, so the product
/// does not depend on the path.
pub fn path_prob(params: &WalkParams, a: usize, b: usize, m: usize) -> Result<BigRational> {
    check_endpoints(a, b, m)?;
    let c = params.offset_big();
    let two_c = &c + &c;
    let term = |k: usize, shift: &BigRational| BigRational::from_integer(BigInt::from(k)) + shift;
    let mut p = BigRational::one();
    for i in a..m {
        p *= term(i, &c);
    }
    for j in b..m {
        p *= term(j, &c);
    }
    for k in (a + b)..(2 * m) {
        let t = term(k, &two_c);
        if !t.is_positive() {
            return Err(Error::domain(format!("non-positive step total at level {k}")));
        }
        p /= t;
    }
    if p.is_negative() {
        return Err(Error::domain("negative step weight on the path"));
    }
    Ok(p)
}

/// `f(A, m)`: probability that the walk from `(A, 1)` first meets the
/// diagonal at `(m, m)`, exactly.
pub fn first_hit_exact(params: &WalkParams, a: usize, m: usize) -> Result<BigRational> {
    let theta = BigRational::from_integer(BigInt::from(theta_paths(a, 1, m)?));
    Ok(theta * path_prob(params, a, 1, m)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HitProbResult {
    /// Probability of touching the diagonal at some `m <= truncation_m`.
    pub value: f64,
    pub truncation_m: usize,
    /// Estimated probability of first touching beyond the truncation.
    pub tail_bound: f64,
}

pub fn default_truncation(a: usize) -> usize {
    10_000usize.max(100 * a)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Tail beyond `m_max` from the C/m² decay of first-hit terms, with C fitted
/// by least squares over the last decade of terms.
fn tail_from_terms(terms: &[f64], a: usize, m_max: usize) -> f64 {
    let lo = (m_max / 10).max(a);
    let (mut num, mut den) = (0.0, 0.0);
    for m in lo..=m_max {
        let f = terms[m - a];
        let inv2 = 1.0 / (m as f64 * m as f64);
        num += f * inv2;
        den += inv2 * inv2;
    }
    if den == 0.0 {
        return 0.0;
    }
    (num / den).max(0.0) / m_max as f64
}

fn check_hit_args(a: usize, m_max: usize) -> Result<()> {
    if a < 2 {
        return Err(Error::domain(format!("start column A must be >= 2, got {a}")));
    }
    if m_max < a {
        return Err(Error::domain(format!("truncation {m_max} is below the start column {a}")));
    }
    Ok(())
}

/// First-hit terms `f(A, m)` for `m = A..=m_max`.
pub fn first_hit_terms(params: &WalkParams, a: usize, m_max: usize) -> Result<Vec<f64>> {
    check_hit_args(a, m_max)?;
    let exact_hi = m_max.min(EXACT_TERM_LIMIT.max(a));
    let mut terms = Vec::with_capacity(m_max - a + 1);
    for m in a..=exact_hi {
        let t = first_hit_exact(params, a, m)?;
        terms.push(t.to_f64().unwrap_or(0.0));
    }
    // log f(m+1) - log f(m) from the factorial and product recurrences.
    let c = params.offset_f64();
    let af = a as f64;
    let mut log_f = terms.last().map(|&t| t.ln()).unwrap_or(f64::NEG_INFINITY);
    for m in exact_hi..m_max {
        let mf = m as f64;
        let theta_ratio = ((2.0 * mf - af) * (2.0 * mf - af - 1.0)) / ((mf + 1.0 - af) * mf);
        let prob_ratio = (mf + c) * (mf + c) / ((2.0 * mf + 2.0 * c) * (2.0 * mf + 1.0 + 2.0 * c));
        log_f += theta_ratio.ln() + prob_ratio.ln();
        terms.push(log_f.exp());
    }
    Ok(terms)
}

/// `f(A)` as the series of first-hit terms, truncated at `m_max`.
pub fn hit_prob_series(params: &WalkParams, a: usize, m_max: usize) -> Result<HitProbResult> {
    let terms = first_hit_terms(params, a, m_max)?;
    let mut sum = CompensatedSum::default();
    for &t in &terms {
        sum.add(t);
    }
    Ok(HitProbResult {
        value: sum.value().clamp(0.0, 1.0),
        truncation_m: m_max,
        tail_bound: tail_from_terms(&terms, a, m_max),
    })
}

/// `f(A)` by pushing probability mass through the lattice column by column,
/// absorbing it on the diagonal. Mass that leaves column `m_max` is dropped,
/// which is the same truncation as the series.
pub fn hit_prob_dp(params: &WalkParams, a: usize, m_max: usize) -> Result<HitProbResult> {
    check_hit_args(a, m_max)?;
    let c = params.offset_f64();
    // mass[j] holds the current column; index 0 unused.
    let mut mass = vec![0.0f64; m_max + 1];
    mass[1] = 1.0;
    let mut absorbed = Vec::with_capacity(m_max - a + 1);
    for i in a..=m_max {
        let mut hit = 0.0;
        for j in 1..i {
            let here = mass[j];
            let right = WalkParams::right_prob_f64(c, i, j);
            mass[j] = here * right;
            let up = here * (1.0 - right);
            if j + 1 < i {
                mass[j + 1] += up;
            } else {
                hit = up;
            }
        }
        absorbed.push(hit);
    }
    let mut sum = CompensatedSum::default();
    for &x in &absorbed {
        sum.add(x);
    }
    Ok(HitProbResult {
        value: sum.value().clamp(0.0, 1.0),
        truncation_m: m_max,
        tail_bound: tail_from_terms(&absorbed, a, m_max),
    })
}

/// Truncated `f(A)` for every `A` in `2..=a_max` from one backward sweep:
/// `h(i, j) = R h(i+1, j) + U h(i, j+1)` with `h(i, i) = 1` and zero past
/// column `m_max`. Entry `A` of the result is `f(A)`; entries 0 and 1 are 0.
pub fn hit_prob_table(params: &WalkParams, a_max: usize, m_max: usize) -> Result<Vec<f64>> {
    check_hit_args(a_max.max(2), m_max)?;
    let c = params.offset_f64();
    let mut column = vec![0.0f64; m_max + 1];
    let mut out = vec![0.0f64; a_max + 1];
    for i in (2..=m_max).rev() {
        let mut above = 1.0;
        for j in (1..i).rev() {
            let right = WalkParams::right_prob_f64(c, i, j);
            let h = right * column[j] + (1.0 - right) * above;
            column[j] = h;
            above = h;
        }
        if i <= a_max {
            out[i] = column[1];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    /// `(A, f(A))` over the checked range.
    pub values: Vec<(usize, f64)>,
    pub strictly_decreasing: bool,
    /// Fitted exponent in `log2 f(A) + A ≈ gamma * log2 A + c`.
    pub gamma: f64,
    pub c: f64,
    pub max_residual: f64,
    pub u_ceil: i64,
    /// `gamma <= u_ceil + 3`.
    pub gamma_within_bound: bool,
}

/// Checks that `f(A)` decays like a polynomial over `2^A`: strictly
/// decreasing on the range, with a minimax fit of the polynomial degree.
pub fn envelope_check(params: &WalkParams, a_range: RangeInclusive<usize>, m_max: usize) -> Result<EnvelopeReport> {
    let (lo, hi) = (*a_range.start(), *a_range.end());
    if lo < 2 || hi < lo || m_max < hi {
        return Err(Error::domain(format!("bad range {lo}..={hi} for truncation {m_max}")));
    }
    let table = hit_prob_table(params, hi, m_max)?;
    let values: Vec<(usize, f64)> = (lo..=hi).map(|a| (a, table[a])).collect();
    let strictly_decreasing = values.windows(2).all(|w| w[1].1 < w[0].1);

    let points: Vec<(f64, f64)> = values
        .iter()
        .map(|&(a, f)| ((a as f64).log2(), f.log2() + a as f64))
        .collect();
    let (gamma, c, max_residual) = minimax_line(&points);
    let u_ceil = params.u_ceil();
    Ok(EnvelopeReport {
        values,
        strictly_decreasing,
        gamma,
        c,
        max_residual,
        u_ceil,
        gamma_within_bound: gamma <= (u_ceil + 3) as f64,
    })
}

/// Chebyshev (minimax) line fit `y ≈ slope * x + intercept`. For a fixed
/// slope the best intercept centres the residual band, and the band width is
/// convex in the slope, so a ternary search finds the optimum.
fn minimax_line(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let band = |slope: f64| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(x, y) in points {
            let r = y - slope * x;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    };
    let width = |slope: f64| {
        let (lo, hi) = band(slope);
        hi - lo
    };
    let (mut a, mut b) = (-1e3, 1e3);
    for _ in 0..300 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if width(m1) <= width(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let slope = 0.5 * (a + b);
    let (lo, hi) = band(slope);
    (slope, 0.5 * (lo + hi), 0.5 * (hi - lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn model_params() {
        let pa = params_for_model(ModelKind::PreferentialAttachment).unwrap();
        assert_eq!((pa.alpha, pa.beta), (Rational64::from_integer(2), Rational64::from_integer(-1)));
        assert_eq!(pa.right_prob(2, 3), ratio(3, 8));
        let ua = params_for_model(ModelKind::UniformAttachment).unwrap();
        assert_eq!(ua.right_prob(2, 2), ratio(1, 2));
        let d3 = params_for_model(ModelKind::DiffusionRegular { d: 3 }).unwrap();
        assert_eq!(d3.right_prob(1, 1), ratio(2, 4));
        assert!(matches!(
            params_for_model(ModelKind::DiffusionRegular { d: 2 }),
            Err(Error::UnsupportedModel(_))
        ));
        assert_eq!(pa.u_ceil(), 0);
        assert_eq!(ua.u_ceil(), 0);
        assert_eq!(d3.u_ceil(), 1);
        assert!(WalkParams::from_ints(0, 1).is_err());
        assert!(WalkParams::from_ints(1, -2).is_err());
    }

    #[test]
    fn right_and_up_are_normalised() {
        for params in [
            WalkParams::from_ints(2, -1).unwrap(),
            WalkParams::from_ints(1, 0).unwrap(),
            WalkParams::from_ints(5, 1).unwrap(),
        ] {
            for i in 1..12 {
                for j in 1..12 {
                    assert!((params.right_prob(i, j) + params.up_prob(i, j)).is_one());
                }
            }
        }
    }

    #[test]
    fn theta_examples() {
        for a in 2..10 {
            assert_eq!(theta_paths(a, 1, a).unwrap(), BigUint::one());
        }
        assert_eq!(theta_paths(2, 1, 3).unwrap(), BigUint::from(1u32));
        assert_eq!(theta_paths(3, 1, 4).unwrap(), BigUint::from(2u32));
        assert!(theta_paths(2, 2, 3).is_err());
        assert!(theta_paths(4, 1, 3).is_err());
    }

    #[test]
    fn path_prob_examples() {
        let ua = WalkParams::from_ints(1, 0).unwrap();
        assert_eq!(first_hit_exact(&ua, 2, 2).unwrap(), ratio(1, 3));
        assert_eq!(first_hit_exact(&ua, 3, 3).unwrap(), ratio(1, 10));
        for m in 2..=10i64 {
            assert_eq!(first_hit_exact(&ua, 2, m as usize).unwrap(), ratio(1, (2 * m - 1) * (2 * m - 3)));
        }
        assert!(path_prob(&ua, 3, 3, 3).is_err());
    }

    #[test]
    fn ua_two_sums_to_half() {
        let ua = WalkParams::from_ints(1, 0).unwrap();
        let r = hit_prob_series(&ua, 2, 10_000).unwrap();
        assert!((r.value - 0.5).abs() < 1e-4);
        // Exact partial sum is 1/2 - 1/(2(2M-1)); the tail estimate should be close to that gap.
        let gap = 0.5 / (2.0 * 10_000.0 - 1.0);
        assert!((r.value - (0.5 - gap)).abs() < 1e-12);
        assert!((r.tail_bound - gap).abs() < 0.05 * gap);
    }

    #[test]
    fn log_space_terms_continue_exact_terms() {
        for params in [WalkParams::from_ints(2, -1).unwrap(), WalkParams::from_ints(1, 1).unwrap()] {
            let terms = first_hit_terms(&params, 3, 90).unwrap();
            for m in [70usize, 80, 90] {
                let exact = first_hit_exact(&params, 3, m).unwrap().to_f64().unwrap();
                let got = terms[m - 3];
                assert!((got - exact).abs() <= 1e-12 * exact, "m={m}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn dp_and_series_agree() {
        for params in [
            WalkParams::from_ints(2, -1).unwrap(),
            WalkParams::from_ints(1, 0).unwrap(),
            WalkParams::from_ints(1, 1).unwrap(),
        ] {
            for a in [2, 3, 7] {
                let s = hit_prob_series(&params, a, 2000).unwrap();
                let d = hit_prob_dp(&params, a, 2000).unwrap();
                assert!((s.value - d.value).abs() < 1e-12, "{a}: {} vs {}", s.value, d.value);
            }
            let table = hit_prob_table(&params, 7, 2000).unwrap();
            let d = hit_prob_dp(&params, 7, 2000).unwrap();
            assert!((table[7] - d.value).abs() < 1e-12);
        }
    }

    #[test]
    fn series_monotone_in_truncation() {
        let pa = WalkParams::from_ints(2, -1).unwrap();
        let mut last = 0.0;
        for m in [5, 10, 50, 200, 1000] {
            let v = hit_prob_series(&pa, 4, m).unwrap().value;
            assert!(v >= last && v <= 1.0);
            last = v;
        }
    }

    #[test]
    fn minimax_fit_recovers_line() {
        let pts: Vec<(f64, f64)> = (1..20).map(|i| (i as f64, 2.5 * i as f64 - 1.0)).collect();
        let (s, c, r) = minimax_line(&pts);
        assert!((s - 2.5).abs() < 1e-9 && (c + 1.0).abs() < 1e-7 && r < 1e-7);
    }
}
