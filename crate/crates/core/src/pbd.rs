//! Exact computations on sums of independent indicators.
//!
//! A sum of independent Bernoulli(p_i) indicators has a Poisson binomial
//! distribution. Everything here is exact up to floating-point rounding: the
//! pmf comes from the O(n²) convolution recurrence, and the binomial-derivative
//! expansion is evaluated term by term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries of a count distribution more negative than this are rejected.
const NEGATIVE_CLIP: f64 = 1e-15;
/// Allowed deviation of a count distribution's total mass from 1.
const MASS_TOL: f64 = 1e-12;

/// Expectations `p_1..p_n` of independent indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorCollection {
    probs: Vec<f64>,
}

impl IndicatorCollection {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::input(format!("probability {p} at index {i} is outside [0, 1]")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Mean of the expectations, `Σ p_i / n`; 0 for an empty collection.
    pub fn mean_prob(&self) -> f64 {
        if self.probs.is_empty() {
            0.0
        } else {
            self.probs.iter().sum::<f64>() / self.probs.len() as f64
        }
    }
}

/// Probability vector over the counts `{0..n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    pmf: Vec<f64>,
}

impl CountDistribution {
    /// Validates a probability vector. Entries in `[-1e-15, 0)` are clipped
    /// to zero and the vector is renormalized.
    pub fn new(mut pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::input("count distribution must have at least one entry"));
        }
        for (m, v) in pmf.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::input(format!("non-finite mass at count {m}")));
            }
            if *v < 0.0 {
                if *v < -NEGATIVE_CLIP {
                    return Err(Error::input(format!("negative mass {v} at count {m}")));
                }
                *v = 0.0;
            }
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::input(format!("masses sum to {total}, not 1")));
        }
        pmf.iter_mut().for_each(|v| *v /= total);
        Ok(Self { pmf })
    }

    /// Wraps the output of an internal computation; a failure here is a bug.
    pub(crate) fn from_computed(pmf: Vec<f64>) -> Result<Self> {
        Self::new(pmf).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn point_mass(at: usize) -> Self {
        let mut pmf = vec![0.0; at + 1];
        pmf[at] = 1.0;
        Self { pmf }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn into_pmf(self) -> Vec<f64> {
        self.pmf
    }

    /// Largest count with a slot in the vector (support may be smaller).
    pub fn max_count(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(m, p)| m as f64 * p).sum()
    }

    /// `E[f(count)]`, with `f` evaluated only where it is defined.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.pmf.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

/// Real-valued measure over `{0..n}`; entries may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedMeasure {
    values: Vec<f64>,
}

impl SignedMeasure {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Power sums over the low `(0, 1/2]` and high `(1/2, 1)` indicators plus
/// the number of deterministic ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub d: usize,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub ones: usize,
}

/// Exact pmf of `Σ X_i` by incremental convolution.
pub fn pbd_pmf(c: &IndicatorCollection) -> CountDistribution {
    CountDistribution {
        pmf: pmf_of(c.probs()),
    }
}

/// Unchecked convolution kernel; `probs` must already lie in `[0, 1]`.
pub fn pmf_of(probs: &[f64]) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(probs.len() + 1);
    pmf.push(1.0);
    for &p in probs {
        pmf.push(0.0);
        for m in (1..pmf.len()).rev() {
            pmf[m] = pmf[m] * (1.0 - p) + pmf[m - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    pmf
}

/// `½ Σ_m |a[m] − b[m]|`, padding the shorter vector with zeros.
pub fn tv_distance(a: &CountDistribution, b: &CountDistribution) -> f64 {
    tv_of(a.pmf(), b.pmf())
}

pub(crate) fn tv_of(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let at = |v: &[f64], m: usize| v.get(m).copied().unwrap_or(0.0);
    let sum: f64 = (0..len).map(|m| (at(a, m) - at(b, m)).abs()).sum();
    (0.5 * sum).clamp(0.0, 1.0)
}

/// `π_ℓ = Σ_i p_i^ℓ` for `ℓ = 1..=d`.
pub fn power_sums(c: &IndicatorCollection, d: usize) -> Vec<f64> {
    (1..=d)
        .map(|l| c.probs().iter().map(|p| p.powi(l as i32)).sum())
        .collect()
}

/// Raw moments `E[S^ℓ]` for `ℓ = 1..=d`.
pub fn raw_moments(dist: &CountDistribution, d: usize) -> Vec<f64> {
    (1..=d)
        .map(|l| {
            dist.pmf()
                .iter()
                .enumerate()
                .map(|(m, p)| p * (m as f64).powi(l as i32))
                .sum()
        })
        .collect()
}

/// Truncated expansion `Σ_{ℓ=0}^{order} α_ℓ(P, p) · δ^ℓ B_{n,p}(m)`.
///
/// `α_ℓ` is the ℓ-th elementary symmetric polynomial of the centred values
/// `p_i − p`. The normalized derivative is evaluated by the identity
/// `δ^ℓ B_{n,p}(m) = Σ_j (−1)^{ℓ−j} C(ℓ, j) b(m − j, n − ℓ, p)`, which follows
/// from `∂b(m, n, p)/∂p = n (b(m−1, n−1, p) − b(m, n−1, p))`.
pub fn roos_expansion(c: &IndicatorCollection, p: f64, order: usize) -> Result<SignedMeasure> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::input(format!("base value {p} must lie in (0, 1)")));
    }
    let n = c.len();
    if order > n {
        return Err(Error::input(format!("truncation order {order} exceeds n = {n}")));
    }

    let mut alpha = vec![0.0; order + 1];
    alpha[0] = 1.0;
    for (i, &pi) in c.probs().iter().enumerate() {
        let x = pi - p;
        for l in (1..=order.min(i + 1)).rev() {
            alpha[l] += alpha[l - 1] * x;
        }
    }

    let mut values = vec![0.0; n + 1];
    for (l, &a) in alpha.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let base = binomial_pmf(n - l, p);
        let b = |m: isize| -> f64 {
            if m < 0 {
                0.0
            } else {
                base.get(m as usize).copied().unwrap_or(0.0)
            }
        };
        for (m, out) in values.iter_mut().enumerate() {
            let mut deriv = 0.0;
            for j in 0..=l {
                let sign = if (l - j) % 2 == 0 { 1.0 } else { -1.0 };
                deriv += sign * binomial_coefficient(l, j) * b(m as isize - j as isize);
            }
            *out += a * deriv;
        }
    }
    Ok(SignedMeasure { values })
}

/// TV bound for two collections in `(0, 1/2]` whose first `d` power sums
/// agree: `20 (d+1)^{1/4} 2^{−(d+1)/2}`.
pub fn roos_bound(d: usize) -> f64 {
    let d1 = (d + 1) as f64;
    20.0 * d1.powf(0.25) * 2f64.powf(-d1 / 2.0)
}

/// The collection `1 − p_i`; its count distribution is the mirror image.
pub fn complement(c: &IndicatorCollection) -> IndicatorCollection {
    IndicatorCollection {
        probs: c.probs().iter().map(|p| 1.0 - p).collect(),
    }
}

pub fn moment_profile(c: &IndicatorCollection, d: usize) -> MomentProfile {
    let mut low = vec![0.0; d];
    let mut high = vec![0.0; d];
    let mut ones = 0;
    for &p in c.probs() {
        if p == 1.0 {
            ones += 1;
        } else if p > 0.0 {
            let target = if p <= 0.5 { &mut low } else { &mut high };
            let mut pw = 1.0;
            for slot in target.iter_mut() {
                pw *= p;
                *slot += pw;
            }
        }
    }
    MomentProfile { d, low, high, ones }
}

/// `b(m, n, p)` for `m = 0..=n`.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    if p <= 0.0 || p >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[if p <= 0.0 { 0 } else { n }] = 1.0;
        return v;
    }
    if n <= 60 {
        (0..=n)
            .map(|m| binomial_coefficient(n, m) * p.powi(m as i32) * (1.0 - p).powi((n - m) as i32))
            .collect()
    } else {
        let (lp, lq) = (p.ln(), (1.0 - p).ln());
        let ln_fact: Vec<f64> = std::iter::once(0.0)
            .chain((1..=n).scan(0.0, |acc, i| {
                *acc += (i as f64).ln();
                Some(*acc)
            }))
            .collect();
        (0..=n)
            .map(|m| (ln_fact[n] - ln_fact[m] - ln_fact[n - m] + m as f64 * lp + (n - m) as f64 * lq).exp())
            .collect()
    }
}

pub(crate) fn binomial_coefficient(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
