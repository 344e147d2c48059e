//! Exact arithmetic on the probability grid `{0, 1/G, ..., 1}`.
//!
//! A grid value is stored as its integer numerator `j`. Power sums of grid
//! values are kept as integer numerators over `G^t`, so equal moments compare
//! as equal integers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational `num / den`, used wherever a value must round-trip exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::input("rational with zero denominator"));
        }
        Ok(Self { num, den })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Numerator over `target_den`, if the value is exactly representable there.
    pub fn numerator_over(self, target_den: u128) -> Option<u128> {
        let scaled = (self.num as u128).checked_mul(target_den)?;
        (scaled % self.den as u128 == 0).then_some(scaled / self.den as u128)
    }
}

/// Grid with denominator `G` (for Moment Search `G = k²`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    den: u64,
}

impl Grid {
    pub fn new(den: u64) -> Result<Self> {
        if den < 2 {
            return Err(Error::input(format!("grid denominator {den} must be at least 2")));
        }
        Ok(Self { den })
    }

    /// The `1/k²` grid.
    pub fn for_k(k: u64) -> Result<Self> {
        Self::new(k.checked_mul(k).ok_or_else(|| Error::input("k is too large"))?)
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn value(self, j: u64) -> f64 {
        j as f64 / self.den as f64
    }

    /// Mixing value in `(0, 1/2]`.
    pub fn is_low(self, j: u64) -> bool {
        j > 0 && 2 * j <= self.den
    }

    /// Mixing value in `(1/2, 1)`.
    pub fn is_high(self, j: u64) -> bool {
        2 * j > self.den && j < self.den
    }

    /// Numerators of the low values, ascending.
    pub fn low_values(self) -> impl Iterator<Item = u64> {
        1..=self.den / 2
    }

    /// Numerators of the high values, ascending.
    pub fn high_values(self) -> impl Iterator<Item = u64> {
        self.den / 2 + 1..self.den
    }

    /// All numerators `0..=G`.
    pub fn values(self) -> impl Iterator<Item = u64> {
        0..=self.den
    }

    /// `G^t`, the denominator of the `t`-th power sum.
    pub fn power_den(self, t: usize) -> Result<u128> {
        checked_pow(self.den, t)
    }

    /// Nearest grid numerator to `p`, when `p` is a grid value up to `tol`.
    pub fn numerator_of(self, p: f64, tol: f64) -> Option<u64> {
        let j = (p * self.den as f64).round();
        ((j / self.den as f64 - p).abs() <= tol && (0.0..=self.den as f64).contains(&j)).then_some(j as u64)
    }
}

pub(crate) fn checked_pow(base: u64, exp: usize) -> Result<u128> {
    (base as u128)
        .checked_pow(exp as u32)
        .ok_or_else(|| Error::BudgetExceeded(format!("{base}^{exp} overflows 128-bit arithmetic")))
}

/// `(Σ j, Σ j², ..., Σ j^d)` for the given numerators.
pub fn power_sum_numerators(values: &[u64], d: usize) -> Result<Vec<u128>> {
    let mut out = vec![0u128; d];
    for &j in values {
        let mut pow = 1u128;
        for slot in out.iter_mut() {
            pow = pow
                .checked_mul(j as u128)
                .ok_or_else(|| Error::BudgetExceeded("power sum overflows 128-bit arithmetic".into()))?;
            *slot = slot
                .checked_add(pow)
                .ok_or_else(|| Error::BudgetExceeded("power sum overflows 128-bit arithmetic".into()))?;
        }
    }
    Ok(out)
}

/// Exact moment profile of a grid collection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProfileKey {
    /// Power-sum numerators over `G^t` of the values in `(0, 1/2]`.
    pub low: Vec<u128>,
    /// Power-sum numerators over `G^t` of the values in `(1/2, 1)`.
    pub high: Vec<u128>,
    pub ones: usize,
}

impl ProfileKey {
    pub fn of(grid: Grid, values: &[u64], d: usize) -> Result<Self> {
        let (low, high, ones) = split(grid, values)?;
        Ok(Self {
            low: power_sum_numerators(&low, d)?,
            high: power_sum_numerators(&high, d)?,
            ones,
        })
    }

    /// Floating-point view as a [`crate::MomentProfile`].
    pub fn to_profile(&self, grid: Grid) -> Result<crate::MomentProfile> {
        let conv = |v: &[u128]| -> Result<Vec<f64>> {
            v.iter()
                .enumerate()
                .map(|(t, &num)| Ok(num as f64 / grid.power_den(t + 1)? as f64))
                .collect()
        };
        Ok(crate::MomentProfile {
            d: self.low.len(),
            low: conv(&self.low)?,
            high: conv(&self.high)?,
            ones: self.ones,
        })
    }
}

/// Splits grid numerators into (low values, high values, count of ones).
pub fn split(grid: Grid, values: &[u64]) -> Result<(Vec<u64>, Vec<u64>, usize)> {
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut ones = 0;
    for &j in values {
        if j > grid.den {
            return Err(Error::input(format!("numerator {j} exceeds grid denominator {}", grid.den)));
        }
        if grid.is_low(j) {
            low.push(j);
        } else if grid.is_high(j) {
            high.push(j);
        } else if j == grid.den {
            ones += 1;
        }
    }
    Ok((low, high, ones))
}
