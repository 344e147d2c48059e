//! Sparse ε-cover of sums of `n` independent indicators.
//!
//! The cover has two parts. Heavy binomial forms are `ℓ` indicators with a
//! common expectation `q`, a multiple of `1/(kn)`, plus some deterministic
//! ones. Sparse forms are at most `k³` expectations on the `1/k²` grid on each
//! side of 1/2, plus deterministic ones, keeping a single representative per
//! exact moment profile.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{checked_pow, Grid, ProfileKey, Rational};
use crate::moments::{solve_moment_system, MomentSystem, SlotCounts};
use crate::pbd::{binomial_pmf, pbd_pmf, pmf_of, tv_of, IndicatorCollection};

/// Upper bound on candidate moment vectors scanned by [`build_cover`].
pub const DEFAULT_VECTOR_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum CoverElement {
    /// Grid expectations strictly between 0 and 1, plus `ones` certain indicators.
    Sparse { expectations: Vec<Rational>, ones: usize },
    /// `ℓ` indicators with expectation `q`, plus `ones` certain indicators.
    Binomial { ell: usize, q: Rational, ones: usize },
}

impl CoverElement {
    pub fn ones(&self) -> usize {
        match self {
            CoverElement::Sparse { ones, .. } | CoverElement::Binomial { ones, .. } => *ones,
        }
    }

    /// Number of indicators that are not identically zero.
    pub fn active(&self) -> usize {
        match self {
            CoverElement::Sparse { expectations, ones } => expectations.len() + ones,
            CoverElement::Binomial { ell, ones, .. } => ell + ones,
        }
    }

    /// The expectations of a collection of `n` indicators, padded with zeros.
    pub fn probabilities(&self, n: usize) -> Vec<f64> {
        let mut out = match self {
            CoverElement::Sparse { expectations, ones } => {
                let mut v: Vec<f64> = expectations.iter().map(|r| r.to_f64()).collect();
                v.extend(std::iter::repeat_n(1.0, *ones));
                v
            }
            CoverElement::Binomial { ell, q, ones } => {
                let mut v = vec![q.to_f64(); *ell];
                v.extend(std::iter::repeat_n(1.0, *ones));
                v
            }
        };
        out.resize(n.max(out.len()), 0.0);
        out
    }

    /// Exact distribution of the sum, over `{0..n}`.
    pub fn distribution(&self, n: usize) -> Vec<f64> {
        let mut pmf = match self {
            CoverElement::Sparse { .. } => pmf_of(&self.probabilities(0)),
            CoverElement::Binomial { ell, q, ones } => {
                let mut v = vec![0.0; *ones];
                v.extend(binomial_pmf(*ell, q.to_f64()));
                v
            }
        };
        pmf.resize(n + 1, 0.0);
        pmf
    }
}

fn check_params(n: usize, k: u64) -> Result<()> {
    if n < 1 {
        return Err(Error::input("n must be at least 1"));
    }
    if k < 2 {
        return Err(Error::input(format!("k = {k} must be at least 2")));
    }
    Ok(())
}

/// All `(ℓ, q = i/(kn), ones)` with `ℓq ≥ k² − 1/k` and
/// `ℓq(1−q) ≥ k² − k − 1 − 3/k`, checked in exact integer arithmetic.
pub fn enumerate_binomial_forms(n: usize, k: u64) -> Result<Vec<CoverElement>> {
    check_params(n, k)?;
    let kn = (k as i128) * n as i128;
    let k3 = (k as i128).pow(3);
    let (k1, k2) = (k as i128, (k as i128).pow(2));
    let mut out = Vec::new();
    for ell in 0..=n {
        let l = ell as i128;
        for i in 1..kn {
            let first = l * i >= (k3 - 1) * n as i128;
            let second = l * i * (kn - i) * k1 >= (k3 - k2 - k1 - 3) * kn * kn;
            if first && second {
                for ones in 0..=n - ell {
                    out.push(CoverElement::Binomial {
                        ell,
                        q: Rational {
                            num: i as u64,
                            den: kn as u64,
                        },
                        ones,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Realizable power-sum vectors of `count` values from one side of the grid,
/// each with its lexicographically smallest witness.
type SideTable = BTreeMap<Vec<u128>, Vec<u64>>;

/// Scans every on-lattice vector `(j_1..j_d)` with `j_t ∈ [count·lo^t,
/// count·hi^t]` and `j_{t+1} ≤ G·j_t`, keeping the realizable ones.
fn side_table(grid: Grid, high: bool, count: usize, d: usize, budget: &mut u128) -> Result<SideTable> {
    let (lo, hi) = if high {
        (grid.den() / 2 + 1, grid.den() - 1)
    } else {
        (1, grid.den() / 2)
    };
    let mut table = SideTable::new();
    if count == 0 {
        table.insert(vec![0; d], Vec::new());
        return Ok(table);
    }
    if lo > hi {
        return Ok(table);
    }
    let c = count as u128;
    let mut ranges = Vec::with_capacity(d);
    for t in 1..=d {
        ranges.push((c * checked_pow(lo, t)?, c * checked_pow(hi, t)?));
    }
    let values: Vec<u64> = (lo..=hi).collect();
    let g = grid.den() as u128;
    let mut cur: Vec<u128> = ranges.iter().map(|r| r.0).collect();
    loop {
        if *budget == 0 {
            return Err(Error::BudgetExceeded("cover enumeration exceeded its moment-vector cap".into()));
        }
        *budget -= 1;
        if cur.windows(2).all(|w| w[1] <= w[0] * g) {
            let zeros = vec![0; d];
            let (low_t, high_t, counts) = if high {
                (zeros, cur.clone(), SlotCounts { high: count, ..Default::default() })
            } else {
                (cur.clone(), zeros, SlotCounts { low: count, ..Default::default() })
            };
            let sys = MomentSystem::uniform(grid, low_t, high_t, counts, values.clone())?;
            if let Some(w) = solve_moment_system(&sys)? {
                table.insert(cur.clone(), w);
            }
        }
        // Odometer over the ranges, last coordinate fastest.
        let Some(pos) = (0..d).rev().find(|&p| cur[p] < ranges[p].1) else {
            return Ok(table);
        };
        cur[pos] += 1;
        for q in pos + 1..d {
            cur[q] = ranges[q].0;
        }
    }
}

/// Every realizable sparse moment profile with its witness element, in order
/// of (|L|, |R|, ones, low sums, high sums).
pub fn enumerate_sparse_profiles(n: usize, k: u64, d: usize) -> Result<Vec<(ProfileKey, CoverElement)>> {
    enumerate_sparse_profiles_capped(n, k, d, DEFAULT_VECTOR_CAP)
}

pub fn enumerate_sparse_profiles_capped(
    n: usize,
    k: u64,
    d: usize,
    vector_cap: u128,
) -> Result<Vec<(ProfileKey, CoverElement)>> {
    check_params(n, k)?;
    if d < 1 {
        return Err(Error::input("d must be at least 1"));
    }
    let grid = Grid::for_k(k)?;
    let max_side = usize::try_from(k.saturating_pow(3)).unwrap_or(usize::MAX).min(n);
    let mut budget = vector_cap;
    let mut low = Vec::with_capacity(max_side + 1);
    let mut high = Vec::with_capacity(max_side + 1);
    for count in 0..=max_side {
        low.push(side_table(grid, false, count, d, &mut budget)?);
        high.push(side_table(grid, true, count, d, &mut budget)?);
    }
    let den = grid.den();
    let mut out = Vec::new();
    for a in 0..=max_side {
        for b in 0..=max_side.min(n - a) {
            for ones in 0..=n - a - b {
                for (lk, lw) in &low[a] {
                    for (hk, hw) in &high[b] {
                        let key = ProfileKey {
                            low: lk.clone(),
                            high: hk.clone(),
                            ones,
                        };
                        let expectations = lw.iter().chain(hw).map(|&j| Rational { num: j, den }).collect();
                        out.push((key, CoverElement::Sparse { expectations, ones }));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCover", into = "RawCover")]
pub struct Cover {
    n: usize,
    k: u64,
    d: usize,
    elements: Vec<CoverElement>,
    profile_index: BTreeMap<ProfileKey, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawCover {
    n: usize,
    k: u64,
    d: usize,
    elements: Vec<CoverElement>,
}

impl TryFrom<RawCover> for Cover {
    type Error = Error;

    fn try_from(raw: RawCover) -> Result<Self> {
        check_params(raw.n, raw.k)?;
        let grid = Grid::for_k(raw.k)?;
        let mut profile_index = BTreeMap::new();
        for (idx, el) in raw.elements.iter().enumerate() {
            if el.active() > raw.n {
                return Err(Error::input(format!("cover element {idx} has more than n indicators")));
            }
            if let CoverElement::Sparse { expectations, ones } = el {
                let mut values = Vec::with_capacity(expectations.len() + ones);
                for r in expectations {
                    let j = r
                        .numerator_over(grid.den() as u128)
                        .filter(|&j| j > 0 && j < grid.den() as u128)
                        .ok_or_else(|| Error::input(format!("sparse expectation {}/{} is off the grid", r.num, r.den)))?;
                    values.push(j as u64);
                }
                values.extend(std::iter::repeat_n(grid.den(), *ones));
                let key = ProfileKey::of(grid, &values, raw.d)?;
                if profile_index.insert(key, idx).is_some() {
                    return Err(Error::input("two sparse cover elements share a moment profile"));
                }
            }
        }
        Ok(Cover {
            n: raw.n,
            k: raw.k,
            d: raw.d,
            elements: raw.elements,
            profile_index,
        })
    }
}

impl From<Cover> for RawCover {
    fn from(c: Cover) -> Self {
        RawCover {
            n: c.n,
            k: c.k,
            d: c.d,
            elements: c.elements,
        }
    }
}

impl Cover {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn elements(&self) -> &[CoverElement] {
        &self.elements
    }

    pub fn profile_index(&self) -> &BTreeMap<ProfileKey, usize> {
        &self.profile_index
    }

    pub fn sparse_count(&self) -> usize {
        self.profile_index.len()
    }

    pub fn binomial_count(&self) -> usize {
        self.elements.len() - self.profile_index.len()
    }

    /// The stored representative of a grid collection's moment profile.
    pub fn lookup(&self, key: &ProfileKey) -> Option<&CoverElement> {
        self.profile_index.get(key).map(|&i| &self.elements[i])
    }
}

pub fn build_cover(n: usize, k: u64, d: usize) -> Result<Cover> {
    build_cover_capped(n, k, d, DEFAULT_VECTOR_CAP)
}

/// Sparse forms (one per realizable profile) followed by the binomial forms.
pub fn build_cover_capped(n: usize, k: u64, d: usize, vector_cap: u128) -> Result<Cover> {
    let mut elements = Vec::new();
    let mut profile_index = BTreeMap::new();
    for (key, el) in enumerate_sparse_profiles_capped(n, k, d, vector_cap)? {
        if let std::collections::btree_map::Entry::Vacant(e) = profile_index.entry(key) {
            e.insert(elements.len());
            elements.push(el);
        }
    }
    elements.extend(enumerate_binomial_forms(n, k)?);
    Ok(Cover {
        n,
        k,
        d,
        elements,
        profile_index,
    })
}

/// `(k, d)` from ε with the same defaults as the Moment Search parameters.
pub fn cover_params_for_epsilon(epsilon: f64) -> Result<(u64, usize)> {
    let p = crate::search::structural_params(epsilon, 1.0, None, None)?;
    Ok((p.k, p.d))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverMatch {
    pub index: usize,
    pub element: CoverElement,
    pub tv: f64,
}

/// The element closest in total variation to the sum of `c` (lowest index on ties).
pub fn cover_check(cover: &Cover, c: &IndicatorCollection) -> Result<CoverMatch> {
    if cover.elements.is_empty() {
        return Err(Error::input("the cover is empty"));
    }
    if c.len() != cover.n {
        return Err(Error::DimensionMismatch {
            expected: cover.n,
            actual: c.len(),
        });
    }
    let target = pbd_pmf(c);
    let (index, tv) = cover
        .elements
        .par_iter()
        .enumerate()
        .map(|(i, el)| (i, tv_of(target.pmf(), &el.distribution(cover.n))))
        .reduce(|| (usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
    Ok(CoverMatch {
        index,
        element: cover.elements[index].clone(),
        tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sparse(nums: &[u64], den: u64, ones: usize) -> CoverElement {
        CoverElement::Sparse {
            expectations: nums.iter().map(|&num| Rational { num, den }).collect(),
            ones,
        }
    }

    #[test]
    fn binomial_form_examples() {
        let forms = enumerate_binomial_forms(4, 2).unwrap();
        assert_eq!(
            forms,
            vec![CoverElement::Binomial {
                ell: 4,
                q: Rational { num: 7, den: 8 },
                ones: 0
            }]
        );
        assert!(enumerate_binomial_forms(1, 2).unwrap().is_empty());
        for (n, k) in [(10, 2), (20, 2), (30, 3), (12, 4)] {
            let forms = enumerate_binomial_forms(n, k).unwrap();
            assert!(forms.len() <= (n + 1) * (n + 1) * n * k as usize);
        }
    }

    #[test]
    fn binomial_forms_match_float_scan() {
        for (n, k) in [(10usize, 2u64), (25, 2), (20, 3)] {
            let kf = k as f64;
            let mut count = 0;
            for ell in 0..=n {
                for i in 1..(k as usize * n) {
                    let q = i as f64 / (kf * n as f64);
                    let l = ell as f64;
                    if l * q >= kf * kf - 1.0 / kf - 1e-9 && l * q * (1.0 - q) >= kf * kf - kf - 1.0 - 3.0 / kf - 1e-9 {
                        count += n - ell + 1;
                    }
                }
            }
            assert_eq!(enumerate_binomial_forms(n, k).unwrap().len(), count);
        }
    }

    #[test]
    fn sparse_profile_examples() {
        let profiles = enumerate_sparse_profiles(2, 2, 1).unwrap();
        let key = ProfileKey {
            low: vec![1],
            high: vec![0],
            ones: 1,
        };
        let (_, el) = profiles.iter().find(|(k, _)| *k == key).unwrap();
        assert_eq!(*el, sparse(&[1], 4, 1));

        let profiles = enumerate_sparse_profiles(2, 2, 2).unwrap();
        let key = ProfileKey {
            low: vec![4, 8],
            high: vec![0, 0],
            ones: 0,
        };
        let (_, el) = profiles.iter().find(|(k, _)| *k == key).unwrap();
        assert_eq!(*el, sparse(&[2, 2], 4, 0));
        for (k, _) in &profiles {
            assert!(k.low.windows(2).all(|w| w[1] <= w[0] * 4));
        }
    }

    /// All grid collections of size `n`, grouped by exact profile.
    fn grid_profiles(n: usize, k: u64, d: usize) -> BTreeMap<ProfileKey, Vec<Vec<u64>>> {
        let grid = Grid::for_k(k).unwrap();
        let g = grid.den();
        let mut out: BTreeMap<ProfileKey, Vec<Vec<u64>>> = BTreeMap::new();
        let total = (g + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut v: Vec<u64> = (0..n)
                .map(|_| {
                    let j = c % (g + 1);
                    c /= g + 1;
                    j
                })
                .collect();
            v.sort_unstable();
            out.entry(ProfileKey::of(grid, &v, d).unwrap()).or_default().push(v);
        }
        out
    }

    #[test]
    fn cover_matches_direct_profile_grouping() {
        for (n, d) in [(2, 1), (2, 2), (3, 2)] {
            let cover = build_cover(n, 2, d).unwrap();
            let direct = grid_profiles(n, 2, d);
            assert_eq!(cover.binomial_count(), 0);
            assert_eq!(cover.sparse_count(), direct.len());
            for (key, members) in &direct {
                let el = cover.lookup(key).unwrap();
                let grid = Grid::for_k(2).unwrap();
                let witness_key = match el {
                    CoverElement::Sparse { expectations, ones } => {
                        let mut v: Vec<u64> = expectations.iter().map(|r| r.num).collect();
                        v.extend(std::iter::repeat_n(4, *ones));
                        ProfileKey::of(grid, &v, d).unwrap()
                    }
                    _ => unreachable!(),
                };
                assert_eq!(&witness_key, key);
                let _ = members;
            }
        }
    }

    #[test]
    fn cover_includes_binomial_form() {
        let cover = build_cover(4, 2, 1).unwrap();
        assert_eq!(cover.binomial_count(), 1);
        assert!(matches!(cover.elements().last(), Some(CoverElement::Binomial { ell: 4, .. })));
    }

    #[test]
    fn cover_check_examples() {
        let cover = build_cover(2, 2, 2).unwrap();
        let m = cover_check(&cover, &IndicatorCollection::new(vec![0.5, 0.5]).unwrap()).unwrap();
        assert_eq!(m.element, sparse(&[2, 2], 4, 0));
        assert_eq!(m.tv, 0.0);

        let c = IndicatorCollection::new(vec![0.3, 0.3]).unwrap();
        let m = cover_check(&cover, &c).unwrap();
        let best = cover
            .elements()
            .iter()
            .map(|el| tv_of(pbd_pmf(&c).pmf(), &el.distribution(2)))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(m.tv, best);

        let wrong = IndicatorCollection::new(vec![0.5]).unwrap();
        assert!(cover_check(&cover, &wrong).is_err());
    }

    #[test]
    fn cover_json_round_trip_and_dedup_rejection() {
        let cover = build_cover(2, 2, 2).unwrap();
        let s = serde_json::to_string(&cover).unwrap();
        assert!(s.contains("\"num\"") && s.contains("\"den\""));
        let back: Cover = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cover);

        let dup = r#"{"n":2,"k":2,"d":1,"elements":[
            {"form":"sparse","expectations":[{"num":1,"den":4},{"num":3,"den":4}],"ones":0},
            {"form":"sparse","expectations":[{"num":1,"den":4},{"num":3,"den":4}],"ones":0}]}"#;
        assert!(serde_json::from_str::<Cover>(dup).is_err());
    }

    #[test]
    fn cover_is_deterministic_and_capped() {
        assert_eq!(build_cover(3, 2, 2).unwrap(), build_cover(3, 2, 2).unwrap());
        assert!(build_cover_capped(4, 2, 2, 5).unwrap_err().is_resource());
    }
}
