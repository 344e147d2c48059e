//! Moment Search for two-strategy anonymous games.
//!
//! The search first tries profiles in which every mixing player uses the same
//! multiple of `1/(kn)` ([`case2_search`]). It then enumerates aggregate
//! guesses: how many players play 0, play 1, mix with probability in
//! `(0, 1/2]` and mix with probability in `(1/2, 1)`, together with the exact
//! power sums of the two groups of mixing probabilities on the `1/k²` grid.
//! For every guess, each player's permitted grid strategies are classified
//! against witness distributions realizing the guess ([`permitted_strategies`]),
//! and a dynamic program looks for an assignment of permitted strategies that
//! meets the guess exactly ([`assignment_dp`]).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{anonymous_regret, max_regret, player_regret_unchecked, AnonymousGame, AnonymousProfile, CountUtility};
use crate::grid::{power_sum_numerators, Grid};
use crate::moments::{solve_moment_system, MomentSystem, SlotCounts};
use crate::pbd::{binomial_pmf, pmf_of};

/// Additive slack on every floating-point threshold comparison.
pub const THRESHOLD_SLACK: f64 = 1e-9;

/// Upper bound on the multisets enumerated per mixing-group size.
const MULTISET_CAP: u128 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchParams {
    pub epsilon: f64,
    /// Probabilities are multiples of `1/k²`.
    pub k: u64,
    /// Number of matched power sums.
    pub d: usize,
    /// Constant used when `k` is derived from `ε`.
    pub c: f64,
    /// Return a candidate only after its regret is re-checked exactly.
    pub verify_output: bool,
}

impl SearchParams {
    pub fn new(epsilon: f64, k: u64, d: usize) -> Result<Self> {
        let p = Self {
            epsilon,
            k,
            d,
            c: 1.0,
            verify_output: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::input(format!("epsilon = {} must lie in (0, 1]", self.epsilon)));
        }
        if self.k < 2 {
            return Err(Error::input(format!("k = {} must be at least 2", self.k)));
        }
        if self.d < 1 {
            return Err(Error::input("d must be at least 1"));
        }
        if !(self.c > 0.0) {
            return Err(Error::input(format!("c = {} must be positive", self.c)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::for_k(self.k).expect("k validated")
    }

    /// `min(k³, n)`, the largest number of mixing players in a guess.
    pub fn max_mixers(&self, n: usize) -> usize {
        let cube = self.k.saturating_mul(self.k).saturating_mul(self.k);
        usize::try_from(cube).unwrap_or(usize::MAX).min(n)
    }
}

fn ceil_guarded(x: f64) -> f64 {
    (x - 1e-12).ceil()
}

/// `k = 2⌈c/ε⌉`, `d = ⌈3 log₂(320/ε)⌉`, unless overridden.
pub fn structural_params(epsilon: f64, c: f64, k: Option<u64>, d: Option<usize>) -> Result<SearchParams> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::input(format!("epsilon = {epsilon} must lie in (0, 1]")));
    }
    if !(c > 0.0) {
        return Err(Error::input(format!("c = {c} must be positive")));
    }
    let k = k.unwrap_or_else(|| 2 * ceil_guarded(c / epsilon) as u64);
    let d = d.unwrap_or_else(|| ceil_guarded(3.0 * (320.0 / epsilon).log2()) as usize);
    let p = SearchParams {
        epsilon,
        k,
        d,
        c,
        verify_output: true,
    };
    p.validate()?;
    Ok(p)
}

/// Counts of the four player groups plus the exact power sums of the mixing
/// probabilities, as numerators over `G^t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AggregateGuess {
    pub t0: usize,
    pub t1: usize,
    pub ts: usize,
    pub tb: usize,
    pub grid_den: u64,
    pub mu: Vec<u128>,
    pub mu_high: Vec<u128>,
}

impl AggregateGuess {
    /// The guess matching an actual grid profile (numerators over `grid`).
    pub fn of_profile(grid: Grid, values: &[u64], d: usize) -> Result<Self> {
        let key = crate::grid::ProfileKey::of(grid, values, d)?;
        Ok(Self {
            t0: values.iter().filter(|&&v| v == 0).count(),
            t1: key.ones,
            ts: values.iter().filter(|&&v| grid.is_low(v)).count(),
            tb: values.iter().filter(|&&v| grid.is_high(v)).count(),
            grid_den: grid.den(),
            mu: key.low,
            mu_high: key.high,
        })
    }

    pub fn n(&self) -> usize {
        self.t0 + self.t1 + self.ts + self.tb
    }

    pub fn depth(&self) -> usize {
        self.mu.len()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_den)
    }

    /// Checks counts, depth and the per-moment numerator ranges.
    pub fn validate(&self, n: usize, params: &SearchParams) -> Result<()> {
        let grid = params.grid();
        if self.grid_den != grid.den() {
            return Err(Error::input(format!(
                "guess grid 1/{} does not match k = {}",
                self.grid_den, params.k
            )));
        }
        if self.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.n(),
            });
        }
        if self.ts + self.tb > params.max_mixers(usize::MAX) {
            return Err(Error::input("more mixing players than k³"));
        }
        if self.mu.len() != params.d || self.mu_high.len() != params.d {
            return Err(Error::input("moment vectors must have length d"));
        }
        let g = grid.den();
        for t in 1..=params.d {
            let in_range = |v: u128, count: usize, lo: u64, hi: u64| -> Result<bool> {
                let c = count as u128;
                Ok(v >= c * crate::grid::checked_pow(lo, t)? && v <= c * crate::grid::checked_pow(hi, t)?)
            };
            if !in_range(self.mu[t - 1], self.ts, 1, g / 2)? || !in_range(self.mu_high[t - 1], self.tb, g / 2 + 1, g - 1)? {
                return Err(Error::input(format!("moment {t} of the guess is out of range")));
            }
        }
        Ok(())
    }
}

/// Permitted grid numerators per player. An empty `sets` marks a failed guess.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PermittedSets {
    pub grid_den: u64,
    pub sets: Vec<Vec<u64>>,
}

impl PermittedSets {
    pub fn is_fail(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn values(&self, i: usize) -> Vec<f64> {
        self.sets[i].iter().map(|&j| j as f64 / self.grid_den as f64).collect()
    }
}

fn count_utilities(game: &AnonymousGame) -> Result<&[CountUtility]> {
    game.count_utilities()
        .ok_or_else(|| Error::input("this operation needs a count-based anonymous game"))
}

/// Provides a lexicographically smallest multiset of `count` low (or high)
/// grid numerators with the given power sums.
trait WitnessSource {
    fn witness(&self, high: bool, count: usize, targets: &[u128]) -> Result<Option<Vec<u64>>>;
}

/// Solves each query with the moment-system DP.
struct SolverWitnesses {
    grid: Grid,
}

impl WitnessSource for SolverWitnesses {
    fn witness(&self, high: bool, count: usize, targets: &[u128]) -> Result<Option<Vec<u64>>> {
        let zeros = vec![0; targets.len()];
        let (values, low_t, high_t, counts) = if high {
            let c = SlotCounts {
                high: count,
                ..Default::default()
            };
            (self.grid.high_values().collect(), zeros, targets.to_vec(), c)
        } else {
            let c = SlotCounts {
                low: count,
                ..Default::default()
            };
            (self.grid.low_values().collect(), targets.to_vec(), zeros, c)
        };
        solve_moment_system(&MomentSystem::uniform(self.grid, low_t, high_t, counts, values)?)
    }
}

/// Every realizable power-sum vector for each group size, with its
/// lexicographically smallest multiset.
struct WitnessTables {
    low: Vec<BTreeMap<Vec<u128>, Vec<u64>>>,
    high: Vec<BTreeMap<Vec<u128>, Vec<u64>>>,
}

impl WitnessTables {
    fn build(grid: Grid, d: usize, max_count: usize) -> Result<Self> {
        let low_vals: Vec<u64> = grid.low_values().collect();
        let high_vals: Vec<u64> = grid.high_values().collect();
        let table = |vals: &[u64]| -> Result<Vec<BTreeMap<Vec<u128>, Vec<u64>>>> {
            (0..=max_count).map(|c| realizable_sums(vals, c, d)).collect()
        };
        Ok(Self {
            low: table(&low_vals)?,
            high: table(&high_vals)?,
        })
    }
}

impl WitnessSource for WitnessTables {
    fn witness(&self, high: bool, count: usize, targets: &[u128]) -> Result<Option<Vec<u64>>> {
        let tables = if high { &self.high } else { &self.low };
        Ok(tables.get(count).and_then(|t| t.get(targets)).cloned())
    }
}

fn multiset_count(values: usize, size: usize) -> u128 {
    // C(values + size - 1, size), saturating.
    let mut acc: u128 = 1;
    for i in 0..size as u128 {
        acc = acc.saturating_mul(values as u128 + i) / (i + 1);
        if acc > MULTISET_CAP * 16 {
            return acc;
        }
    }
    acc
}

/// Power sums of all size-`count` multisets of `values`, keyed to the first
/// multiset (in lexicographic order of sorted sequences) realizing them.
fn realizable_sums(values: &[u64], count: usize, d: usize) -> Result<BTreeMap<Vec<u128>, Vec<u64>>> {
    let mut out = BTreeMap::new();
    if count == 0 {
        out.insert(vec![0; d], Vec::new());
        return Ok(out);
    }
    if values.is_empty() {
        return Ok(out);
    }
    let total = multiset_count(values.len(), count);
    if total > MULTISET_CAP {
        return Err(Error::BudgetExceeded(format!(
            "{total} multisets of size {count} exceed the cap of {MULTISET_CAP}"
        )));
    }
    let mut idx = vec![0usize; count];
    loop {
        let ms: Vec<u64> = idx.iter().map(|&i| values[i]).collect();
        out.entry(power_sum_numerators(&ms, d)?).or_insert(ms);
        let Some(pos) = (0..count).rev().find(|&p| idx[p] + 1 < values.len()) else {
            return Ok(out);
        };
        let next = idx[pos] + 1;
        idx[pos..].iter_mut().for_each(|v| *v = next);
    }
}

fn sub_power(targets: &[u128], v: u64) -> Option<Vec<u128>> {
    let mut pow = 1u128;
    targets
        .iter()
        .map(|t| {
            pow = pow.checked_mul(v as u128)?;
            t.checked_sub(pow)
        })
        .collect()
}

/// Candidate numerator with the distribution of the others' count it implies.
struct Candidate {
    value: u64,
    others: Vec<f64>,
}

/// Witness-based distributions of the others' count for every candidate
/// strategy a player could take under `guess`. `None` means the guess itself
/// is unrealizable.
fn candidate_distributions(guess: &AggregateGuess, source: &impl WitnessSource) -> Result<Option<Vec<Candidate>>> {
    let grid = guess.grid()?;
    let g = grid.den() as f64;
    let Some(low_w) = source.witness(false, guess.ts, &guess.mu)? else {
        return Ok(None);
    };
    let Some(high_w) = source.witness(true, guess.tb, &guess.mu_high)? else {
        return Ok(None);
    };
    let dist = |low: &[u64], high: &[u64], ones: usize| -> Vec<f64> {
        let mut probs: Vec<f64> = low.iter().chain(high).map(|&j| j as f64 / g).collect();
        probs.extend(std::iter::repeat_n(1.0, ones));
        pmf_of(&probs)
    };
    let mut out = Vec::new();
    if guess.t0 >= 1 {
        out.push(Candidate {
            value: 0,
            others: dist(&low_w, &high_w, guess.t1),
        });
    }
    if guess.ts >= 1 {
        for v in grid.low_values() {
            let Some(res) = sub_power(&guess.mu, v) else { continue };
            if let Some(w) = source.witness(false, guess.ts - 1, &res)? {
                out.push(Candidate {
                    value: v,
                    others: dist(&w, &high_w, guess.t1),
                });
            }
        }
    }
    if guess.tb >= 1 {
        for v in grid.high_values() {
            let Some(res) = sub_power(&guess.mu_high, v) else { continue };
            if let Some(w) = source.witness(true, guess.tb - 1, &res)? {
                out.push(Candidate {
                    value: v,
                    others: dist(&low_w, &w, guess.t1),
                });
            }
        }
    }
    if guess.t1 >= 1 {
        out.push(Candidate {
            value: grid.den(),
            others: dist(&low_w, &high_w, guess.t1 - 1),
        });
    }
    Ok(Some(out))
}

fn classify(
    utilities: &[CountUtility],
    guess: &AggregateGuess,
    epsilon: f64,
    source: &impl WitnessSource,
) -> Result<PermittedSets> {
    let grid_den = guess.grid_den;
    let Some(candidates) = candidate_distributions(guess, source)? else {
        return Ok(PermittedSets {
            grid_den,
            sets: Vec::new(),
        });
    };
    let threshold = 0.75 * epsilon + THRESHOLD_SLACK;
    let sets = utilities
        .iter()
        .map(|u| {
            candidates
                .iter()
                .filter(|c| {
                    let (u0, u1) = u.expected(&c.others);
                    if c.value == 0 {
                        u0 >= u1 - threshold
                    } else if c.value == grid_den {
                        u1 >= u0 - threshold
                    } else {
                        (u0 - u1).abs() <= threshold
                    }
                })
                .map(|c| c.value)
                .collect()
        })
        .collect();
    Ok(PermittedSets { grid_den, sets })
}

/// Permitted strategies of every player for one aggregate guess.
pub fn permitted_strategies(
    game: &AnonymousGame,
    guess: &AggregateGuess,
    params: &SearchParams,
) -> Result<PermittedSets> {
    params.validate()?;
    guess.validate(game.n(), params)?;
    let utilities = count_utilities(game)?;
    classify(utilities, guess, params.epsilon, &SolverWitnesses { grid: params.grid() })
}

/// An assignment `v_i ∈ S_i` meeting the guess's counts and power sums exactly.
pub fn assignment_dp(sets: &PermittedSets, guess: &AggregateGuess) -> Result<Option<AnonymousProfile>> {
    if sets.is_fail() || sets.sets.iter().any(Vec::is_empty) {
        return Ok(None);
    }
    if sets.grid_den != guess.grid_den {
        return Err(Error::input("permitted sets and guess use different grids"));
    }
    let grid = guess.grid()?;
    let counts = SlotCounts {
        zeros: guess.t0,
        ones: guess.t1,
        low: guess.ts,
        high: guess.tb,
    };
    if counts.total() != sets.sets.len() {
        return Err(Error::DimensionMismatch {
            expected: sets.sets.len(),
            actual: counts.total(),
        });
    }
    let sys = MomentSystem::new(grid, guess.mu.clone(), guess.mu_high.clone(), counts, sets.sets.clone())?;
    Ok(match solve_moment_system(&sys)? {
        Some(values) => Some(AnonymousProfile::new(values.iter().map(|&j| grid.value(j)).collect())?),
        None => None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchSource {
    /// All mixing players share one multiple of `1/(kn)`.
    SingleProbability,
    /// Found through an aggregate moment guess.
    MomentGuess,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub profile: AnonymousProfile,
    pub max_regret: f64,
    pub source: SearchSource,
    pub guess: Option<AggregateGuess>,
}

/// Runs the single-probability search, then the aggregate guesses in order of
/// increasing number of mixing players, and returns the first success.
pub fn moment_search(game: &AnonymousGame, params: &SearchParams) -> Result<Option<SearchOutcome>> {
    params.validate()?;
    let utilities = count_utilities(game)?;
    let n = game.n();
    let eps = params.epsilon;

    let accept = |profile: &AnonymousProfile| -> Result<Option<f64>> {
        let r = max_regret(&anonymous_regret(game, profile)?);
        Ok((!params.verify_output || r <= eps).then_some(r))
    };

    if let Some(profile) = case2_search(game, params.k, eps)? {
        if let Some(max_regret) = accept(&profile)? {
            return Ok(Some(SearchOutcome {
                profile,
                max_regret,
                source: SearchSource::SingleProbability,
                guess: None,
            }));
        }
    }

    let grid = params.grid();
    let max_mixers = params.max_mixers(n);
    let tables = WitnessTables::build(grid, params.d, max_mixers)?;

    for mixers in 0..=max_mixers {
        for ts in 0..=mixers {
            let tb = mixers - ts;
            let lows: Vec<&Vec<u128>> = tables.low[ts].keys().collect();
            let highs: Vec<&Vec<u128>> = tables.high[tb].keys().collect();
            for t0 in 0..=n - mixers {
                let t1 = n - mixers - t0;
                let found = (0..lows.len() * highs.len()).into_par_iter().find_map_first(|idx| {
                    let guess = AggregateGuess {
                        t0,
                        t1,
                        ts,
                        tb,
                        grid_den: grid.den(),
                        mu: lows[idx / highs.len()].clone(),
                        mu_high: highs[idx % highs.len()].clone(),
                    };
                    let attempt = || -> Result<Option<SearchOutcome>> {
                        let sets = classify(utilities, &guess, eps, &tables)?;
                        let Some(profile) = assignment_dp(&sets, &guess)? else {
                            return Ok(None);
                        };
                        Ok(accept(&profile)?.map(|max_regret| SearchOutcome {
                            profile,
                            max_regret,
                            source: SearchSource::MomentGuess,
                            guess: Some(guess.clone()),
                        }))
                    };
                    attempt().transpose()
                });
                if let Some(result) = found {
                    return result.map(Some);
                }
            }
        }
    }
    Ok(None)
}

const SLOT_ZERO: usize = 0;
const SLOT_MIXED: usize = 1;
const SLOT_ONE: usize = 2;

/// Profiles in which every mixing player uses the same `q = i/(kn)`.
///
/// For each split `(t0, t1, t)` and each `q`, a player may take a slot when
/// its exact regret there (against the others' count implied by the remaining
/// slots) is at most ε. A permitted assignment filling all slots exists iff
/// Hall's condition holds over the subsets of the three slots.
pub fn case2_search(game: &AnonymousGame, k: u64, epsilon: f64) -> Result<Option<AnonymousProfile>> {
    let utilities = count_utilities(game)?;
    if k < 1 {
        return Err(Error::input("k must be at least 1"));
    }
    let n = game.n();
    let steps = (k as usize).saturating_mul(n);
    let threshold = epsilon + THRESHOLD_SLACK;
    for t0 in 0..=n {
        for t1 in 0..=n - t0 {
            let t = n - t0 - t1;
            let qs: Vec<usize> = if t == 0 { vec![1] } else { (1..steps).collect() };
            for i in qs {
                let q = i as f64 / steps as f64;
                let caps = [t0, t, t1];
                let shifted = |ones: usize, mixers: usize| -> Vec<f64> {
                    let mut v = vec![0.0; ones];
                    v.extend(binomial_pmf(mixers, q));
                    v
                };
                let others = [
                    (t0 > 0).then(|| shifted(t1, t)),
                    (t > 0).then(|| shifted(t1, t - 1)),
                    (t1 > 0).then(|| shifted(t1 - 1, t)),
                ];
                let masks: Vec<u8> = utilities
                    .iter()
                    .map(|u| {
                        let mut mask = 0u8;
                        for (slot, dist) in others.iter().enumerate() {
                            let Some(dist) = dist else { continue };
                            let (u0, u1) = u.expected(dist);
                            let ok = match slot {
                                SLOT_ZERO => u1 - u0 <= threshold,
                                SLOT_ONE => u0 - u1 <= threshold,
                                _ => (u1 - u0).abs() <= threshold,
                            };
                            if ok {
                                mask |= 1 << slot;
                            }
                        }
                        mask
                    })
                    .collect();
                if !hall_condition(&masks, caps) {
                    continue;
                }
                let slots = fill_slots(&masks, caps)
                    .ok_or_else(|| Error::Internal("slot assignment disagrees with Hall's condition".into()))?;
                let q_of = |s: usize| match s {
                    SLOT_ZERO => 0.0,
                    SLOT_MIXED => q,
                    _ => 1.0,
                };
                return Ok(Some(AnonymousProfile::new(slots.into_iter().map(q_of).collect())?));
            }
        }
    }
    Ok(None)
}

/// For every set `X` of slots, the players confined to `X` fit in `X`.
fn hall_condition(masks: &[u8], caps: [usize; 3]) -> bool {
    (0u8..8).all(|x| {
        let confined = masks.iter().filter(|&&m| m & !x == 0).count();
        let capacity: usize = (0..3).filter(|s| x & (1 << s) != 0).map(|s| caps[s]).sum();
        confined <= capacity
    })
}

/// Augmenting-path assignment of players to slots with capacities.
fn fill_slots(masks: &[u8], caps: [usize; 3]) -> Option<Vec<usize>> {
    let mut members: [Vec<usize>; 3] = Default::default();
    let mut slot_of = vec![usize::MAX; masks.len()];

    fn augment(
        p: usize,
        masks: &[u8],
        caps: &[usize; 3],
        members: &mut [Vec<usize>; 3],
        slot_of: &mut [usize],
        seen: &mut [bool; 3],
    ) -> bool {
        for s in 0..3 {
            if masks[p] & (1 << s) == 0 || seen[s] {
                continue;
            }
            seen[s] = true;
            if members[s].len() < caps[s] {
                members[s].push(p);
                slot_of[p] = s;
                return true;
            }
            for idx in 0..members[s].len() {
                let other = members[s][idx];
                if augment(other, masks, caps, members, slot_of, seen) {
                    // `other` moved elsewhere; take its place.
                    members[s][idx] = p;
                    slot_of[p] = s;
                    return true;
                }
            }
        }
        false
    }

    for p in 0..masks.len() {
        let mut seen = [false; 3];
        if !augment(p, masks, &caps, &mut members, &mut slot_of, &mut seen) {
            return None;
        }
    }
    Some(slot_of)
}

/// Limits on the exhaustive grid oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceBudget {
    pub max_players: usize,
    pub max_grid: u64,
}

impl Default for BruteForceBudget {
    fn default() -> Self {
        Self {
            max_players: 6,
            max_grid: 16,
        }
    }
}

/// Every profile on the `1/grid_den` grid whose maximum regret is at most ε.
pub fn brute_force_grid_nash(game: &AnonymousGame, grid_den: u64, epsilon: f64) -> Result<Vec<AnonymousProfile>> {
    brute_force_grid_nash_with_budget(game, grid_den, epsilon, BruteForceBudget::default())
}

pub fn brute_force_grid_nash_with_budget(
    game: &AnonymousGame,
    grid_den: u64,
    epsilon: f64,
    budget: BruteForceBudget,
) -> Result<Vec<AnonymousProfile>> {
    let n = game.n();
    if grid_den < 1 {
        return Err(Error::input("grid denominator must be at least 1"));
    }
    if n > budget.max_players || grid_den > budget.max_grid {
        return Err(Error::BudgetExceeded(format!(
            "grid oracle limited to n <= {} and grid <= {} (got n = {n}, grid = {grid_den})",
            budget.max_players, budget.max_grid
        )));
    }
    let base = grid_den + 1;
    let total = base
        .checked_pow(n as u32)
        .ok_or_else(|| Error::BudgetExceeded("profile count overflows".into()))?;
    let found = (0..total)
        .into_par_iter()
        .filter_map(|code| {
            let mut c = code;
            let q: Vec<f64> = (0..n)
                .map(|_| {
                    let j = c % base;
                    c /= base;
                    j as f64 / grid_den as f64
                })
                .collect();
            (0..n)
                .all(|i| player_regret_unchecked(game, &q, i) <= epsilon)
                .then_some(q)
        })
        .collect::<Vec<_>>();
    found.into_iter().map(AnonymousProfile::new).collect()
}

/// Number of players with `q_i ∉ {0, 1}`.
pub fn mixer_count(profile: &AnonymousProfile) -> usize {
    profile.q().iter().filter(|&&q| q > 0.0 && q < 1.0).count()
}
