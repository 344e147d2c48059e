//! Oblivious solvers for bimatrix games.
//!
//! In a game with at most `k` nonzero payoffs per row and column, the uniform
//! pair is a `2k/n`-equilibrium. For games with an equilibrium of small
//! probabilities, uniform distributions over random multisets of size
//! `⌈16 ln n / ε²⌉` hit an ε-equilibrium with non-negligible probability.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{bimatrix_regret_with, BimatrixGame, MixedPair, RegretMode};

/// Identifier of the generator behind every seeded stream in this module.
pub const RNG_NAME: &str = "ChaCha8";

/// Smallest `k` such that every row and column of `R` and `C` has at most
/// `k` nonzero entries.
pub fn sparsity(game: &BimatrixGame) -> usize {
    let n = game.n();
    let mut k = 0;
    for m in [game.row_matrix(), game.col_matrix()] {
        for i in 0..n {
            let row = m[i].iter().filter(|v| **v != 0.0).count();
            let col = (0..n).filter(|&r| m[r][i] != 0.0).count();
            k = k.max(row).max(col);
        }
    }
    k
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseSolution {
    pub pair: MixedPair,
    pub sparsity: usize,
    /// `2k/n`, an upper bound on the well-supported regret of `pair`.
    pub regret_bound: f64,
}

/// The uniform pair with its certified regret bound.
pub fn solve_sparse(game: &BimatrixGame) -> SparseSolution {
    let k = sparsity(game);
    SparseSolution {
        pair: MixedPair::uniform(game.n()),
        sparsity: k,
        regret_bound: 2.0 * k as f64 / game.n() as f64,
    }
}

/// `⌈16 ln n / ε²⌉`.
pub fn lmm_sample_count(n: usize, epsilon: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::input(format!("n = {n} must be at least 2")));
    }
    check_epsilon(epsilon)?;
    Ok((16.0 * (n as f64).ln() / (epsilon * epsilon)).ceil() as usize)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::input(format!("epsilon = {epsilon} must lie in (0, 1]")));
    }
    Ok(())
}

/// Ordered sample of strategy indices, repetitions allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiset {
    items: Vec<usize>,
}

impl Multiset {
    pub fn new(items: Vec<usize>, n: usize) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::input("a multiset needs at least one item"));
        }
        if let Some(i) = items.iter().find(|&&i| i >= n) {
            return Err(Error::input(format!("item {i} out of range for n = {n}")));
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    /// Uniform distribution over the items, as a vector of length `n`.
    pub fn to_distribution(&self, n: usize) -> Vec<f64> {
        let mut counts = vec![0usize; n];
        for &i in &self.items {
            counts[i] += 1;
        }
        let t = self.items.len() as f64;
        counts.into_iter().map(|c| c as f64 / t).collect()
    }
}

/// Two independent multisets of `t` uniform draws from `0..n`.
pub fn sample_multiset_pair(n: usize, t: usize, rng: &mut impl Rng) -> Result<(Multiset, Multiset)> {
    if n == 0 || t == 0 {
        return Err(Error::input("n and t must be at least 1"));
    }
    let mut draw = || (0..t).map(|_| rng.random_range(0..n)).collect::<Vec<_>>();
    let a = draw();
    let b = draw();
    Ok((Multiset { items: a }, Multiset { items: b }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    pub mode: RegretMode,
    /// Stop at the first success instead of running all trials.
    pub stop_at_first: bool,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            mode: RegretMode::WellSupported,
            stop_at_first: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerReport {
    pub trials: usize,
    pub successes: usize,
    pub first_success: Option<MixedPair>,
    /// Zero-based trial index of `first_success`.
    pub first_success_trial: Option<usize>,
    /// Multiset size.
    pub t: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub rng: &'static str,
}

/// Samples uniform pairs over random multisets until one is an ε-equilibrium.
///
/// The sampled pairs depend only on `(n, ε, seed)`; the game is consulted
/// only to test candidates.
pub fn oblivious_sampler(
    game: &BimatrixGame,
    epsilon: f64,
    max_trials: usize,
    seed: u64,
    options: SamplerOptions,
) -> Result<SamplerReport> {
    if max_trials == 0 {
        return Err(Error::input("max_trials must be at least 1"));
    }
    let n = game.n();
    let t = if n < 2 {
        check_epsilon(epsilon)?;
        1
    } else {
        lmm_sample_count(n, epsilon)?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SamplerReport {
        trials: 0,
        successes: 0,
        first_success: None,
        first_success_trial: None,
        t,
        epsilon,
        seed,
        rng: RNG_NAME,
    };
    for trial in 0..max_trials {
        let (a, b) = sample_multiset_pair(n, t, &mut rng)?;
        let pair = MixedPair::new(a.to_distribution(n), b.to_distribution(n))?;
        let (r, c) = bimatrix_regret_with(game, &pair, options.mode)?;
        report.trials += 1;
        if r.max(c) <= epsilon {
            report.successes += 1;
            if report.first_success.is_none() {
                report.first_success = Some(pair);
                report.first_success_trial = Some(trial);
            }
            if options.stop_at_first {
                break;
            }
        }
    }
    Ok(report)
}

/// Uniform distributions over `t` independent draws from `x` and from `y`.
pub fn sample_from_equilibrium(pair: &MixedPair, t: usize, rng: &mut impl Rng) -> Result<MixedPair> {
    if t == 0 {
        return Err(Error::input("t must be at least 1"));
    }
    let mut side = |p: &[f64]| -> Result<Vec<f64>> {
        let dist = WeightedIndex::new(p).map_err(|e| Error::input(format!("invalid strategy: {e}")))?;
        let items = (0..t).map(|_| dist.sample(rng)).collect();
        Ok(Multiset { items }.to_distribution(p.len()))
    };
    let x = side(pair.x())?;
    let y = side(pair.y())?;
    MixedPair::new(x, y)
}

/// Largest payoff deviation caused by replacing `reference` with `sampled`:
/// `max_i |e_iᵀ R Y − e_iᵀ R y|` and `max_j |Xᵀ C e_j − xᵀ C e_j|`.
pub fn payoff_deviation(game: &BimatrixGame, reference: &MixedPair, sampled: &MixedPair) -> (f64, f64) {
    let dev = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    (
        dev(game.row_payoffs(sampled.y()), game.row_payoffs(reference.y())),
        dev(game.col_payoffs(sampled.x()), game.col_payoffs(reference.x())),
    )
}
