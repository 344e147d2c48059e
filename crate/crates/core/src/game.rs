//! Game representations, mixed profiles and exact regret.
//!
//! Regret is the well-supported notion by default: every pure strategy played
//! with probability above [`SUPPORT_TOL`] must be within ε of a best response.
//! The weaker expected-payoff notion is available through [`RegretMode`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hard::GpGame;
use crate::pbd::{pmf_of, CountDistribution};
use crate::SUPPORT_TOL;

/// Tolerance on the total mass of a mixed strategy.
const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegretMode {
    /// Worst supported pure strategy against the best response.
    #[default]
    WellSupported,
    /// Expected payoff of the mixed strategy against the best response.
    Expected,
}

fn check_payoff(v: f64, what: &str) -> Result<()> {
    if !(-1.0..=1.0).contains(&v) {
        return Err(Error::input(format!("{what} payoff {v} is outside [-1, 1]")));
    }
    Ok(())
}

fn check_distribution(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::input(format!("{what} is empty")));
    }
    if let Some(p) = v.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::input(format!("{what} has invalid entry {p}")));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::input(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

/// Two-player game with `n` strategies per player and payoffs in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBimatrix", into = "RawBimatrix")]
pub struct BimatrixGame {
    n: usize,
    row: Vec<f64>,
    col: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBimatrix {
    n: usize,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
}

impl TryFrom<RawBimatrix> for BimatrixGame {
    type Error = Error;

    fn try_from(raw: RawBimatrix) -> Result<Self> {
        let game = BimatrixGame::new(raw.r, raw.c)?;
        if game.n != raw.n {
            return Err(Error::DimensionMismatch {
                expected: raw.n,
                actual: game.n,
            });
        }
        Ok(game)
    }
}

impl From<BimatrixGame> for RawBimatrix {
    fn from(g: BimatrixGame) -> Self {
        let rows = |m: &[f64]| m.chunks(g.n).map(<[f64]>::to_vec).collect();
        RawBimatrix {
            n: g.n,
            r: rows(&g.row),
            c: rows(&g.col),
        }
    }
}

impl BimatrixGame {
    pub fn new(r: Vec<Vec<f64>>, c: Vec<Vec<f64>>) -> Result<Self> {
        let n = r.len();
        if n == 0 {
            return Err(Error::input("a bimatrix game needs at least one strategy"));
        }
        if c.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: c.len(),
            });
        }
        let mut row = Vec::with_capacity(n * n);
        let mut col = Vec::with_capacity(n * n);
        for (rr, cr) in r.iter().zip(&c) {
            for len in [rr.len(), cr.len()] {
                if len != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: len,
                    });
                }
            }
            row.extend_from_slice(rr);
            col.extend_from_slice(cr);
        }
        for &v in &row {
            check_payoff(v, "row")?;
        }
        for &v in &col {
            check_payoff(v, "column")?;
        }
        Ok(Self { n, row, col })
    }

    /// Builds an `n × n` game entrywise from `f(i, j) = (R_ij, C_ij)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> (f64, f64)) -> Result<Self> {
        let mut r = vec![vec![0.0; n]; n];
        let mut c = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                (r[i][j], c[i][j]) = f(i, j);
            }
        }
        Self::new(r, c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.row[i * self.n + j]
    }

    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.col[i * self.n + j]
    }

    pub fn row_matrix(&self) -> Vec<Vec<f64>> {
        self.row.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn col_matrix(&self) -> Vec<Vec<f64>> {
        self.col.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Payoff `e_iᵀ R y` of every row strategy.
    pub fn row_payoffs(&self, y: &[f64]) -> Vec<f64> {
        self.row
            .chunks(self.n)
            .map(|r| r.iter().zip(y).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Payoff `xᵀ C e_j` of every column strategy.
    pub fn col_payoffs(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (xi, c) in x.iter().zip(self.col.chunks(self.n)) {
            if *xi != 0.0 {
                for (o, v) in out.iter_mut().zip(c) {
                    *o += xi * v;
                }
            }
        }
        out
    }
}

/// Pair of mixed strategies `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair")]
pub struct MixedPair {
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPair {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TryFrom<RawPair> for MixedPair {
    type Error = Error;

    fn try_from(raw: RawPair) -> Result<Self> {
        MixedPair::new(raw.x, raw.y)
    }
}

impl MixedPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_distribution(&x, "row strategy")?;
        check_distribution(&y, "column strategy")?;
        Ok(Self { x, y })
    }

    pub fn uniform(n: usize) -> Self {
        let u = vec![1.0 / n as f64; n];
        Self { x: u.clone(), y: u }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

fn side_regret(payoffs: &[f64], strategy: &[f64], mode: RegretMode) -> f64 {
    let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let regret = match mode {
        RegretMode::WellSupported => payoffs
            .iter()
            .zip(strategy)
            .filter(|(_, p)| **p > SUPPORT_TOL)
            .map(|(u, _)| best - u)
            .fold(0.0, f64::max),
        RegretMode::Expected => best - payoffs.iter().zip(strategy).map(|(u, p)| u * p).sum::<f64>(),
    };
    regret.max(0.0)
}

/// Well-supported regret of the row and column player.
pub fn bimatrix_regret(game: &BimatrixGame, pair: &MixedPair) -> Result<(f64, f64)> {
    bimatrix_regret_with(game, pair, RegretMode::WellSupported)
}

pub fn bimatrix_regret_with(game: &BimatrixGame, pair: &MixedPair, mode: RegretMode) -> Result<(f64, f64)> {
    for len in [pair.x.len(), pair.y.len()] {
        if len != game.n {
            return Err(Error::DimensionMismatch {
                expected: game.n,
                actual: len,
            });
        }
    }
    let row = side_regret(&game.row_payoffs(&pair.y), &pair.x, mode);
    let col = side_regret(&game.col_payoffs(&pair.x), &pair.y, mode);
    Ok((row, col))
}

/// `u_i(s, k)` for one player, `k` = number of other players playing 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountUtility {
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
}

impl CountUtility {
    pub fn get(&self, strategy: u8, k: usize) -> f64 {
        if strategy == 0 {
            self.u0[k]
        } else {
            self.u1[k]
        }
    }

    /// `(E u(0, K), E u(1, K))` for a distribution of `K`.
    pub fn expected(&self, others: &[f64]) -> (f64, f64) {
        let e = |u: &[f64]| others.iter().zip(u).map(|(p, v)| p * v).sum::<f64>();
        (e(&self.u0), e(&self.u1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payoffs {
    /// Utilities depend only on the player's own strategy and the count of
    /// other players playing 1.
    Counts(Vec<CountUtility>),
    /// The three-type prescribed-equilibrium construction, whose type-A
    /// utilities also depend on which of the two singleton players play 1.
    ThreeType(GpGame),
}

/// `n`-player game with strategies `{0, 1}` and utilities in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAnonymous", into = "RawAnonymous")]
pub struct AnonymousGame {
    n: usize,
    payoffs: Payoffs,
}

#[derive(Serialize, Deserialize)]
struct RawAnonymous {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u: Option<Vec<CountUtility>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gp: Option<GpGame>,
}

impl TryFrom<RawAnonymous> for AnonymousGame {
    type Error = Error;

    fn try_from(raw: RawAnonymous) -> Result<Self> {
        let game = match (raw.u, raw.gp) {
            (Some(u), None) => AnonymousGame::new(u)?,
            (None, Some(gp)) => AnonymousGame::three_type(GpGame::new(gp.k(), gp.delta(), gp.p().to_vec())?),
            _ => return Err(Error::input("anonymous game needs exactly one of \"u\" or \"gp\"")),
        };
        if game.n != raw.n {
            return Err(Error::DimensionMismatch {
                expected: raw.n,
                actual: game.n,
            });
        }
        Ok(game)
    }
}

impl From<AnonymousGame> for RawAnonymous {
    fn from(g: AnonymousGame) -> Self {
        let n = g.n;
        match g.payoffs {
            Payoffs::Counts(u) => RawAnonymous { n, u: Some(u), gp: None },
            Payoffs::ThreeType(gp) => RawAnonymous { n, u: None, gp: Some(gp) },
        }
    }
}

impl AnonymousGame {
    pub fn new(utilities: Vec<CountUtility>) -> Result<Self> {
        let n = utilities.len();
        if n == 0 {
            return Err(Error::input("an anonymous game needs at least one player"));
        }
        for (i, u) in utilities.iter().enumerate() {
            for len in [u.u0.len(), u.u1.len()] {
                if len != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: len,
                    });
                }
            }
            for &v in u.u0.iter().chain(&u.u1) {
                check_payoff(v, &format!("player {i}"))?;
            }
        }
        Ok(Self {
            n,
            payoffs: Payoffs::Counts(utilities),
        })
    }

    /// Builds a count-based game from `f(i, s, k) = u_i(s, k)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, u8, usize) -> f64) -> Result<Self> {
        let utilities = (0..n)
            .map(|i| CountUtility {
                u0: (0..n).map(|k| f(i, 0, k)).collect(),
                u1: (0..n).map(|k| f(i, 1, k)).collect(),
            })
            .collect();
        Self::new(utilities)
    }

    pub fn three_type(gp: GpGame) -> Self {
        Self {
            n: gp.player_count(),
            payoffs: Payoffs::ThreeType(gp),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn payoffs(&self) -> &Payoffs {
        &self.payoffs
    }

    /// Per-player count utilities, or `None` for the three-type family.
    pub fn count_utilities(&self) -> Option<&[CountUtility]> {
        match &self.payoffs {
            Payoffs::Counts(u) => Some(u),
            Payoffs::ThreeType(_) => None,
        }
    }

    /// Exact `(E u_i(0, ·), E u_i(1, ·))` when the others play `profile`.
    pub fn expected_utilities(&self, profile: &AnonymousProfile, i: usize) -> Result<(f64, f64)> {
        self.check_profile(profile)?;
        if i >= self.n {
            return Err(Error::input(format!("player {i} out of range for n = {}", self.n)));
        }
        Ok(self.expected_unchecked(profile.q(), i))
    }

    fn expected_unchecked(&self, q: &[f64], i: usize) -> (f64, f64) {
        match &self.payoffs {
            Payoffs::Counts(u) => u[i].expected(&others_pmf(q, i)),
            Payoffs::ThreeType(gp) => gp.expected_utilities(q, i),
        }
    }

    fn check_profile(&self, profile: &AnonymousProfile) -> Result<()> {
        if profile.q.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: profile.q.len(),
            });
        }
        Ok(())
    }
}

/// `q_i` = probability that player `i` plays strategy 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct AnonymousProfile {
    q: Vec<f64>,
}

#[derive(Deserialize)]
struct RawProfile {
    q: Vec<f64>,
}

impl TryFrom<RawProfile> for AnonymousProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        AnonymousProfile::new(raw.q)
    }
}

impl AnonymousProfile {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = q.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::input(format!("q[{i}] = {p} is outside [0, 1]")));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

fn others_pmf(q: &[f64], i: usize) -> Vec<f64> {
    let others: Vec<f64> = q
        .iter()
        .enumerate()
        .filter_map(|(j, p)| (j != i).then_some(*p))
        .collect();
    pmf_of(&others)
}

/// Distribution of `Σ_{j≠i} X_j` with `X_j ~ Bernoulli(q_j)`.
///
/// `override_value`, when given, replaces `q_i` before player `i` is
/// excluded; it is range-checked but cannot affect the result.
pub fn others_count_distribution(
    profile: &AnonymousProfile,
    i: usize,
    override_value: Option<f64>,
) -> Result<CountDistribution> {
    if i >= profile.len() {
        return Err(Error::input(format!("player {i} out of range for n = {}", profile.len())));
    }
    let mut q = profile.q.clone();
    if let Some(v) = override_value {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::input(format!("override {v} is outside [0, 1]")));
        }
        q[i] = v;
    }
    CountDistribution::from_computed(others_pmf(&q, i))
}

fn player_regret(q_i: f64, u0: f64, u1: f64, mode: RegretMode) -> f64 {
    match mode {
        RegretMode::WellSupported => {
            let mut r: f64 = 0.0;
            if q_i > SUPPORT_TOL {
                r = r.max(u0 - u1);
            }
            if 1.0 - q_i > SUPPORT_TOL {
                r = r.max(u1 - u0);
            }
            r
        }
        RegretMode::Expected => (u0.max(u1) - (q_i * u1 + (1.0 - q_i) * u0)).max(0.0),
    }
}

/// Well-supported regret of every player.
pub fn anonymous_regret(game: &AnonymousGame, profile: &AnonymousProfile) -> Result<Vec<f64>> {
    anonymous_regret_with(game, profile, RegretMode::WellSupported)
}

pub fn anonymous_regret_with(
    game: &AnonymousGame,
    profile: &AnonymousProfile,
    mode: RegretMode,
) -> Result<Vec<f64>> {
    game.check_profile(profile)?;
    Ok((0..game.n)
        .map(|i| {
            let (u0, u1) = game.expected_unchecked(&profile.q, i);
            player_regret(profile.q[i], u0, u1, mode)
        })
        .collect())
}

/// Largest entry of a regret vector (0 for an empty one).
pub fn max_regret(regrets: &[f64]) -> f64 {
    regrets.iter().copied().fold(0.0, f64::max)
}

/// Regret of player `i` only, stopping early in hot loops.
pub(crate) fn player_regret_unchecked(game: &AnonymousGame, q: &[f64], i: usize) -> f64 {
    let (u0, u1) = game.expected_unchecked(q, i);
    player_regret(q[i], u0, u1, RegretMode::WellSupported)
}
