//! Adversarial instances and random test games.
//!
//! - [`gen_gs_game`]: bimatrix games whose approximate equilibria all keep the
//!   row player close to uniform over a hidden `ℓ`-subset `S`.
//! - [`GpGame`]: a three-type anonymous game whose approximate equilibria pin
//!   the type-A players near a prescribed vector `p`.
//! - Seeded random sparse bimatrix games and random anonymous games.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{AnonymousGame, BimatrixGame};
use crate::pbd::pmf_of;

/// Parameters of a subset game: `S ⊆ {0..n-1}` with `|S| = ℓ`, `n = C(ℓ, ℓ/2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GsSpec {
    ell: usize,
    s: Vec<usize>,
}

impl GsSpec {
    pub fn new(ell: usize, mut s: Vec<usize>) -> Result<Self> {
        if ell < 2 || !ell.is_multiple_of(2) {
            return Err(Error::input(format!("ell = {ell} must be even and at least 2")));
        }
        let n = gs_size(ell)?;
        s.sort_unstable();
        s.dedup();
        if s.len() != ell {
            return Err(Error::input(format!("S must contain {ell} distinct indices")));
        }
        if let Some(&i) = s.iter().find(|&&i| i >= n) {
            return Err(Error::input(format!("index {i} in S is out of range for n = {n}")));
        }
        Ok(Self { ell, s })
    }

    /// `S = {0, ..., ℓ-1}`.
    pub fn first(ell: usize) -> Result<Self> {
        Self::new(ell, (0..ell).collect())
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn s(&self) -> &[usize] {
        &self.s
    }

    pub fn n(&self) -> usize {
        gs_size(self.ell).expect("validated")
    }

    /// Uniform row strategy over `S`.
    pub fn uniform_on_s(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n()];
        for &i in &self.s {
            x[i] = 1.0 / self.ell as f64;
        }
        x
    }
}

fn gs_size(ell: usize) -> Result<usize> {
    let n = crate::pbd::binomial_coefficient(ell, ell / 2);
    if n > 4096.0 {
        return Err(Error::BudgetExceeded(format!("C({ell}, {}) strategies is too many", ell / 2)));
    }
    Ok(n as usize)
}

/// All `size`-subsets of `items` in lexicographic order.
fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..size).collect();
    let m = items.len();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(pos) = (0..size).rev().find(|&p| idx[p] < m - size + p) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..size {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Column `j` corresponds to the `j`-th `ℓ/2`-subset `S_j` of `S`
/// (lexicographic). Rows outside `S` pay `(-1, 1)`; rows in `S_j` pay `(1, 0)`;
/// rows in `S \ S_j` pay `(0, 1)`.
pub fn gen_gs_game(spec: &GsSpec) -> Result<BimatrixGame> {
    let n = spec.n();
    let columns = subsets(&spec.s, spec.ell / 2);
    debug_assert_eq!(columns.len(), n);
    BimatrixGame::from_fn(n, |i, j| {
        if spec.s.binary_search(&i).is_err() {
            (-1.0, 1.0)
        } else if columns[j].contains(&i) {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        }
    })
}

/// Checks the three balance conditions: `a` non-increasing,
/// summing to zero (within `tol`), and its first half summing to at most `k`.
pub fn balance_conditions_hold(a: &[f64], k: f64, tol: f64) -> bool {
    a.len().is_multiple_of(2)
        && a.windows(2).all(|w| w[0] >= w[1])
        && a.iter().sum::<f64>().abs() <= tol
        && a[..a.len() / 2].iter().sum::<f64>() <= k + tol
}

/// Random vector meeting [`balance_conditions_hold`], with the `k` it meets.
pub fn sample_balanced_vector(ell: usize, rng: &mut impl Rng) -> (Vec<f64>, f64) {
    let mut a: Vec<f64> = (0..ell).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = a.iter().sum::<f64>() / ell as f64;
    a.iter_mut().for_each(|v| *v -= mean);
    a.sort_by(|x, y| y.total_cmp(x));
    let head: f64 = a[..ell / 2].iter().sum();
    let k = head.max(0.0) + rng.random_range(0.0..0.1);
    (a, k)
}

/// Three-type anonymous game prescribing the type-A mixed strategies `p`.
///
/// Players `0..k` are type A, player `k` is B and player `k + 1` is C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpGame {
    k: usize,
    delta: f64,
    p: Vec<f64>,
}

impl GpGame {
    pub fn new(k: usize, delta: f64, p: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        if p.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: p.len(),
            });
        }
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(Error::input(format!("delta = {delta} must lie in (0, 1/2]")));
        }
        let lo = 3.0 * delta * k as f64;
        if let Some(pi) = p.iter().find(|pi| !(lo..=1.0).contains(*pi)) {
            return Err(Error::input(format!("p_i = {pi} is outside [3δk, 1] = [{lo}, 1]")));
        }
        Ok(Self { k, delta, p })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn player_count(&self) -> usize {
        self.k + 2
    }

    /// The prescribed profile: `q_i = p_i` for type A, B and C play 0.
    pub fn prescribed_profile(&self) -> Vec<f64> {
        let mut q = self.p.clone();
        q.extend([0.0, 0.0]);
        q
    }

    /// Exact `(E u_i(0), E u_i(1))` under the product profile `q`.
    ///
    /// Expectations run over the four joint outcomes of B and C and the exact
    /// distribution of the type-A count.
    pub(crate) fn expected_utilities(&self, q: &[f64], i: usize) -> (f64, f64) {
        let k = self.k as f64;
        let mu: f64 = self.p.iter().sum();
        let (qa, rest) = q.split_at(self.k);
        let (qb, qc) = (rest[0], rest[1]);
        if i >= self.k {
            let count = pmf_of(qa);
            let e_ta: f64 = count.iter().enumerate().map(|(m, w)| m as f64 * w).sum();
            let u1 = if i == self.k { (e_ta - mu) / k } else { (mu - e_ta) / k };
            return (2.0 * self.delta, u1);
        }
        let mu_minus = mu - self.p[i];
        let others: Vec<f64> = qa
            .iter()
            .enumerate()
            .filter_map(|(j, v)| (j != i).then_some(*v))
            .collect();
        let count = pmf_of(&others);
        let (mut u0, mut u1) = (0.0, 0.0);
        for (b, pb) in [(false, 1.0 - qb), (true, qb)] {
            for (c, pc) in [(false, 1.0 - qc), (true, qc)] {
                let w = pb * pc;
                if w == 0.0 {
                    continue;
                }
                let both_zero = if !b && !c { 1.0 } else { 0.0 };
                for (t, pt) in count.iter().enumerate() {
                    let v0 = (mu_minus * both_zero - self.delta * k * f64::from(c)) / k;
                    let v1 = (t as f64 * both_zero - self.delta * k * f64::from(b)) / k;
                    u0 += w * pt * v0;
                    u1 += w * pt * v1;
                }
            }
        }
        (u0, u1)
    }
}

/// Anonymous game for the prescribed-equilibrium construction.
pub fn gen_gp_game(k: usize, delta: f64, p: Vec<f64>) -> Result<AnonymousGame> {
    Ok(AnonymousGame::three_type(GpGame::new(k, delta, p)?))
}

/// Bimatrix game with at most `k` nonzeros in every row and column of each
/// matrix: the union of `k` random permutation patterns with values uniform
/// in `[-1, 1]`.
pub fn gen_random_sparse(n: usize, k: usize, seed: u64) -> Result<BimatrixGame> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    if k > n {
        return Err(Error::input(format!("sparsity {k} exceeds n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = vec![vec![0.0; n]; n];
    let mut c = vec![vec![0.0; n]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..k {
        perm.shuffle(&mut rng);
        for (i, &j) in perm.iter().enumerate() {
            r[i][j] = rng.random_range(-1.0..=1.0);
            c[i][j] = rng.random_range(-1.0..=1.0);
        }
    }
    BimatrixGame::new(r, c)
}

/// Anonymous game with every `u_i(s, k)` uniform in `[-1, 1]`.
pub fn gen_random_anonymous(n: usize, seed: u64) -> Result<AnonymousGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AnonymousGame::from_fn(n, |_, _, _| rng.random_range(-1.0..=1.0))
}

/// `u_i(1, k) = 1 - k/(n-1)`, `u_i(0, k) = k/(n-1)`: playing 1 pays off when
/// few others do.
pub fn anti_coordination(n: usize) -> Result<AnonymousGame> {
    if n < 2 {
        return Err(Error::input("anti-coordination needs at least 2 players"));
    }
    let m = (n - 1) as f64;
    AnonymousGame::from_fn(n, |_, s, k| if s == 1 { 1.0 - k as f64 / m } else { k as f64 / m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{anonymous_regret, bimatrix_regret, max_regret, AnonymousProfile, MixedPair};
    use proptest::prelude::*;

    #[test]
    fn subset_order_is_lexicographic() {
        assert_eq!(
            subsets(&[0, 1, 2, 3], 2),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(subsets(&[4, 7], 1), vec![vec![4], vec![7]]);
    }

    #[test]
    fn gs_two_is_identity_block() {
        let g = gen_gs_game(&GsSpec::first(2).unwrap()).unwrap();
        assert_eq!(g.row_matrix(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(g.col_matrix(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn gs_column_sums_over_s() {
        for ell in [2, 4, 6] {
            let spec = GsSpec::first(ell).unwrap();
            let g = gen_gs_game(&spec).unwrap();
            for j in 0..g.n() {
                let ones: f64 = spec.s().iter().map(|&i| g.r(i, j)).sum();
                assert_eq!(ones, (ell / 2) as f64);
            }
        }
    }

    #[test]
    fn gs_nonfirst_subset() {
        let spec = GsSpec::new(4, vec![5, 0, 2, 3]).unwrap();
        assert_eq!(spec.s(), &[0, 2, 3, 5]);
        let g = gen_gs_game(&spec).unwrap();
        assert!((0..6).all(|j| g.r(1, j) == -1.0 && g.r(4, j) == -1.0));
        let pair = MixedPair::new(spec.uniform_on_s(), vec![1.0 / 6.0; 6]).unwrap();
        let (r, c) = bimatrix_regret(&g, &pair).unwrap();
        assert!(r < 1e-12 && c < 1e-12);
    }

    #[test]
    fn gs_spec_validation() {
        assert!(GsSpec::first(3).is_err());
        assert!(GsSpec::new(4, vec![0, 1, 2]).is_err());
        assert!(GsSpec::new(4, vec![0, 1, 2, 6]).is_err());
    }

    #[test]
    fn gp_prescribed_profile_is_exact() {
        let g = gen_gp_game(2, 0.05, vec![0.4, 0.6]).unwrap();
        let q = AnonymousProfile::new(vec![0.4, 0.6, 0.0, 0.0]).unwrap();
        assert!(max_regret(&anonymous_regret(&g, &q).unwrap()) < 1e-15);

        let g = gen_gp_game(3, 0.05, vec![1.0; 3]).unwrap();
        let q = AnonymousProfile::new(vec![1.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(max_regret(&anonymous_regret(&g, &q).unwrap()) < 1e-15);
    }

    #[test]
    fn gp_perturbed_profile_has_large_regret() {
        let (k, delta) = (2usize, 0.01);
        let p = vec![0.4, 0.6];
        let g = gen_gp_game(k, delta, p.clone()).unwrap();
        let q1 = p[0] + 7.0 * (k * k) as f64 * delta + 0.2;
        let q = AnonymousProfile::new(vec![q1, p[1], 0.0, 0.0]).unwrap();
        assert!(max_regret(&anonymous_regret(&g, &q).unwrap()) > delta / 2.0);
    }

    #[test]
    fn gp_validation() {
        assert!(GpGame::new(2, 0.05, vec![0.2, 0.6]).is_err());
        assert!(GpGame::new(2, 0.05, vec![0.4]).is_err());
        assert!(GpGame::new(2, 0.0, vec![0.4, 0.6]).is_err());
    }

    #[test]
    fn gp_json_round_trip() {
        let g = gen_gp_game(2, 0.05, vec![0.4, 0.6]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"gp\""));
        let back: AnonymousGame = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn random_generators_are_seeded() {
        assert_eq!(gen_random_sparse(10, 3, 7).unwrap(), gen_random_sparse(10, 3, 7).unwrap());
        assert_ne!(gen_random_sparse(10, 3, 7).unwrap(), gen_random_sparse(10, 3, 8).unwrap());
        assert_eq!(gen_random_anonymous(4, 1).unwrap(), gen_random_anonymous(4, 1).unwrap());
        assert!(gen_random_sparse(3, 4, 0).is_err());
    }

    #[test]
    fn anti_coordination_symmetric_half_is_exact() {
        let g = anti_coordination(3).unwrap();
        let q = AnonymousProfile::new(vec![0.5; 3]).unwrap();
        assert!(max_regret(&anonymous_regret(&g, &q).unwrap()) < 1e-15);
    }

    proptest! {
        #[test]
        fn gp_expectations_match_closed_form(
            p in prop::collection::vec(0.3f64..=1.0, 3),
            q in prop::collection::vec(0.0f64..=1.0, 5),
        ) {
            let delta = 0.03;
            let gp = GpGame::new(3, delta, p.clone()).unwrap();
            let k = 3.0;
            let mu: f64 = p.iter().sum();
            let (qb, qc) = (q[3], q[4]);
            for i in 0..3 {
                let mu_minus = mu - p[i];
                let et: f64 = (0..3).filter(|&j| j != i).map(|j| q[j]).sum();
                let u0 = (mu_minus * (1.0 - qb) * (1.0 - qc) - delta * k * qc) / k;
                let u1 = (et * (1.0 - qb) * (1.0 - qc) - delta * k * qb) / k;
                let (a0, a1) = gp.expected_utilities(&q, i);
                prop_assert!((a0 - u0).abs() < 1e-12 && (a1 - u1).abs() < 1e-12);
            }
            let ta: f64 = q[..3].iter().sum();
            let (b0, b1) = gp.expected_utilities(&q, 3);
            let (c0, c1) = gp.expected_utilities(&q, 4);
            prop_assert!((b0 - 2.0 * delta).abs() < 1e-15 && (c0 - 2.0 * delta).abs() < 1e-15);
            prop_assert!((b1 - (ta - mu) / k).abs() < 1e-12);
            prop_assert!((c1 - (mu - ta) / k).abs() < 1e-12);
        }

        #[test]
        fn random_sparse_respects_sparsity(n in 1usize..20, k in 0usize..4, seed in any::<u64>()) {
            let k = k.min(n);
            let g = gen_random_sparse(n, k, seed).unwrap();
            prop_assert!(crate::bimatrix::sparsity(&g) <= k);
        }

        #[test]
        fn balance_conditions_bound_sum(ell in (1usize..8).prop_map(|h| 2 * h), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, k) = sample_balanced_vector(ell, &mut rng);
            prop_assert!(balance_conditions_hold(&a, k, 1e-12));
            prop_assert!(a.iter().map(|v| v.abs()).sum::<f64>() <= 4.0 * k + 1e-12);
        }
    }
}
