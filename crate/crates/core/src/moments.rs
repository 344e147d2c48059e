//! Realizing prescribed counts and power sums with per-variable grid values.
//!
//! Variables `p_1..p_m` each take a value from their own grid set. A solution
//! must put exactly `m0` variables at 0, `m1` at 1, `ms` in `(0, 1/2]` and
//! `mb` in `(1/2, 1)`, with the low and high power sums equal to the targets.
//! The solver runs a forward reachability pass over the partial-sum states,
//! prunes it backwards to the states that can still reach the target, and
//! reads off the lexicographically smallest assignment.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::grid::{power_sum_numerators, Grid, Rational};

/// Upper bound on the number of states held in one layer.
pub const DEFAULT_STATE_CAP: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SlotCounts {
    pub zeros: usize,
    pub ones: usize,
    pub low: usize,
    pub high: usize,
}

impl SlotCounts {
    pub fn total(&self) -> usize {
        self.zeros + self.ones + self.low + self.high
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSystem {
    grid: Grid,
    low_targets: Vec<u128>,
    high_targets: Vec<u128>,
    counts: SlotCounts,
    grids: Vec<Vec<u64>>,
}

impl MomentSystem {
    /// Targets are numerators: `low_targets[t-1]` is `Σ_{low} p^t · G^t`.
    pub fn new(
        grid: Grid,
        low_targets: Vec<u128>,
        high_targets: Vec<u128>,
        counts: SlotCounts,
        grids: Vec<Vec<u64>>,
    ) -> Result<Self> {
        if low_targets.len() != high_targets.len() {
            return Err(Error::DimensionMismatch {
                expected: low_targets.len(),
                actual: high_targets.len(),
            });
        }
        if low_targets.is_empty() {
            return Err(Error::input("moment depth must be at least 1"));
        }
        if counts.total() != grids.len() {
            return Err(Error::DimensionMismatch {
                expected: grids.len(),
                actual: counts.total(),
            });
        }
        let mut grids = grids;
        for g in &mut grids {
            if let Some(&j) = g.iter().find(|&&j| j > grid.den()) {
                return Err(Error::input(format!("grid value {j}/{} exceeds 1", grid.den())));
            }
            g.sort_unstable();
            g.dedup();
        }
        Ok(Self {
            grid,
            low_targets,
            high_targets,
            counts,
            grids,
        })
    }

    /// Like [`MomentSystem::new`], with targets as exact rationals that must
    /// lie on the `1/G^t` lattice.
    pub fn with_rational_targets(
        grid: Grid,
        low: &[Rational],
        high: &[Rational],
        counts: SlotCounts,
        grids: Vec<Vec<u64>>,
    ) -> Result<Self> {
        let conv = |v: &[Rational]| -> Result<Vec<u128>> {
            v.iter()
                .enumerate()
                .map(|(t, r)| {
                    r.numerator_over(grid.power_den(t + 1)?)
                        .ok_or_else(|| Error::input(format!("target {}/{} is off the grid", r.num, r.den)))
                })
                .collect()
        };
        Self::new(grid, conv(low)?, conv(high)?, counts, grids)
    }

    /// Every variable may take any value in `values`.
    pub fn uniform(
        grid: Grid,
        low_targets: Vec<u128>,
        high_targets: Vec<u128>,
        counts: SlotCounts,
        values: Vec<u64>,
    ) -> Result<Self> {
        let m = counts.total();
        Self::new(grid, low_targets, high_targets, counts, vec![values; m])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn depth(&self) -> usize {
        self.low_targets.len()
    }

    pub fn counts(&self) -> SlotCounts {
        self.counts
    }

    pub fn variables(&self) -> usize {
        self.grids.len()
    }

    pub fn grids(&self) -> &[Vec<u64>] {
        &self.grids
    }

    pub fn low_targets(&self) -> &[u128] {
        &self.low_targets
    }

    pub fn high_targets(&self) -> &[u128] {
        &self.high_targets
    }

    /// True iff `values` meets the counts and power sums exactly.
    pub fn is_solution(&self, values: &[u64]) -> bool {
        if values.len() != self.variables() || values.iter().zip(&self.grids).any(|(v, g)| !g.contains(v)) {
            return false;
        }
        let (low, high, ones) = match crate::grid::split(self.grid, values) {
            Ok(s) => s,
            Err(_) => return false,
        };
        let zeros = values.iter().filter(|&&v| v == 0).count();
        let counts = SlotCounts {
            zeros,
            ones,
            low: low.len(),
            high: high.len(),
        };
        counts == self.counts
            && power_sum_numerators(&low, self.depth()).ok().as_deref() == Some(&self.low_targets[..])
            && power_sum_numerators(&high, self.depth()).ok().as_deref() == Some(&self.high_targets[..])
    }
}

type State = Box<[u128]>;

struct Stepper<'a> {
    sys: &'a MomentSystem,
    d: usize,
    powers: Vec<Vec<u128>>,
    limits: Vec<u128>,
}

impl<'a> Stepper<'a> {
    fn new(sys: &'a MomentSystem) -> Result<Self> {
        let d = sys.depth();
        let powers = (0..=sys.grid.den())
            .map(|j| (1..=d).map(|t| crate::grid::checked_pow(j, t)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let c = sys.counts;
        let mut limits = vec![c.zeros as u128, c.ones as u128, c.low as u128, c.high as u128];
        limits.extend_from_slice(&sys.low_targets);
        limits.extend_from_slice(&sys.high_targets);
        Ok(Self { sys, d, powers, limits })
    }

    fn start(&self) -> State {
        vec![0u128; 4 + 2 * self.d].into_boxed_slice()
    }

    fn target(&self) -> State {
        self.limits.clone().into_boxed_slice()
    }

    fn step(&self, s: &[u128], v: u64) -> Option<State> {
        let mut next: State = s.into();
        let grid = self.sys.grid;
        let (slot, offset) = if v == 0 {
            (0, None)
        } else if v == grid.den() {
            (1, None)
        } else if grid.is_low(v) {
            (2, Some(4))
        } else {
            (3, Some(4 + self.d))
        };
        next[slot] += 1;
        if next[slot] > self.limits[slot] {
            return None;
        }
        if let Some(off) = offset {
            for (t, p) in self.powers[v as usize].iter().enumerate() {
                let idx = off + t;
                next[idx] = next[idx].checked_add(*p)?;
                if next[idx] > self.limits[idx] {
                    return None;
                }
            }
        }
        Some(next)
    }
}

/// Solves the system with the default state cap.
pub fn solve_moment_system(sys: &MomentSystem) -> Result<Option<Vec<u64>>> {
    solve_moment_system_capped(sys, DEFAULT_STATE_CAP)
}

/// Returns the lexicographically smallest solution (in variable order), or
/// `None` iff the system has no solution.
pub fn solve_moment_system_capped(sys: &MomentSystem, state_cap: usize) -> Result<Option<Vec<u64>>> {
    let stepper = Stepper::new(sys)?;
    let m = sys.variables();

    let mut layers: Vec<HashSet<State>> = Vec::with_capacity(m + 1);
    layers.push(HashSet::from([stepper.start()]));
    for values in &sys.grids {
        let prev = layers.last().expect("nonempty");
        let mut next = HashSet::new();
        for s in prev {
            for &v in values {
                if let Some(n) = stepper.step(s, v) {
                    next.insert(n);
                }
            }
        }
        if next.len() > state_cap {
            return Err(Error::BudgetExceeded(format!(
                "moment system layer has {} states (cap {state_cap})",
                next.len()
            )));
        }
        if next.is_empty() {
            return Ok(None);
        }
        layers.push(next);
    }

    let target = stepper.target();
    if !layers[m].contains(&target) {
        return Ok(None);
    }

    // Keep only states from which the target is still reachable.
    let mut alive: Vec<HashSet<State>> = vec![HashSet::new(); m + 1];
    alive[m].insert(target);
    for i in (0..m).rev() {
        let (head, tail) = alive.split_at_mut(i + 1);
        let later = &tail[0];
        head[i] = layers[i]
            .iter()
            .filter(|s| sys.grids[i].iter().any(|&v| stepper.step(s, v).is_some_and(|n| later.contains(&n))))
            .cloned()
            .collect();
    }

    let mut state = stepper.start();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let (v, next) = sys.grids[i]
            .iter()
            .find_map(|&v| stepper.step(&state, v).filter(|n| alive[i + 1].contains(n)).map(|n| (v, n)))
            .ok_or_else(|| Error::Internal("moment system traceback lost its path".into()))?;
        out.push(v);
        state = next;
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn low_only(g: u64, targets: Vec<u128>, ms: usize, values: Vec<u64>) -> MomentSystem {
        let d = targets.len();
        MomentSystem::uniform(
            Grid::new(g).unwrap(),
            targets,
            vec![0; d],
            SlotCounts {
                low: ms,
                ..Default::default()
            },
            values,
        )
        .unwrap()
    }

    #[test]
    fn two_quarter_half_witness() {
        let sys = low_only(4, vec![3, 5], 2, vec![1, 2]);
        assert_eq!(solve_moment_system(&sys).unwrap(), Some(vec![1, 2]));
    }

    #[test]
    fn all_zero_system() {
        let sys = MomentSystem::uniform(
            Grid::new(4).unwrap(),
            vec![0, 0],
            vec![0, 0],
            SlotCounts {
                zeros: 3,
                ..Default::default()
            },
            vec![0, 1, 2, 3, 4],
        )
        .unwrap();
        assert_eq!(solve_moment_system(&sys).unwrap(), Some(vec![0, 0, 0]));
    }

    #[test]
    fn unreachable_second_moment() {
        let sys = low_only(4, vec![4, 16], 2, vec![1, 2]);
        assert_eq!(solve_moment_system(&sys).unwrap(), None);
    }

    #[test]
    fn per_variable_grids_are_respected() {
        let g = Grid::new(4).unwrap();
        let sys = MomentSystem::new(
            g,
            vec![5, 9],
            vec![0, 0],
            SlotCounts {
                low: 3,
                ..Default::default()
            },
            vec![vec![1, 2]; 3],
        )
        .unwrap();
        assert_eq!(solve_moment_system(&sys).unwrap(), Some(vec![1, 2, 2]));
        let sys = MomentSystem::new(
            g,
            vec![5, 9],
            vec![0, 0],
            SlotCounts {
                low: 3,
                ..Default::default()
            },
            vec![vec![2], vec![1, 2], vec![2]],
        )
        .unwrap();
        assert_eq!(solve_moment_system(&sys).unwrap(), Some(vec![2, 1, 2]));
    }

    #[test]
    fn off_grid_targets_rejected() {
        let g = Grid::new(4).unwrap();
        let counts = SlotCounts {
            low: 1,
            ..Default::default()
        };
        let err = MomentSystem::with_rational_targets(
            g,
            &[Rational::new(1, 3).unwrap()],
            &[Rational::new(0, 1).unwrap()],
            counts,
            vec![vec![1]],
        );
        assert!(err.is_err());
        let ok = MomentSystem::with_rational_targets(
            g,
            &[Rational::new(1, 4).unwrap()],
            &[Rational::new(0, 1).unwrap()],
            counts,
            vec![vec![1]],
        )
        .unwrap();
        assert_eq!(solve_moment_system(&ok).unwrap(), Some(vec![1]));
    }

    #[test]
    fn state_cap_is_a_resource_error() {
        let sys = low_only(16, vec![20, 100], 4, (1..=8).collect());
        assert!(solve_moment_system_capped(&sys, 3).unwrap_err().is_resource());
    }

    fn brute(sys: &MomentSystem) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(sys: &MomentSystem, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if cur.len() == sys.variables() {
                if sys.is_solution(cur) {
                    out.push(cur.clone());
                }
                return;
            }
            for &v in &sys.grids()[cur.len()] {
                cur.push(v);
                rec(sys, cur, out);
                cur.pop();
            }
        }
        rec(sys, &mut cur, &mut out);
        out
    }

    proptest! {
        #[test]
        fn dp_matches_enumeration(
            g in 2u64..=8,
            d in 1usize..=3,
            raw_grids in prop::collection::vec(prop::collection::vec(0u64..=8, 1..4), 1..=4),
            planted in prop::collection::vec(0u64..=8, 4),
            use_planted in any::<bool>(),
        ) {
            let grid = Grid::new(g).unwrap();
            let m = raw_grids.len();
            let mut grids: Vec<Vec<u64>> = raw_grids.iter().map(|v| v.iter().map(|j| j % (g + 1)).collect()).collect();
            let point: Vec<u64> = planted.iter().take(m).map(|j| j % (g + 1)).collect();
            if use_planted {
                for (gr, p) in grids.iter_mut().zip(&point) {
                    gr.push(*p);
                }
            }
            let key = crate::grid::ProfileKey::of(grid, &point, d).unwrap();
            let zeros = point.iter().filter(|&&v| v == 0).count();
            let counts = SlotCounts { zeros, ones: key.ones, low: point.iter().filter(|&&v| grid.is_low(v)).count(), high: point.iter().filter(|&&v| grid.is_high(v)).count() };
            let sys = MomentSystem::new(grid, key.low, key.high, counts, grids).unwrap();
            let all = brute(&sys);
            let got = solve_moment_system(&sys).unwrap();
            prop_assert_eq!(got.is_some(), !all.is_empty());
            if let Some(w) = got {
                prop_assert!(sys.is_solution(&w));
                prop_assert_eq!(&w, all.iter().min().unwrap());
            }
        }
    }
}
