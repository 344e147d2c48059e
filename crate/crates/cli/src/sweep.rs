//! Parameter sweeps that emit one CSV row per grid cell.

use std::collections::BTreeMap;

use nash_ptas::bimatrix::{oblivious_sampler, SamplerOptions};
use nash_ptas::grid::power_sum_numerators;
use nash_ptas::pbd::{pmf_of, roos_bound};
use nash_ptas::{BimatrixGame, RegretMode};

use crate::io::{CliError, CliResult};

/// Largest number of collections enumerated per (n, grid) cell.
const COLLECTION_CAP: u128 = 2_000_000;

pub const TV_HEADER: [&str; 8] = ["d", "n", "grid", "side", "collections", "matched_pairs", "max_tv", "roos_bound"];

pub const SAMPLER_HEADER: [&str; 8] = [
    "epsilon",
    "seed",
    "n",
    "t",
    "trials",
    "successes",
    "success_rate",
    "first_success_trial",
];

fn writer<'a>(out: &'a mut Vec<u8>, header: &[&str]) -> CliResult<csv::Writer<&'a mut Vec<u8>>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

fn multisets(values: &[u64], size: usize) -> Vec<Vec<u64>> {
    fn rec(values: &[u64], size: usize, start: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..values.len() {
            cur.push(values[i]);
            rec(values, size, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(values, size, 0, &mut Vec::with_capacity(size), &mut out);
    out
}

fn multiset_count(kinds: u128, size: u128) -> u128 {
    // C(kinds + size - 1, size), saturating.
    let mut c: u128 = 1;
    for i in 0..size {
        c = c.saturating_mul(kinds + i) / (i + 1);
    }
    c
}

struct TvCell {
    collections: usize,
    matched_pairs: usize,
    max_tv: f64,
}

fn tv_cell(collections: &[Vec<u64>], den: u64, d: usize) -> CliResult<TvCell> {
    let mut groups: BTreeMap<Vec<u128>, Vec<usize>> = BTreeMap::new();
    for (i, c) in collections.iter().enumerate() {
        groups.entry(power_sum_numerators(c, d)?).or_default().push(i);
    }
    let pmfs: Vec<Vec<f64>> = collections
        .iter()
        .map(|c| pmf_of(&c.iter().map(|&j| j as f64 / den as f64).collect::<Vec<_>>()))
        .collect();
    let mut matched_pairs = 0;
    let mut max_tv = 0.0f64;
    for members in groups.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let tv = 0.5 * pmfs[i].iter().zip(&pmfs[j]).map(|(x, y)| (x - y).abs()).sum::<f64>();
                max_tv = max_tv.max(tv);
                matched_pairs += 1;
            }
        }
    }
    Ok(TvCell {
        collections: collections.len(),
        matched_pairs,
        max_tv,
    })
}

/// Rows ordered by `(d, n, side)`; `side` is `low` for values in `(0, 1/2]`
/// and `high` for their complements in `[1/2, 1)`.
pub fn tv_sweep(n_max: usize, grid: u64, ds: &[usize]) -> CliResult<Vec<u8>> {
    if grid < 2 {
        return Err(CliError::Input(format!("grid denominator {grid} must be at least 2")));
    }
    if ds.contains(&0) {
        return Err(CliError::Input("d must be at least 1".into()));
    }
    let low: Vec<u64> = (1..=grid / 2).collect();
    let mut families = Vec::new();
    for n in 1..=n_max {
        if multiset_count(low.len() as u128, n as u128) > COLLECTION_CAP {
            return Err(nash_ptas::Error::BudgetExceeded(format!(
                "more than {COLLECTION_CAP} collections of size {n} on the 1/{grid} grid"
            ))
            .into());
        }
        let lows = multisets(&low, n);
        let highs: Vec<Vec<u64>> = lows.iter().map(|c| c.iter().map(|&j| grid - j).collect()).collect();
        families.push((n, lows, highs));
    }
    let mut out = Vec::new();
    {
        let mut w = writer(&mut out, &TV_HEADER)?;
        for &d in ds {
            for (n, lows, highs) in &families {
                for (side, family) in [("low", lows), ("high", highs)] {
                    let cell = tv_cell(family, grid, d)?;
                    w.write_record([
                        d.to_string(),
                        n.to_string(),
                        grid.to_string(),
                        side.to_string(),
                        cell.collections.to_string(),
                        cell.matched_pairs.to_string(),
                        cell.max_tv.to_string(),
                        roos_bound(d).to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(out)
}

/// Rows ordered by `(epsilon, seed)`; every cell runs all `trials`.
pub fn sampler_sweep(
    game: &BimatrixGame,
    epsilons: &[f64],
    seeds: &[u64],
    trials: usize,
    mode: RegretMode,
) -> CliResult<Vec<u8>> {
    let options = SamplerOptions {
        mode,
        stop_at_first: false,
    };
    let mut out = Vec::new();
    {
        let mut w = writer(&mut out, &SAMPLER_HEADER)?;
        for &eps in epsilons {
            for &seed in seeds {
                let rep = oblivious_sampler(game, eps, trials, seed, options)?;
                w.write_record([
                    eps.to_string(),
                    seed.to_string(),
                    game.n().to_string(),
                    rep.t.to_string(),
                    rep.trials.to_string(),
                    rep.successes.to_string(),
                    (rep.successes as f64 / rep.trials as f64).to_string(),
                    rep.first_success_trial.map(|t| t.to_string()).unwrap_or_default(),
                ])?;
            }
        }
        w.flush().map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_enumeration_matches_count() {
        for kinds in 1..6u64 {
            let values: Vec<u64> = (1..=kinds).collect();
            for size in 0..5 {
                assert_eq!(multisets(&values, size).len() as u128, multiset_count(kinds as u128, size as u128));
            }
        }
    }

    #[test]
    fn tv_cell_on_a_known_pair() {
        // {0.1, 0.4} and {0.2, 0.3} share only the first power sum.
        let cell = tv_cell(&[vec![1, 4], vec![2, 3]], 10, 1).unwrap();
        assert_eq!(cell.matched_pairs, 1);
        let a = pmf_of(&[0.1, 0.4]);
        let b = pmf_of(&[0.2, 0.3]);
        let tv = 0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        assert!((cell.max_tv - tv).abs() < 1e-15);
        assert_eq!(tv_cell(&[vec![1, 4], vec![2, 3]], 10, 2).unwrap().matched_pairs, 0);
    }
}
