//! `nash-ptas`: solve, verify and generate games, build covers, run sweeps.
//!
//! Exit codes: 0 success, 1 no equilibrium or no success, 2 input error,
//! 3 enumeration budget exceeded, 4 internal consistency failure.
//! Worker threads follow `RAYON_NUM_THREADS`.

mod io;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nash_ptas::bimatrix::{oblivious_sampler, solve_sparse, SamplerOptions};
use nash_ptas::cover::{build_cover, cover_check, cover_params_for_epsilon, Cover};
use nash_ptas::game::{anonymous_regret_with, bimatrix_regret_with, max_regret};
use nash_ptas::hard::{anti_coordination, gen_gp_game, gen_gs_game, gen_random_anonymous, gen_random_sparse, GsSpec};
use nash_ptas::pbd::{moment_profile, pbd_pmf, power_sums, raw_moments, roos_bound, roos_expansion, tv_distance};
use nash_ptas::search::{
    brute_force_grid_nash_with_budget, moment_search, structural_params, AggregateGuess, BruteForceBudget,
    SearchSource,
};
use nash_ptas::{AnonymousGame, AnonymousProfile, BimatrixGame, IndicatorCollection, MixedPair, RegretMode};

use crate::io::{emit, parse_json, read_json, read_text, to_json, CliError, CliResult};

#[derive(Parser)]
#[command(name = "nash-ptas", version, about = "Approximate Nash equilibria for anonymous and bimatrix games")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the regret of a profile, failing when it exceeds epsilon.
    Verify(VerifyArgs),
    #[command(subcommand)]
    Bimatrix(BimatrixCmd),
    #[command(subcommand)]
    Anon(AnonCmd),
    #[command(subcommand)]
    Cover(CoverCmd),
    #[command(subcommand)]
    Pbd(PbdCmd),
    #[command(subcommand)]
    Gen(GenCmd),
    #[command(subcommand)]
    Sweep(SweepCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    WellSupported,
    Expected,
}

impl From<Mode> for RegretMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::WellSupported => RegretMode::WellSupported,
            Mode::Expected => RegretMode::Expected,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    game: PathBuf,
    /// Profile JSON, or the output of a solver command.
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "well-supported")]
    mode: Mode,
}

#[derive(Subcommand)]
enum BimatrixCmd {
    /// Uniform pair with its 2k/n regret bound.
    SolveSparse { game: PathBuf },
    /// Random multiset pairs until one is an epsilon-equilibrium.
    Sample {
        game: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run every trial instead of stopping at the first success.
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum, default_value = "well-supported")]
        mode: Mode,
    },
}

#[derive(Subcommand)]
enum AnonCmd {
    /// Moment Search.
    Solve {
        game: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// Probabilities are multiples of 1/k²; derived from epsilon when absent.
        #[arg(long)]
        k: Option<u64>,
        /// Number of matched power sums; derived from epsilon when absent.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Skip the exact regret re-check of the returned profile.
        #[arg(long)]
        no_verify: bool,
    },
    /// Every profile on the 1/grid grid with regret at most epsilon.
    Oracle {
        game: PathBuf,
        #[arg(long)]
        grid: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 6)]
        max_players: usize,
        #[arg(long, default_value_t = 16)]
        max_grid: u64,
    },
}

#[derive(Subcommand)]
enum CoverCmd {
    /// Build the cover for n indicators.
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long, required_unless_present = "epsilon")]
        k: Option<u64>,
        #[arg(long, required_unless_present = "epsilon")]
        d: Option<usize>,
        /// Derive k and d from epsilon.
        #[arg(long, conflicts_with_all = ["k", "d"])]
        epsilon: Option<f64>,
    },
    /// Closest cover element to a collection.
    Check {
        cover: PathBuf,
        #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
        probs: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum PbdCmd {
    Pmf {
        #[arg(long, num_args = 0.., value_delimiter = ',', allow_negative_numbers = true)]
        probs: Vec<f64>,
    },
    Tv {
        #[arg(long, num_args = 0.., value_delimiter = ',', allow_negative_numbers = true)]
        a: Vec<f64>,
        #[arg(long, num_args = 0.., value_delimiter = ',', allow_negative_numbers = true)]
        b: Vec<f64>,
    },
    Moments {
        #[arg(long, num_args = 0.., value_delimiter = ',', allow_negative_numbers = true)]
        probs: Vec<f64>,
        #[arg(long)]
        d: usize,
    },
    /// Signed expansion around a binomial with success probability p.
    Roos {
        #[arg(long, num_args = 0.., value_delimiter = ',', allow_negative_numbers = true)]
        probs: Vec<f64>,
        #[arg(long)]
        order: usize,
        /// Defaults to the mean of probs.
        #[arg(long)]
        p: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RandomKind {
    Sparse,
    Anonymous,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Subset game on C(ell, ell/2) strategies.
    Gs {
        #[arg(long)]
        ell: usize,
        /// Defaults to {0, ..., ell-1}.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        s: Option<Vec<usize>>,
    },
    /// Three-type anonymous game with a prescribed equilibrium.
    Gp {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        p: Vec<f64>,
    },
    Random {
        #[arg(long, value_enum)]
        kind: RandomKind,
        #[arg(long)]
        n: usize,
        /// Nonzeros per row and column for sparse games.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bimatrix matching pennies on n strategies.
    Pennies {
        #[arg(long)]
        n: usize,
    },
    /// Anonymous game where playing 1 pays off when few others do.
    AntiCoordination {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Max TV between moment-matched grid collections, per d and n.
    Tv {
        #[arg(long, default_value_t = 5)]
        n_max: usize,
        #[arg(long, default_value_t = 20)]
        grid: u64,
        #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [1, 2, 3])]
        d: Vec<usize>,
    },
    /// Success rate of the multiset sampler over epsilon × seed.
    Sampler {
        game: PathBuf,
        #[arg(long, num_args = 0.., value_delimiter = ',')]
        epsilon: Vec<f64>,
        #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [0])]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, value_enum, default_value = "well-supported")]
        mode: Mode,
    },
}

enum Game {
    Bimatrix(BimatrixGame),
    Anonymous(AnonymousGame),
}

fn read_game(path: &Path) -> CliResult<Game> {
    let text = read_text(path)?;
    let value: serde_json::Value = parse_json(&text, path)?;
    if value.get("R").is_some() {
        Ok(Game::Bimatrix(parse_json(&text, path)?))
    } else {
        Ok(Game::Anonymous(parse_json(&text, path)?))
    }
}

fn read_anonymous(path: &Path) -> CliResult<AnonymousGame> {
    match read_game(path)? {
        Game::Anonymous(g) => Ok(g),
        Game::Bimatrix(_) => Err(CliError::Input(format!("{} is a bimatrix game", path.display()))),
    }
}

fn read_bimatrix(path: &Path) -> CliResult<BimatrixGame> {
    match read_game(path)? {
        Game::Bimatrix(g) => Ok(g),
        Game::Anonymous(_) => Err(CliError::Input(format!("{} is an anonymous game", path.display()))),
    }
}

/// The profile object itself, or the one embedded in a solver's output.
fn profile_value(path: &Path) -> CliResult<serde_json::Value> {
    let mut value: serde_json::Value = read_json(path)?;
    for key in ["profile", "pair", "first_success"] {
        if let Some(inner) = value.get_mut(key) {
            return Ok(inner.take());
        }
    }
    Ok(value)
}

fn from_value<T: serde::de::DeserializeOwned>(value: serde_json::Value, path: &Path) -> CliResult<T> {
    serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn collection(probs: Vec<f64>) -> CliResult<IndicatorCollection> {
    Ok(IndicatorCollection::new(probs)?)
}

fn announce_seed(seed: u64) {
    eprintln!("seed: {seed}");
}

#[derive(Serialize)]
struct VerifyReport {
    regrets: Vec<f64>,
    max_regret: f64,
    epsilon: Option<f64>,
    within_epsilon: Option<bool>,
}

fn verify(a: VerifyArgs) -> CliResult<(String, bool)> {
    let mode = a.mode.into();
    let regrets = match read_game(&a.game)? {
        Game::Bimatrix(g) => {
            let pair: MixedPair = from_value(profile_value(&a.profile)?, &a.profile)?;
            let (r, c) = bimatrix_regret_with(&g, &pair, mode)?;
            vec![r, c]
        }
        Game::Anonymous(g) => {
            let profile: AnonymousProfile = from_value(profile_value(&a.profile)?, &a.profile)?;
            anonymous_regret_with(&g, &profile, mode)?
        }
    };
    let max = max_regret(&regrets);
    let within = a.epsilon.map(|e| max <= e);
    let report = VerifyReport {
        regrets,
        max_regret: max,
        epsilon: a.epsilon,
        within_epsilon: within,
    };
    Ok((to_json(&report)?, within.unwrap_or(true)))
}

#[derive(Serialize)]
struct SparseReport {
    pair: MixedPair,
    sparsity: usize,
    regret_bound: f64,
    regret: [f64; 2],
}

#[derive(Serialize)]
struct GuessUsed {
    source: SearchSource,
    guess: Option<AggregateGuess>,
}

#[derive(Serialize)]
struct SolveReport {
    profile: AnonymousProfile,
    max_regret: f64,
    guess_used: GuessUsed,
    wall_time: f64,
}

#[derive(Serialize)]
struct OracleReport {
    grid: u64,
    epsilon: f64,
    profiles: Vec<AnonymousProfile>,
}

#[derive(Serialize)]
struct CoverSummary {
    n: usize,
    k: u64,
    d: usize,
    elements: usize,
    sparse: usize,
    binomial: usize,
}

#[derive(Serialize)]
struct MomentsReport {
    power_sums: Vec<f64>,
    raw_moments: Vec<f64>,
    profile: nash_ptas::MomentProfile,
}

#[derive(Serialize)]
struct RoosReport {
    p: f64,
    order: usize,
    values: Vec<f64>,
    total_mass: f64,
    bound: f64,
}

/// Runs one command and writes its result.
fn run(cli: Cli) -> CliResult<()> {
    let out = cli.output.as_deref();
    let (text, ok, failure) = match cli.command {
        Command::Verify(a) => {
            let (text, ok) = verify(a)?;
            (text, ok, "max regret exceeds epsilon")
        }
        Command::Bimatrix(BimatrixCmd::SolveSparse { game }) => {
            let g = read_bimatrix(&game)?;
            let sol = solve_sparse(&g);
            let (r, c) = bimatrix_regret_with(&g, &sol.pair, RegretMode::WellSupported)?;
            let report = SparseReport {
                pair: sol.pair,
                sparsity: sol.sparsity,
                regret_bound: sol.regret_bound,
                regret: [r, c],
            };
            (to_json(&report)?, true, "")
        }
        Command::Bimatrix(BimatrixCmd::Sample {
            game,
            epsilon,
            trials,
            seed,
            all,
            mode,
        }) => {
            announce_seed(seed);
            let g = read_bimatrix(&game)?;
            let options = SamplerOptions {
                mode: mode.into(),
                stop_at_first: !all,
            };
            let rep = oblivious_sampler(&g, epsilon, trials, seed, options)?;
            (to_json(&rep)?, rep.successes > 0, "no sampled pair was an epsilon-equilibrium")
        }
        Command::Anon(AnonCmd::Solve {
            game,
            epsilon,
            k,
            d,
            c,
            no_verify,
        }) => {
            let g = read_anonymous(&game)?;
            let mut params = structural_params(epsilon, c, k, d)?;
            params.verify_output = !no_verify;
            let start = Instant::now();
            let found = moment_search(&g, &params)?;
            let wall_time = start.elapsed().as_secs_f64();
            match found {
                Some(o) => {
                    let report = SolveReport {
                        profile: o.profile,
                        max_regret: o.max_regret,
                        guess_used: GuessUsed {
                            source: o.source,
                            guess: o.guess,
                        },
                        wall_time,
                    };
                    (to_json(&report)?, true, "")
                }
                None => (String::new(), false, "no approximate equilibrium found"),
            }
        }
        Command::Anon(AnonCmd::Oracle {
            game,
            grid,
            epsilon,
            max_players,
            max_grid,
        }) => {
            let g = read_anonymous(&game)?;
            let budget = BruteForceBudget { max_players, max_grid };
            let profiles = brute_force_grid_nash_with_budget(&g, grid, epsilon, budget)?;
            let ok = !profiles.is_empty();
            (to_json(&OracleReport { grid, epsilon, profiles })?, ok, "no grid profile is an epsilon-equilibrium")
        }
        Command::Cover(CoverCmd::Build { n, k, d, epsilon }) => {
            let (k, d) = match (k, d, epsilon) {
                (Some(k), Some(d), None) => (k, d),
                (None, None, Some(e)) => cover_params_for_epsilon(e)?,
                _ => return Err(CliError::Input("give either --k and --d or --epsilon".into())),
            };
            let cover = build_cover(n, k, d)?;
            let text = to_json(&cover)?;
            if out.is_some() {
                emit(out, &text)?;
                let summary = CoverSummary {
                    n,
                    k,
                    d,
                    elements: cover.elements().len(),
                    sparse: cover.sparse_count(),
                    binomial: cover.binomial_count(),
                };
                return emit(None, &to_json(&summary)?);
            }
            (text, true, "")
        }
        Command::Cover(CoverCmd::Check { cover, probs }) => {
            let cover: Cover = read_json(&cover)?;
            let m = cover_check(&cover, &collection(probs)?)?;
            (to_json(&m)?, true, "")
        }
        Command::Pbd(cmd) => (pbd(cmd)?, true, ""),
        Command::Gen(cmd) => (gen(cmd)?, true, ""),
        Command::Sweep(SweepCmd::Tv { n_max, grid, d }) => {
            (into_string(sweep::tv_sweep(n_max, grid, &d)?)?, true, "")
        }
        Command::Sweep(SweepCmd::Sampler {
            game,
            epsilon,
            seeds,
            trials,
            mode,
        }) => {
            seeds.iter().for_each(|&s| announce_seed(s));
            let g = read_bimatrix(&game)?;
            (into_string(sweep::sampler_sweep(&g, &epsilon, &seeds, trials, mode.into())?)?, true, "")
        }
    };
    if !text.is_empty() {
        emit(out, &text)?;
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::NotFound(failure.into()))
    }
}

fn into_string(bytes: Vec<u8>) -> CliResult<String> {
    String::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))
}

fn pbd(cmd: PbdCmd) -> CliResult<String> {
    match cmd {
        PbdCmd::Pmf { probs } => to_json(&pbd_pmf(&collection(probs)?)),
        PbdCmd::Tv { a, b } => {
            let tv = tv_distance(&pbd_pmf(&collection(a)?), &pbd_pmf(&collection(b)?));
            to_json(&serde_json::json!({ "tv": tv }))
        }
        PbdCmd::Moments { probs, d } => {
            let c = collection(probs)?;
            to_json(&MomentsReport {
                power_sums: power_sums(&c, d),
                raw_moments: raw_moments(&pbd_pmf(&c), d),
                profile: moment_profile(&c, d),
            })
        }
        PbdCmd::Roos { probs, order, p } => {
            let c = collection(probs)?;
            let p = p.unwrap_or_else(|| c.mean_prob());
            let m = roos_expansion(&c, p, order)?;
            to_json(&RoosReport {
                p,
                order,
                values: m.values().to_vec(),
                total_mass: m.total_mass(),
                bound: roos_bound(order),
            })
        }
    }
}

fn gen(cmd: GenCmd) -> CliResult<String> {
    match cmd {
        GenCmd::Gs { ell, s } => {
            let spec = match s {
                Some(s) => GsSpec::new(ell, s)?,
                None => GsSpec::first(ell)?,
            };
            to_json(&gen_gs_game(&spec)?)
        }
        GenCmd::Gp { k, delta, p } => to_json(&gen_gp_game(k, delta, p)?),
        GenCmd::Random { kind, n, k, seed } => {
            announce_seed(seed);
            match kind {
                RandomKind::Sparse => to_json(&gen_random_sparse(n, k, seed)?),
                RandomKind::Anonymous => to_json(&gen_random_anonymous(n, seed)?),
            }
        }
        GenCmd::Pennies { n } => {
            let g = BimatrixGame::from_fn(n, |i, j| {
                let r = if i == j { 1.0 } else { -1.0 };
                (r, -r)
            })?;
            to_json(&g)
        }
        GenCmd::AntiCoordination { n } => to_json(&anti_coordination(n)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
