//! Command-line front end. [`run`] does all the work and returns what to
//! print, so it can be tested without spawning a process.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::bellman::{fixpoint_residual, fixpoint_update, initial_bounds};
use crate::error::{Error, Result};
use crate::global::{SolverConfig, Status, DEFAULT_MAX_ITERATIONS};
use crate::graph::{infinite_total_reward_states, mecs, EndComponent};
use crate::local::{find_spurious_fixpoint_sec, is_sec_for, sec_candidates, SEC_TOLERANCE};
use crate::model::{
    canonicalize, induce, parse_game, random_game, render_game, Assignment, Objective, ObjectiveKind, Player,
    RandomGameParams, StochasticGame, Strategy,
};
use crate::oracle::{exact_value, exact_value_parallel, DEFAULT_PROFILE_LIMIT};
use crate::solve::{solve, Algorithm};

pub const SCHEMA_VERSION: u32 = 1;
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_ITERATION_CAPPED: i32 = 2;
/// Sweep limit when searching for a fixpoint to diagnose.
pub const DIAGNOSE_MAX_SWEEPS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "sgvi", version, about = "Anytime bounds for turn-based stochastic games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute lower and upper bounds on the value.
    Solve(RunConfig),
    /// List end components, candidates and spurious fixpoints.
    Diagnose(ModelArgs),
    /// Print a random game.
    Generate(GenerateArgs),
    /// Compute exact values by enumerating strategies.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    #[value(alias = "reachability")]
    Reach,
    Safety,
    #[value(alias = "tr")]
    TotalReward,
    #[value(alias = "mp")]
    MeanPayoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Global,
    Local,
    Si,
    Oracle,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Global => Algorithm::Global,
            AlgorithmArg::Local => Algorithm::Local,
            AlgorithmArg::Si => Algorithm::StrategyIteration,
            AlgorithmArg::Oracle => Algorithm::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Game file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub objective: ObjectiveArg,
    /// Target states (reachability) or states to avoid (safety).
    #[arg(long = "target", alias = "avoid", num_args = 1.., action = ArgAction::Append)]
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "local")]
    pub algorithm: AlgorithmArg,
    /// Required gap at the initial state; ignored by the oracle.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Initial state; defaults to the first state of the file.
    #[arg(long)]
    pub s0: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
    /// Never let a bound move away from the value.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub monotone: bool,
    /// Include the bounds at the initial state after every iteration.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub max_states: usize,
    #[arg(long, default_value_t = 3)]
    pub max_actions: usize,
    #[arg(long, default_value_t = 3)]
    pub max_support: usize,
    #[arg(long, default_value_t = 3)]
    pub max_reward: u32,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Largest number of strategy profiles to enumerate.
    #[arg(long, default_value_t = DEFAULT_PROFILE_LIMIT)]
    pub limit: u128,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

/// What a command prints and how the process should exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn error(message: impl std::fmt::Display) -> Self {
        Output { code: EXIT_INPUT_ERROR, stdout: String::new(), stderr: format!("error: {message}\n") }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output { code: EXIT_INPUT_ERROR, stdout: String::new(), stderr: text }
            } else {
                Output::ok(text)
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(config) => cmd_solve(config),
        Command::Diagnose(args) => cmd_diagnose(args).map(Output::ok),
        Command::Generate(args) => Ok(Output::ok(cmd_generate(args))),
        Command::Oracle(args) => cmd_oracle(args).map(Output::ok),
    };
    result.unwrap_or_else(Output::error)
}

/// Formats a number with 17 significant digits, so it reads back to the
/// same 64-bit float. Infinities become the strings `"inf"` / `"-inf"`.
pub fn format_number(x: f64) -> String {
    if x == f64::INFINITY {
        "\"inf\"".into()
    } else if x == f64::NEG_INFINITY {
        "\"-inf\"".into()
    } else if x.is_nan() {
        "\"nan\"".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Reads a number written by [`format_number`].
pub fn parse_number(value: &serde_json::Value) -> Option<f64> {
    match value {
        serde_json::Value::Number(n) => n.as_f64(),
        serde_json::Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

#[derive(Debug, Clone, Copy)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format_number(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

struct Loaded {
    game: StochasticGame,
    objective: Objective,
    targets: Vec<String>,
}

fn load(args: &ModelArgs) -> Result<Loaded> {
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| Error::Malformed(format!("cannot read {}: {e}", args.model.display())))?;
    let game = parse_game(&text)?;
    let targets = args
        .targets
        .iter()
        .map(|label| game.state_index(label).ok_or_else(|| Error::UnknownState(label.clone())))
        .collect::<Result<Vec<_>>>()?;
    let objective = match args.objective {
        ObjectiveArg::Reach => Objective::reachability(targets),
        ObjectiveArg::Safety => Objective::safety(targets),
        ObjectiveArg::TotalReward | ObjectiveArg::MeanPayoff if !args.targets.is_empty() => {
            return Err(Error::InvalidParameter("targets only apply to reachability and safety".into()));
        }
        ObjectiveArg::TotalReward => Objective::total_reward(),
        ObjectiveArg::MeanPayoff => Objective::mean_payoff(),
    };
    objective.validate(&game)?;
    let targets = objective.targets.iter().map(|&t| game.label(t).to_string()).collect();
    Ok(Loaded { game, objective, targets })
}

#[derive(Serialize)]
struct StateBounds<'a> {
    id: &'a str,
    lower: Num,
    upper: Num,
}

#[derive(Serialize)]
struct Choice<'a> {
    state: &'a str,
    action: String,
}

#[derive(Serialize)]
struct Strategies<'a> {
    max: Vec<Choice<'a>>,
    min: Vec<Choice<'a>>,
}

fn strategies<'a>(game: &'a StochasticGame, sigma: &Strategy, tau: &Strategy) -> Strategies<'a> {
    let choices = |strategy: &Strategy| {
        (0..game.num_states())
            .filter_map(|s| strategy.choice(s).map(|a| Choice { state: game.label(s), action: game.action_name(s, a) }))
            .collect()
    };
    Strategies { max: choices(sigma), min: choices(tau) }
}

#[derive(Serialize)]
struct TracePoint {
    iteration: usize,
    lower: Num,
    upper: Num,
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    schema_version: u32,
    command: &'static str,
    algorithm: &'static str,
    objective: &'static str,
    targets: &'a [String],
    s0: &'a str,
    epsilon: Num,
    status: &'static str,
    iterations: usize,
    lower: Num,
    upper: Num,
    gap: Num,
    states: Vec<StateBounds<'a>>,
    strategies: Strategies<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TracePoint>>,
    wall_time_ms: Num,
}

/// Runs `solve`. Exit code 0 when converged, 2 when the iteration cap was
/// hit (the bounds are still sound).
pub fn cmd_solve(config: &RunConfig) -> Result<Output> {
    let Loaded { game, objective, targets } = load(&config.model)?;
    let s0 = match &config.s0 {
        Some(label) => game.state_index(label).ok_or_else(|| Error::UnknownState(label.clone()))?,
        None => 0,
    };
    let solver_config = SolverConfig {
        max_iterations: config.max_iterations,
        monotone: config.monotone,
        trace: config.trace,
        ..SolverConfig::default()
    };
    let solution = solve(&game, &objective, s0, config.epsilon, config.algorithm.into(), &solver_config)?;
    let code = match solution.status {
        Status::Converged => EXIT_OK,
        Status::IterationCapped => EXIT_ITERATION_CAPPED,
    };
    let stdout = match config.format {
        OutputFormat::Json => {
            let doc = SolveDoc {
                schema_version: SCHEMA_VERSION,
                command: "solve",
                algorithm: solution.algorithm.as_str(),
                objective: objective.kind.as_str(),
                targets: &targets,
                s0: game.label(s0),
                epsilon: Num(solution.epsilon),
                status: solution.status.as_str(),
                iterations: solution.iterations,
                lower: Num(solution.lower[s0]),
                upper: Num(solution.upper[s0]),
                gap: Num(solution.gap()),
                states: (0..game.num_states())
                    .map(|s| StateBounds {
                        id: game.label(s),
                        lower: Num(solution.lower[s]),
                        upper: Num(solution.upper[s]),
                    })
                    .collect(),
                strategies: strategies(&game, &solution.sigma, &solution.tau),
                trace: config.trace.then(|| {
                    solution
                        .trace
                        .iter()
                        .map(|t| TracePoint { iteration: t.iteration, lower: Num(t.lower), upper: Num(t.upper) })
                        .collect()
                }),
                wall_time_ms: Num(solution.wall_time.as_secs_f64() * 1e3),
            };
            to_json(&doc)
        }
        OutputFormat::Text => {
            let mut out = format!(
                "{} {} iterations={} s0={} gap={}\n",
                solution.algorithm.as_str(),
                solution.status.as_str(),
                solution.iterations,
                game.label(s0),
                solution.gap()
            );
            for s in 0..game.num_states() {
                let choice = solution.sigma.choice(s).or(solution.tau.choice(s)).map(|a| game.action_name(s, a));
                out += &format!(
                    "{} [{}, {}] {}\n",
                    game.label(s),
                    solution.lower[s],
                    solution.upper[s],
                    choice.unwrap_or_else(|| "-".into())
                );
            }
            out
        }
    };
    Ok(Output { code, stdout, stderr: String::new() })
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("documents serialize");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct EcDoc<'a> {
    states: Vec<&'a str>,
    actions: Vec<Choice<'a>>,
}

fn ec_doc<'a>(game: &'a StochasticGame, ec: &EndComponent) -> EcDoc<'a> {
    EcDoc {
        states: ec.states.iter().map(|&s| game.label(s)).collect(),
        actions: ec
            .actions
            .iter()
            .map(|&(s, a)| Choice { state: game.label(s), action: game.action_name(s, a) })
            .collect(),
    }
}

#[derive(Serialize)]
struct CandidateDoc<'a> {
    fixed: &'static str,
    #[serde(flatten)]
    ec: EcDoc<'a>,
    simple_for_value: bool,
}

#[derive(Serialize)]
struct SpuriousDoc<'a> {
    start: &'static str,
    sweeps: usize,
    fixpoint_reached: bool,
    fixpoint: Vec<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    end_component: Option<EcDoc<'a>>,
}

#[derive(Serialize)]
struct DiagnoseDoc<'a> {
    schema_version: u32,
    command: &'static str,
    objective: &'static str,
    targets: &'a [String],
    mecs: Vec<EcDoc<'a>>,
    infinite_total_reward_states: Vec<&'a str>,
    oracle_available: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<Vec<Num>>,
    candidates: Vec<CandidateDoc<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spurious_fixpoint: Option<SpuriousDoc<'a>>,
}

fn player_name(p: Player) -> &'static str {
    match p {
        Player::Max => "max",
        Player::Min => "min",
    }
}

/// Iterates the fixpoint operator from the trivial bound on the side where
/// spurious fixpoints appear: from above, or from below for safety.
pub fn fixpoint_from_bound(game: &StochasticGame, objective: &Objective) -> (Assignment, usize, bool) {
    let (lower, upper) = initial_bounds(game, objective);
    let mut f = if objective.kind == ObjectiveKind::Safety { lower } else { upper };
    for sweep in 1..=DIAGNOSE_MAX_SWEEPS {
        let next = fixpoint_update(game, objective, &f);
        let moved = next.max_distance(&f);
        f = next;
        if moved <= 1e-13 {
            return (f, sweep, true);
        }
    }
    let reached = fixpoint_residual(game, objective, &f) <= SEC_TOLERANCE;
    (f, DIAGNOSE_MAX_SWEEPS, reached)
}

/// Runs `diagnose`. Oracle-dependent parts are skipped when enumeration is
/// too large.
pub fn cmd_diagnose(args: &ModelArgs) -> Result<String> {
    let Loaded { game, objective, targets } = load(args)?;
    let infinite = if (0..game.num_states()).all(|s| game.reward(s) >= 0.0) {
        infinite_total_reward_states(&game)
    } else {
        vec![false; game.num_states()]
    };
    let mut doc = DiagnoseDoc {
        schema_version: SCHEMA_VERSION,
        command: "diagnose",
        objective: objective.kind.as_str(),
        targets: &targets,
        mecs: mecs(&game).iter().map(|ec| ec_doc(&game, ec)).collect(),
        infinite_total_reward_states: (0..game.num_states()).filter(|&s| infinite[s]).map(|s| game.label(s)).collect(),
        oracle_available: false,
        oracle_skipped: None,
        value: None,
        candidates: Vec::new(),
        spurious_fixpoint: None,
    };
    if objective.kind == ObjectiveKind::TotalReward && infinite.iter().all(|&b| b) {
        doc.oracle_skipped = Some("every state has infinite total reward".into());
        return Ok(to_json(&doc));
    }
    let canonical = canonicalize(&game, &objective)?;
    let (cgame, cobjective) = (&canonical.game, &canonical.objective);
    let label_of = |c: usize| game.label(canonical.report.original[c]);
    let lift_ec = |ec: &EndComponent| EcDoc {
        states: ec.states.iter().map(|&s| label_of(s)).collect(),
        actions: ec
            .actions
            .iter()
            .map(|&(s, a)| Choice { state: label_of(s), action: cgame.action_name(s, a) })
            .collect(),
    };
    let oracle = match exact_value(cgame, cobjective, DEFAULT_PROFILE_LIMIT) {
        Ok(result) => Some(result),
        Err(e @ Error::EnumerationLimit { .. }) => {
            doc.oracle_skipped = Some(e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    let (f, sweeps, reached) = fixpoint_from_bound(cgame, cobjective);
    let mut spurious = SpuriousDoc {
        start: if cobjective.kind == ObjectiveKind::Safety { "lower" } else { "upper" },
        sweeps,
        fixpoint_reached: reached,
        fixpoint: Vec::new(),
        end_component: None,
    };
    if let Some(result) = oracle {
        let value = result.assignment();
        doc.oracle_available = true;
        let shift = canonical.report.reward_shift;
        doc.value = Some(
            (0..game.num_states())
                .map(|s| Num(canonical.lookup(s).map_or(f64::INFINITY, |c| value[c] - shift)))
                .collect(),
        );
        for (fixed, strategy) in [(Player::Max, &result.sigma), (Player::Min, &result.tau)] {
            let mdp = induce(cgame, strategy, fixed)?;
            for candidate in sec_candidates(&mdp, cobjective, fixed)? {
                let simple = is_sec_for(&mdp, &value, cobjective, &candidate.ec);
                let states: Vec<&str> = candidate.ec.states.iter().map(|&s| label_of(s)).collect();
                let actions = candidate
                    .ec
                    .actions
                    .iter()
                    .map(|&(s, a)| {
                        let original = if cgame.owner(s) == fixed { strategy.choice(s).unwrap_or(a) } else { a };
                        Choice { state: label_of(s), action: cgame.action_name(s, original) }
                    })
                    .collect();
                doc.candidates.push(CandidateDoc {
                    fixed: player_name(fixed),
                    ec: EcDoc { states, actions },
                    simple_for_value: simple,
                });
            }
        }
        if reached {
            spurious.end_component = find_spurious_fixpoint_sec(cgame, cobjective, &f, &value)?.map(|ec| lift_ec(&ec));
        }
    }
    let shift = canonical.report.reward_shift;
    spurious.fixpoint =
        (0..game.num_states()).map(|s| Num(canonical.lookup(s).map_or(f64::INFINITY, |c| f[c] - shift))).collect();
    doc.spurious_fixpoint = Some(spurious);
    Ok(to_json(&doc))
}

/// Runs `generate`: the same arguments always print the same game.
pub fn cmd_generate(args: &GenerateArgs) -> String {
    let params = RandomGameParams {
        max_states: args.max_states.max(1),
        max_actions: args.max_actions.max(1),
        max_support: args.max_support.max(1),
        max_reward: args.max_reward,
        ..RandomGameParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut text = render_game(&random_game(&params, &mut rng));
    text.push('\n');
    text
}

#[derive(Serialize)]
struct ValueDoc<'a> {
    id: &'a str,
    value: Num,
}

#[derive(Serialize)]
struct OracleDoc<'a> {
    schema_version: u32,
    command: &'static str,
    objective: &'static str,
    targets: &'a [String],
    profiles: u128,
    values: Vec<ValueDoc<'a>>,
    strategies: Strategies<'a>,
    wall_time_ms: Num,
}

/// Runs `oracle` on the canonical game and reports values for the original
/// states.
pub fn cmd_oracle(args: &OracleArgs) -> Result<String> {
    let start = Instant::now();
    let Loaded { game, objective, targets } = load(&args.model)?;
    let canonical = canonicalize(&game, &objective)?;
    let result = exact_value_parallel(&canonical.game, &canonical.objective, args.limit, args.workers)?;
    let value = result.assignment();
    let shift = canonical.report.reward_shift;
    let values: Vec<f64> =
        (0..game.num_states()).map(|s| canonical.lookup(s).map_or(f64::INFINITY, |c| value[c] - shift)).collect();
    let lift = |strategy: &Strategy| Strategy {
        choices: (0..game.num_states())
            .map(|s| {
                let c = canonical.lookup(s)?;
                strategy.choice(c).map(|a| canonical.original_action(c, a))
            })
            .collect(),
    };
    if args.format == OutputFormat::Text {
        return Ok((0..game.num_states()).map(|s| format!("{} {}\n", game.label(s), values[s])).collect());
    }
    let doc = OracleDoc {
        schema_version: SCHEMA_VERSION,
        command: "oracle",
        objective: objective.kind.as_str(),
        targets: &targets,
        profiles: result.profiles,
        values: (0..game.num_states()).map(|s| ValueDoc { id: game.label(s), value: Num(values[s]) }).collect(),
        strategies: strategies(&game, &lift(&result.sigma), &lift(&result.tau)),
        wall_time_ms: Num(start.elapsed().as_secs_f64() * 1e3),
    };
    Ok(to_json(&doc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 0.0, -2.5e-300, 6.0, f64::MAX] {
            let text = format_number(x);
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(parse_number(&v), Some(x), "{text}");
        }
        assert_eq!(format_number(f64::INFINITY), "\"inf\"");
    }

    #[test]
    fn help_and_usage_errors() {
        assert_eq!(run(["sgvi", "--help"]).code, EXIT_OK);
        assert_eq!(run(["sgvi", "solve"]).code, EXIT_INPUT_ERROR);
        assert_eq!(run(["sgvi", "bogus"]).code, EXIT_INPUT_ERROR);
    }

    #[test]
    fn generate_is_deterministic() {
        let a = run(["sgvi", "generate", "--seed", "7", "--max-states", "5"]);
        let b = run(["sgvi", "generate", "--seed", "7", "--max-states", "5"]);
        assert_eq!(a, b);
        assert!(parse_game(&a.stdout).is_ok());
    }
}
