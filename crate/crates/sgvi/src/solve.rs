//! One entry point over all algorithms: canonicalizes the game, runs the
//! chosen algorithm and reports results in terms of the original game.

use std::time::{Duration, Instant};

use crate::bellman::initial_bounds;
use crate::error::{Error, Result};
use crate::global::{bvi_global, si_anytime, SolveResult, SolverConfig, Status, TraceEntry};
use crate::graph::infinite_total_reward_states;
use crate::local::bvi_local;
use crate::model::{
    canonicalize, gap, Assignment, CanonicalGame, Objective, ObjectiveKind, Player, StochasticGame, Strategy,
};
use crate::oracle::{exact_value, DEFAULT_PROFILE_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Bounded value iteration reducing to MDPs.
    Global,
    /// Bounded value iteration with deflation and inflation.
    Local,
    /// Anytime strategy iteration.
    StrategyIteration,
    /// Strategy enumeration.
    Oracle,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Global => "global",
            Algorithm::Local => "local",
            Algorithm::StrategyIteration => "si",
            Algorithm::Oracle => "oracle",
        }
    }
}

/// Result of [`solve`], indexed like the input game.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub algorithm: Algorithm,
    pub lower: Assignment,
    pub upper: Assignment,
    pub s0: usize,
    pub epsilon: f64,
    pub iterations: usize,
    pub status: Status,
    /// Action indices of the original game; `None` at states of the other
    /// player and at removed states.
    pub sigma: Strategy,
    pub tau: Strategy,
    pub trace: Vec<TraceEntry>,
    pub wall_time: Duration,
}

impl Solution {
    /// `upper(s0) - lower(s0)`.
    pub fn gap(&self) -> f64 {
        gap(self.upper[self.s0], self.lower[self.s0])
    }
}

/// Solves `objective` on `game` from `s0` to precision `eps` (ignored by
/// [`Algorithm::Oracle`]).
///
/// Total-reward states with infinite value are reported with both bounds
/// `+inf`. If `s0` is one of them nothing is iterated and the other states
/// keep their initial bounds. Mean-payoff values are reported for the
/// original rewards even when the solver ran on shifted ones.
pub fn solve(
    game: &StochasticGame,
    objective: &Objective,
    s0: usize,
    eps: f64,
    algorithm: Algorithm,
    config: &SolverConfig,
) -> Result<Solution> {
    let start = Instant::now();
    if s0 >= game.num_states() {
        return Err(Error::UnknownState(s0.to_string()));
    }
    if algorithm != Algorithm::Oracle && !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive and finite, got {eps}")));
    }
    if algorithm == Algorithm::StrategyIteration && objective.kind == ObjectiveKind::TotalReward {
        return Err(Error::Unsupported("SI unsupported for total reward".into()));
    }
    if objective.kind == ObjectiveKind::TotalReward && infinite_total_reward_states(game).iter().all(|&b| b) {
        objective.validate(game)?;
        let infinite = Assignment::constant(game.num_states(), f64::INFINITY);
        let none = Strategy { choices: vec![None; game.num_states()] };
        return Ok(Solution {
            algorithm,
            lower: infinite.clone(),
            upper: infinite,
            s0,
            epsilon: eps,
            iterations: 0,
            status: Status::Converged,
            sigma: none.clone(),
            tau: none,
            trace: Vec::new(),
            wall_time: start.elapsed(),
        });
    }
    let canonical = canonicalize(game, objective)?;
    let Some(c0) = canonical.lookup(s0) else {
        let (lower, upper) = initial_bounds(&canonical.game, &canonical.objective);
        let raw = SolveResult {
            lower,
            upper,
            s0: 0,
            epsilon: eps,
            iterations: 0,
            status: Status::Converged,
            profile: crate::model::StrategyProfile::first_actions(&canonical.game),
            trace: Vec::new(),
            wall_time: Duration::ZERO,
        };
        let mut solution = lift(game, &canonical, raw, algorithm, s0);
        solution.sigma = Strategy { choices: vec![None; game.num_states()] };
        solution.tau = solution.sigma.clone();
        solution.wall_time = start.elapsed();
        return Ok(solution);
    };
    let (cgame, cobjective) = (&canonical.game, &canonical.objective);
    let raw = match algorithm {
        Algorithm::Global => bvi_global(cgame, cobjective, c0, eps, config)?,
        Algorithm::Local => bvi_local(cgame, cobjective, c0, eps, config)?,
        Algorithm::StrategyIteration => si_anytime(cgame, cobjective, c0, eps, config)?,
        Algorithm::Oracle => {
            let result = exact_value(cgame, cobjective, DEFAULT_PROFILE_LIMIT)?;
            let values = result.assignment();
            let profile = crate::model::StrategyProfile::join(cgame, &result.sigma, &result.tau)?;
            SolveResult {
                lower: values.clone(),
                upper: values,
                s0: c0,
                epsilon: eps,
                iterations: 0,
                status: Status::Converged,
                profile,
                trace: Vec::new(),
                wall_time: Duration::ZERO,
            }
        }
    };
    let mut solution = lift(game, &canonical, raw, algorithm, s0);
    solution.wall_time = start.elapsed();
    Ok(solution)
}

fn lift(
    game: &StochasticGame,
    canonical: &CanonicalGame,
    raw: SolveResult,
    algorithm: Algorithm,
    s0: usize,
) -> Solution {
    let n = game.num_states();
    let shift = canonical.report.reward_shift;
    let value_at = |values: &Assignment, s: usize| match canonical.lookup(s) {
        Some(c) => values[c] - shift,
        None => f64::INFINITY,
    };
    let strategy = |player: Player| Strategy {
        choices: (0..n)
            .map(|s| {
                let c = canonical.lookup(s)?;
                (game.owner(s) == player).then(|| canonical.original_action(c, raw.profile.choices[c]))
            })
            .collect(),
    };
    Solution {
        algorithm,
        lower: Assignment((0..n).map(|s| value_at(&raw.lower, s)).collect()),
        upper: Assignment((0..n).map(|s| value_at(&raw.upper, s)).collect()),
        s0,
        epsilon: raw.epsilon,
        iterations: raw.iterations,
        status: raw.status,
        sigma: strategy(Player::Max),
        tau: strategy(Player::Min),
        trace: raw
            .trace
            .iter()
            .map(|t| TraceEntry { iteration: t.iteration, lower: t.lower - shift, upper: t.upper - shift })
            .collect(),
        wall_time: raw.wall_time,
    }
}
