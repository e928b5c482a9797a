//! Bounded value iteration by reduction to MDPs, and its strategy-iteration
//! variant.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use crate::bellman::{
    bellman_update_with, init_vi, initial_bounds, optimal_actions, q_value, KeepPrevious, Recommender, SweepMode,
    TIE_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::mdpsolve::{solve_mdp, NumericGame};
use crate::model::{gap, induce, Assignment, Objective, ObjectiveKind, Player, StochasticGame, StrategyProfile};

pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;
/// Iterations over which the gap must shrink before the inner MDP precision
/// is halved.
pub const STALL_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Clamp the fixpoint updates of the local algorithm so bounds never get
    /// worse. The global algorithm always clamps.
    pub monotone: bool,
    /// Record the bounds at the initial state after every iteration.
    pub trace: bool,
    pub sweep_mode: SweepMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            monotone: true,
            trace: false,
            sweep_mode: SweepMode::Jacobi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    IterationCapped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::IterationCapped => "iteration-capped",
        }
    }
}

/// Bounds at the initial state after one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub lower: Assignment,
    pub upper: Assignment,
    pub s0: usize,
    pub epsilon: f64,
    pub iterations: usize,
    pub status: Status,
    /// Strategies recommended in the last iteration.
    pub profile: StrategyProfile,
    pub trace: Vec<TraceEntry>,
    pub wall_time: Duration,
}

impl SolveResult {
    /// `upper(s0) - lower(s0)`.
    pub fn gap(&self) -> f64 {
        gap(self.upper[self.s0], self.lower[self.s0])
    }
}

/// The state of a solver after one iteration, passed to observers.
#[derive(Debug, Clone, Copy)]
pub struct IterationView<'a> {
    pub iteration: usize,
    pub lower: &'a Assignment,
    pub upper: &'a Assignment,
    pub profile: &'a StrategyProfile,
}

pub(crate) fn check_inputs(game: &StochasticGame, objective: &Objective, s0: usize, eps: f64) -> Result<()> {
    objective.validate(game)?;
    if s0 >= game.num_states() {
        return Err(Error::UnknownState(s0.to_string()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("precision must be positive, got {eps}")));
    }
    Ok(())
}

/// The inner precision is never halved below this.
pub const MIN_INNER_PRECISION: f64 = 1e-12;

/// Halves the inner precision when the gap stops shrinking.
pub(crate) struct PrecisionSchedule {
    pub eps: f64,
    history: Vec<f64>,
}

impl PrecisionSchedule {
    pub fn new(eps: f64) -> Self {
        PrecisionSchedule { eps, history: Vec::new() }
    }

    pub fn record(&mut self, gap: f64) {
        self.history.push(gap);
        if self.history.len() > STALL_WINDOW {
            let before = self.history[self.history.len() - 1 - STALL_WINDOW];
            if !(before - gap >= self.eps) {
                self.eps = (self.eps / 2.0).max(MIN_INNER_PRECISION);
                self.history.clear();
            }
        }
    }
}

/// Bounded value iteration with global reasoning. Every iteration runs one
/// step of value iteration, recommends strategies from it, and solves the
/// two MDPs obtained by fixing either recommended strategy: the
/// Minimizer-controlled one gives a lower bound, the Maximizer-controlled
/// one an upper bound.
pub fn bvi_global(
    game: &StochasticGame,
    objective: &Objective,
    s0: usize,
    eps: f64,
    config: &SolverConfig,
) -> Result<SolveResult> {
    bvi_global_with(game, objective, s0, eps, config, &mut KeepPrevious::new(game), |_| {})
}

/// [`bvi_global`] with a custom recommender and an observer called after
/// every iteration.
pub fn bvi_global_with<R: Recommender + ?Sized>(
    game: &StochasticGame,
    objective: &Objective,
    s0: usize,
    eps: f64,
    config: &SolverConfig,
    recommender: &mut R,
    mut observe: impl FnMut(&IterationView),
) -> Result<SolveResult> {
    check_inputs(game, objective, s0, eps)?;
    let start = Instant::now();
    let mut x = init_vi(game, objective);
    let (mut lower, mut upper) = initial_bounds(game, objective);
    let mut schedule = PrecisionSchedule::new(eps / 4.0);
    let mut trace = Vec::new();
    let mut profile = StrategyProfile::first_actions(game);
    let mut status = Status::IterationCapped;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        profile = recommender.recommend(game, objective, &x);
        x = bellman_update_with(game, objective, &x, config.sweep_mode);
        let min_mdp = induce(game, &profile.sigma(game), Player::Max)?;
        let max_mdp = induce(game, &profile.tau(game), Player::Min)?;
        lower = lower.pointwise_max(&solve_mdp(&min_mdp, objective, schedule.eps)?.lower);
        upper = upper.pointwise_min(&solve_mdp(&max_mdp, objective, schedule.eps)?.upper);
        observe(&IterationView { iteration: iterations, lower: &lower, upper: &upper, profile: &profile });
        if config.trace {
            trace.push(TraceEntry { iteration: iterations, lower: lower[s0], upper: upper[s0] });
        }
        let g = gap(upper[s0], lower[s0]);
        if g <= eps {
            status = Status::Converged;
            break;
        }
        schedule.record(g);
    }
    Ok(SolveResult { lower, upper, s0, epsilon: eps, iterations, status, profile, trace, wall_time: start.elapsed() })
}

/// Strategy iteration with anytime bounds. The current Maximizer strategy is
/// evaluated exactly (up to the inner precision), Minimizer's best response
/// from that evaluation yields an upper bound, and the Maximizer strategy is
/// improved where some action is strictly better, keeping its choice on
/// ties. For mean payoff the comparison uses the gain first and the bias of
/// the evaluated profile second. Not available for total reward.
pub fn si_anytime(
    game: &StochasticGame,
    objective: &Objective,
    s0: usize,
    eps: f64,
    config: &SolverConfig,
) -> Result<SolveResult> {
    si_anytime_with(game, objective, s0, eps, config, |_| {})
}

/// The responding player's choice at `s` for the next bound: among
/// `candidates`, the actions that are optimal against the evaluation, the
/// one that looks best for `player` under `bound` (its side of the current
/// bounds), preferring the solver's response on ties. Any such action is
/// still a best response.
fn guided_response(
    game: &StochasticGame,
    candidates: Vec<usize>,
    bound: &Assignment,
    s: usize,
    response: usize,
    player: Player,
) -> usize {
    let score = |a: usize| q_value(game, bound, s, a);
    let best = candidates.iter().map(|&a| score(a)).fold(player.worst(), |acc, v| player.better(acc, v));
    let good = |a: usize| score(a) == best || (score(a) - best).abs() <= TIE_TOLERANCE;
    if !candidates.contains(&response) || good(response) {
        return response;
    }
    candidates.into_iter().find(|&a| good(a)).unwrap_or(response)
}

/// Tolerance of gain and bias comparisons in mean-payoff strategy iteration.
const GAIN_BIAS_TOLERANCE: f64 = 1e-9;
/// Improvement rounds of Minimizer's policy iteration per evaluation.
const MAX_RESPONSE_ROUNDS: usize = 10_000;

/// Gain and bias of one strategy profile.
struct GainBias {
    gain: Vec<f64>,
    bias: Vec<f64>,
}

impl GainBias {
    fn of(numeric: &NumericGame<f64>, choices: &[usize]) -> Result<Self> {
        let (gain, bias) = numeric.chain(choices).gain_bias()?;
        Ok(GainBias { gain, bias })
    }

    /// Expected gain after playing `a` at `s`, and the reward plus the
    /// expected bias.
    fn key(&self, numeric: &NumericGame<f64>, s: usize, a: usize) -> (f64, f64) {
        numeric.actions[s][a]
            .iter()
            .fold((0.0, numeric.reward[s]), |(g, h), &(t, p)| (g + p * self.gain[t], h + p * self.bias[t]))
    }
}

fn compare_keys(a: (f64, f64), b: (f64, f64)) -> Ordering {
    let cmp = |x: f64, y: f64| {
        if x > y + GAIN_BIAS_TOLERANCE {
            Ordering::Greater
        } else if x < y - GAIN_BIAS_TOLERANCE {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    };
    cmp(a.0, b.0).then(cmp(a.1, b.1))
}

/// Moves `player`'s choices to strictly better actions under `eval`,
/// keeping the current choice on ties. Returns whether anything changed.
fn improve(
    game: &StochasticGame,
    numeric: &NumericGame<f64>,
    eval: &GainBias,
    player: Player,
    choices: &mut [usize],
) -> bool {
    let wanted = if player == Player::Max { Ordering::Greater } else { Ordering::Less };
    let mut changed = false;
    for s in (0..game.num_states()).filter(|&s| game.owner(s) == player) {
        let mut best = (choices[s], eval.key(numeric, s, choices[s]));
        for a in 0..game.actions(s).len() {
            let key = eval.key(numeric, s, a);
            if compare_keys(key, best.1) == wanted {
                best = (a, key);
            }
        }
        if best.0 != choices[s] {
            choices[s] = best.0;
            changed = true;
        }
    }
    changed
}

/// Policy iteration for Minimizer against the Maximizer choices in
/// `choices`, improving gain first and bias second. On return the
/// Minimizer choices satisfy both optimality equations of the evaluation.
fn minimizer_response(game: &StochasticGame, numeric: &NumericGame<f64>, choices: &mut [usize]) -> Result<GainBias> {
    let mut eval = GainBias::of(numeric, choices)?;
    for _ in 0..MAX_RESPONSE_ROUNDS {
        if !improve(game, numeric, &eval, Player::Min, choices) {
            break;
        }
        eval = GainBias::of(numeric, choices)?;
    }
    Ok(eval)
}

pub fn si_anytime_with(
    game: &StochasticGame,
    objective: &Objective,
    s0: usize,
    eps: f64,
    config: &SolverConfig,
    mut observe: impl FnMut(&IterationView),
) -> Result<SolveResult> {
    check_inputs(game, objective, s0, eps)?;
    if objective.kind == ObjectiveKind::TotalReward {
        return Err(Error::Unsupported("strategy iteration does not support total reward".into()));
    }
    let start = Instant::now();
    let n = game.num_states();
    let numeric = match objective.kind {
        ObjectiveKind::MeanPayoff => Some(NumericGame::<f64>::from_game(game)?),
        _ => None,
    };
    // Safety is a reachability game for Minimizer, so Minimizer's strategy
    // is the one improved.
    let improver = if objective.kind == ObjectiveKind::Safety { Player::Min } else { Player::Max };
    let responder = improver.opponent();
    let (mut lower, mut upper) = initial_bounds(game, objective);
    let mut schedule = PrecisionSchedule::new(eps / 4.0);
    let mut profile = StrategyProfile::first_actions(game);
    let mut trace = Vec::new();
    let mut status = Status::IterationCapped;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let fixed = profile.strategy_of(game, improver);
        let evaluation = solve_mdp(&induce(game, &fixed, improver)?, objective, schedule.eps)?;
        let (x, responder_bound) = match improver {
            Player::Max => (&evaluation.lower, &upper),
            Player::Min => (&evaluation.upper, &lower),
        };
        let responder_states = (0..n).filter(|&s| game.owner(s) == responder);
        let gain_bias = match &numeric {
            Some(numeric) => {
                let mut choices = profile.choices.clone();
                for s in responder_states.clone() {
                    choices[s] = evaluation.strategy[s];
                }
                let eval = minimizer_response(game, numeric, &mut choices)?;
                for s in responder_states {
                    let response = eval.key(numeric, s, choices[s]);
                    let candidates = (0..game.actions(s).len())
                        .filter(|&a| compare_keys(eval.key(numeric, s, a), response) == Ordering::Equal)
                        .collect();
                    profile.choices[s] = guided_response(game, candidates, responder_bound, s, choices[s], responder);
                }
                Some(eval)
            }
            None => {
                for s in responder_states {
                    let candidates = optimal_actions(game, x, s, schedule.eps.max(TIE_TOLERANCE));
                    profile.choices[s] =
                        guided_response(game, candidates, responder_bound, s, evaluation.strategy[s], responder);
                }
                None
            }
        };
        let response =
            solve_mdp(&induce(game, &profile.strategy_of(game, responder), responder)?, objective, schedule.eps)?;
        let (new_lower, new_upper) = match improver {
            Player::Max => (&evaluation.lower, &response.upper),
            Player::Min => (&response.lower, &evaluation.upper),
        };
        lower = lower.pointwise_max(new_lower);
        upper = upper.pointwise_min(new_upper);
        observe(&IterationView { iteration: iterations, lower: &lower, upper: &upper, profile: &profile });
        if config.trace {
            trace.push(TraceEntry { iteration: iterations, lower: lower[s0], upper: upper[s0] });
        }
        let g = gap(upper[s0], lower[s0]);
        if g <= eps {
            status = Status::Converged;
            break;
        }
        schedule.record(g);
        if let (Some(numeric), Some(eval)) = (&numeric, &gain_bias) {
            improve(game, numeric, eval, improver, &mut profile.choices);
            continue;
        }
        for s in (0..n).filter(|&s| game.owner(s) == improver) {
            let current = q_value(game, x, s, profile.choices[s]);
            let values: Vec<f64> = (0..game.actions(s).len()).map(|a| q_value(game, x, s, a)).collect();
            let best = values.iter().copied().fold(improver.worst(), |acc, v| improver.better(acc, v));
            if (best - current).abs() > schedule.eps && improver.better(best, current) == best {
                profile.choices[s] = values.iter().position(|&v| v == best).expect("best is attained");
            }
        }
    }
    Ok(SolveResult { lower, upper, s0, epsilon: eps, iterations, status, profile, trace, wall_time: start.elapsed() })
}
