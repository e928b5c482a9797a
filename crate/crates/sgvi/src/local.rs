//! Bounded value iteration with local reasoning: fixpoint updates on the
//! bounds, corrected on end components of the induced MDPs by comparing
//! staying forever with the best exit.

use std::collections::HashMap;
use std::time::Instant;

use crate::bellman::{
    bellman_update_with, fixpoint_residual, fixpoint_update, init_vi, initial_bounds, q_value, KeepPrevious,
    Recommender,
};
use crate::error::{Error, Result};
use crate::global::{check_inputs, IterationView, SolveResult, SolverConfig, Status, TraceEntry};
use crate::graph::{mecs_within, msecs, EndComponent, ExitAction};
use crate::mdpsolve::{mean_payoff_span, solve_mdp, StopThreshold};
use crate::model::{
    gap, induce, restrict, Assignment, Objective, ObjectiveKind, Player, StochasticGame, StrategyProfile,
};
use crate::oracle::{exact_value, DEFAULT_PROFILE_LIMIT};

/// Tolerance of the simple-end-component predicates.
pub const SEC_TOLERANCE: f64 = 1e-9;
/// Distances between an assignment and the value below this are ignored by
/// [`find_spurious_fixpoint_sec`].
pub const SPURIOUS_THRESHOLD: f64 = 1e-6;
/// Precision used for staying values in exact mode.
pub const EXACT_STAY_PRECISION: f64 = 1e-12;

/// A maximal end component of an induced MDP, a guess for where the
/// bounds of the game may be stuck.
#[derive(Debug, Clone, PartialEq)]
pub struct SecCandidate {
    pub ec: EndComponent,
    /// The player whose strategy was fixed to induce the MDP.
    pub fixed: Player,
    /// Actions leaving the component, of both players.
    pub exits: Vec<ExitAction>,
}

/// Candidates of the MDP obtained by fixing `fixed`'s strategy.
pub fn sec_candidates(mdp: &StochasticGame, objective: &Objective, fixed: Player) -> Result<Vec<SecCandidate>> {
    Ok(msecs(mdp, objective, fixed)?
        .into_iter()
        .map(|ec| {
            let exits = ec.exits(mdp);
            SecCandidate { ec, fixed, exits }
        })
        .collect())
}

/// How to compute a staying value.
#[derive(Debug, Clone, PartialEq)]
pub enum StayMode {
    /// As precisely as possible: games are solved by enumeration, MDPs to
    /// [`EXACT_STAY_PRECISION`].
    Exact,
    /// An interval of width at most `eps` (mean payoff), possibly cut short
    /// once it passes `stop`.
    Bounds { eps: f64, warm_start: Option<Assignment>, stop: Option<StopThreshold> },
}

/// Value of staying inside an end component forever, per component state.
#[derive(Debug, Clone, PartialEq)]
pub struct StayValue {
    /// Aligned with the component's states.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Last mean-payoff iterate, for warm starts.
    pub iterate: Option<Assignment>,
}

impl StayValue {
    fn constant(len: usize, lower: f64, upper: f64) -> Self {
        StayValue { lower: vec![lower; len], upper: vec![upper; len], iterate: None }
    }
}

/// Value each state of `ec` obtains when play never leaves it.
///
/// Reachability: 1 if the component contains a target, else 0. Safety: 0 if
/// it contains an avoided state, else 1. Total reward: when Maximizer
/// chooses, infinite if a reward is positive, else 0; when Minimizer
/// chooses, infinite if Minimizer cannot settle in a zero-reward part, else
/// the total reward collected before settling. Mean payoff: the gain of the
/// restricted game.
pub fn staying_value(
    mdp: &StochasticGame,
    ec: &EndComponent,
    objective: &Objective,
    mode: &StayMode,
) -> Result<StayValue> {
    let len = ec.states.len();
    let contains_target = ec.states.iter().any(|&s| objective.is_target(s));
    match objective.kind {
        ObjectiveKind::Reachability => {
            let v = if contains_target { 1.0 } else { 0.0 };
            Ok(StayValue::constant(len, v, v))
        }
        ObjectiveKind::Safety => {
            let v = if contains_target { 0.0 } else { 1.0 };
            Ok(StayValue::constant(len, v, v))
        }
        ObjectiveKind::TotalReward => {
            let sub = restrict(mdp, ec)?;
            let positive: Vec<bool> = (0..len).map(|i| sub.reward(i) > 0.0).collect();
            if !positive.iter().any(|&p| p) {
                return Ok(StayValue::constant(len, 0.0, 0.0));
            }
            match sub.single_chooser()? {
                Some(Player::Min) => {
                    let allowed: Vec<Vec<bool>> = (0..len).map(|i| vec![!positive[i]; sub.actions(i).len()]).collect();
                    if mecs_within(&sub, &allowed).is_empty() {
                        return Ok(StayValue::constant(len, f64::INFINITY, f64::INFINITY));
                    }
                    let sol = solve_mdp(&sub, objective, EXACT_STAY_PRECISION.max(1e-9))?;
                    Ok(StayValue { lower: sol.lower.0, upper: sol.upper.0, iterate: None })
                }
                _ => Ok(StayValue::constant(len, f64::INFINITY, f64::INFINITY)),
            }
        }
        ObjectiveKind::MeanPayoff => {
            let sub = restrict(mdp, ec)?;
            match mode {
                StayMode::Exact => match sub.single_chooser() {
                    Ok(_) => {
                        let span = mean_payoff_span(&sub, EXACT_STAY_PRECISION, None, None);
                        Ok(StayValue {
                            iterate: Some(span.iterate),
                            ..StayValue::constant(len, span.lower, span.upper)
                        })
                    }
                    Err(Error::TwoOwner) => {
                        let values = exact_value(&sub, objective, DEFAULT_PROFILE_LIMIT)?.assignment();
                        Ok(StayValue { lower: values.0.clone(), upper: values.0, iterate: None })
                    }
                    Err(e) => Err(e),
                },
                StayMode::Bounds { eps, warm_start, stop } => {
                    let span = mean_payoff_span(&sub, *eps, warm_start.as_ref(), *stop);
                    Ok(StayValue { iterate: Some(span.iterate), ..StayValue::constant(len, span.lower, span.upper) })
                }
            }
        }
    }
}

/// Best value `player` can get by leaving `ec` through one of its own
/// exits, evaluated with `f`. `-inf` (Maximizer) or `+inf` (Minimizer) if
/// there is no such exit.
pub fn exit_value(game: &StochasticGame, f: &[f64], ec: &EndComponent, player: Player) -> f64 {
    ec.exits(game)
        .into_iter()
        .filter(|e| game.owner(e.state) == player)
        .map(|e| q_value(game, f, e.state, e.action))
        .fold(player.worst(), |acc, v| player.better(acc, v))
}

/// Caps the upper bound on `ec` by the better of staying and Maximizer's
/// best exit: `min(u_hat(s), max(stay.upper(s), exit_max))`.
pub fn deflate(game: &StochasticGame, u_hat: &Assignment, ec: &EndComponent, stay: &StayValue) -> Assignment {
    let exit = exit_value(game, u_hat, ec, Player::Max);
    let mut out = u_hat.clone();
    for (i, &s) in ec.states.iter().enumerate() {
        out[s] = u_hat[s].min(stay.upper[i].max(exit));
    }
    out
}

/// Raises the lower bound on `ec` to the worse of staying and Minimizer's
/// best exit: `max(l_hat(s), min(stay.lower(s), exit_min))`.
pub fn inflate(game: &StochasticGame, l_hat: &Assignment, ec: &EndComponent, stay: &StayValue) -> Assignment {
    let exit = exit_value(game, l_hat, ec, Player::Min);
    let mut out = l_hat.clone();
    for (i, &s) in ec.states.iter().enumerate() {
        out[s] = l_hat[s].max(stay.lower[i].min(exit));
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    gap(a, b).abs() <= SEC_TOLERANCE
}

/// `f` is a fixpoint on `ec` using the component's own actions:
/// `f(s) = offset(s) + f(s, a)` for every component action.
pub fn sec_by_fixpoint(game: &StochasticGame, f: &[f64], objective: &Objective, ec: &EndComponent) -> bool {
    ec.actions.iter().all(|&(s, a)| close(f[s], objective.offset(game, s) + q_value(game, f, s, a)))
}

/// Offsets vanish on `ec` and `f` is constant on it.
pub fn sec_by_equal_values(game: &StochasticGame, f: &[f64], objective: &Objective, ec: &EndComponent) -> bool {
    let offsets_vanish = ec.states.iter().all(|&s| objective.offset(game, s) == 0.0);
    let first = f[ec.states[0]];
    offsets_vanish && ec.states.iter().all(|&s| close(f[s], first))
}

/// Whether `ec` is a simple end component for `f`: an end component on which
/// `f` is a fixpoint of its internal actions. Equivalently, offsets vanish
/// and `f` is constant on it.
pub fn is_sec_for(game: &StochasticGame, f: &[f64], objective: &Objective, ec: &EndComponent) -> bool {
    let by_fixpoint = sec_by_fixpoint(game, f, objective, ec);
    debug_assert_eq!(by_fixpoint, sec_by_equal_values(game, f, objective, ec), "SEC characterizations disagree");
    by_fixpoint
}

/// Locates why a fixpoint `f` differs from the value `reference`: the states
/// where `f - reference` is extremal, restricted to actions that keep the
/// fixpoint equation and stay among them, contain a simple end component for
/// `f` on which `f` differs from the value. Returns `None` when `f` matches
/// `reference` up to [`SPURIOUS_THRESHOLD`].
pub fn find_spurious_fixpoint_sec(
    game: &StochasticGame,
    objective: &Objective,
    f: &Assignment,
    reference: &Assignment,
) -> Result<Option<EndComponent>> {
    let residual = fixpoint_residual(game, objective, f);
    if residual > SEC_TOLERANCE {
        return Err(Error::NotAFixpoint(residual));
    }
    let n = game.num_states();
    let d: Vec<f64> = (0..n).map(|s| gap(f[s], reference[s])).collect();
    let high = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let low = d.iter().copied().fold(f64::INFINITY, f64::min);
    let level = if high > SPURIOUS_THRESHOLD {
        high
    } else if low < -SPURIOUS_THRESHOLD {
        low
    } else {
        return Ok(None);
    };
    let group_tolerance = 1e3 * SEC_TOLERANCE;
    let extremal: Vec<bool> = d
        .iter()
        .map(|&v| if level.is_infinite() { v == level } else { (v - level).abs() <= group_tolerance })
        .collect();
    let allowed: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            (0..game.actions(s).len())
                .map(|a| {
                    extremal[s]
                        && game.actions(s)[a].stays_within(&extremal)
                        && gap(f[s], objective.offset(game, s) + q_value(game, f, s, a)).abs() <= group_tolerance
                })
                .collect()
        })
        .collect();
    Ok(mecs_within(game, &allowed).into_iter().next())
}

#[derive(Debug, Clone)]
struct StayCache {
    eps: f64,
    iterate: Assignment,
}

/// Mean-payoff staying values in bounds mode, refined each time the same
/// component comes back.
#[derive(Debug, Default)]
struct StayCaches {
    entries: HashMap<(Player, Vec<usize>), StayCache>,
}

const MIN_STAY_PRECISION: f64 = 1e-12;

impl StayCaches {
    #[allow(clippy::too_many_arguments)]
    fn mean_payoff(
        &mut self,
        mdp: &StochasticGame,
        ec: &EndComponent,
        objective: &Objective,
        chooser: Player,
        eps: f64,
        x: &Assignment,
        stop: StopThreshold,
    ) -> Result<StayValue> {
        let key = (chooser, ec.states.clone());
        let (stay_eps, warm) = match self.entries.get(&key) {
            Some(cache) => ((cache.eps / 2.0).max(MIN_STAY_PRECISION), cache.iterate.clone()),
            None => (eps, ec.states.iter().map(|&s| x[s]).collect::<Vec<_>>().into()),
        };
        let mode = StayMode::Bounds { eps: stay_eps, warm_start: Some(warm), stop: Some(stop) };
        let stay = staying_value(mdp, ec, objective, &mode)?;
        if let Some(iterate) = &stay.iterate {
            self.entries.insert(key, StayCache { eps: stay_eps, iterate: iterate.clone() });
        }
        Ok(stay)
    }
}

/// Bounded value iteration with local reasoning. Each iteration applies the
/// fixpoint operator to the bounds inside the MDPs induced by the
/// recommended strategies, then deflates the upper bound on the end
/// components of the Maximizer-controlled MDP and inflates the lower bound
/// on those of the Minimizer-controlled MDP. For reachability and total
/// reward the value-iteration iterate serves as lower bound, for safety as
/// upper bound.
pub fn bvi_local(
    game: &StochasticGame,
    objective: &Objective,
    s0: usize,
    eps: f64,
    config: &SolverConfig,
) -> Result<SolveResult> {
    bvi_local_with(game, objective, s0, eps, config, &mut KeepPrevious::new(game), |_| {})
}

/// [`bvi_local`] with a custom recommender and an observer called after
/// every iteration.
pub fn bvi_local_with<R: Recommender + ?Sized>(
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
    let lower_from_iterate = matches!(objective.kind, ObjectiveKind::Reachability | ObjectiveKind::TotalReward);
    let upper_from_iterate = objective.kind == ObjectiveKind::Safety;
    let mut caches = StayCaches::default();
    let mut profile = StrategyProfile::first_actions(game);
    let mut trace = Vec::new();
    let mut status = Status::IterationCapped;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        profile = recommender.recommend(game, objective, &x);
        x = bellman_update_with(game, objective, &x, config.sweep_mode);

        if upper_from_iterate {
            upper = upper.pointwise_min(&x);
        } else {
            let max_mdp = induce(game, &profile.tau(game), Player::Min)?;
            let mut u_hat = fixpoint_update(&max_mdp, objective, &upper);
            if config.monotone {
                u_hat = u_hat.pointwise_min(&upper);
            }
            let mut next = u_hat.clone();
            for SecCandidate { ec, .. } in sec_candidates(&max_mdp, objective, Player::Min)? {
                let stay = if objective.kind == ObjectiveKind::MeanPayoff {
                    let stop = StopThreshold::UpperBelow(exit_value(&max_mdp, &u_hat, &ec, Player::Max));
                    caches.mean_payoff(&max_mdp, &ec, objective, Player::Max, eps, &x, stop)?
                } else {
                    staying_value(&max_mdp, &ec, objective, &StayMode::Exact)?
                };
                if stay.upper.iter().all(|v| v.is_infinite()) {
                    continue;
                }
                let deflated = deflate(&max_mdp, &u_hat, &ec, &stay);
                for &s in &ec.states {
                    next[s] = deflated[s];
                }
            }
            upper = next;
        }

        if lower_from_iterate {
            lower = lower.pointwise_max(&x);
        } else {
            let min_mdp = induce(game, &profile.sigma(game), Player::Max)?;
            let mut l_hat = fixpoint_update(&min_mdp, objective, &lower);
            if config.monotone {
                l_hat = l_hat.pointwise_max(&lower);
            }
            let mut next = l_hat.clone();
            for SecCandidate { ec, .. } in sec_candidates(&min_mdp, objective, Player::Max)? {
                let stay = if objective.kind == ObjectiveKind::MeanPayoff {
                    let stop = StopThreshold::LowerAbove(exit_value(&min_mdp, &l_hat, &ec, Player::Min));
                    caches.mean_payoff(&min_mdp, &ec, objective, Player::Min, eps, &x, stop)?
                } else {
                    staying_value(&min_mdp, &ec, objective, &StayMode::Exact)?
                };
                let inflated = inflate(&min_mdp, &l_hat, &ec, &stay);
                for &s in &ec.states {
                    next[s] = inflated[s];
                }
            }
            lower = next;
        }

        observe(&IterationView { iteration: iterations, lower: &lower, upper: &upper, profile: &profile });
        if config.trace {
            trace.push(TraceEntry { iteration: iterations, lower: lower[s0], upper: upper[s0] });
        }
        if gap(upper[s0], lower[s0]) <= eps {
            status = Status::Converged;
            break;
        }
    }
    Ok(SolveResult { lower, upper, s0, epsilon: eps, iterations, status, profile, trace, wall_time: start.elapsed() })
}
