//! Value iteration, fixpoint operators and strategy recommendation.

use crate::graph::can_reach;
use crate::model::{Assignment, Objective, ObjectiveKind, StochasticGame, StrategyProfile};

/// Ties in recommended actions are detected up to this absolute distance.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Initial vector of value iteration: the indicator of the target for
/// reachability, of the complement of the avoid set for safety, zero for the
/// reward objectives.
pub fn init_vi(game: &StochasticGame, objective: &Objective) -> Assignment {
    let n = game.num_states();
    match objective.kind {
        ObjectiveKind::Reachability => {
            (0..n).map(|s| if objective.is_target(s) { 1.0 } else { 0.0 }).collect::<Vec<_>>().into()
        }
        ObjectiveKind::Safety => {
            (0..n).map(|s| if objective.is_target(s) { 0.0 } else { 1.0 }).collect::<Vec<_>>().into()
        }
        ObjectiveKind::TotalReward | ObjectiveKind::MeanPayoff => Assignment::constant(n, 0.0),
    }
}

/// A valid lower bound on the value of every state.
pub fn init_lower(game: &StochasticGame, objective: &Objective) -> Assignment {
    let n = game.num_states();
    match objective.kind {
        ObjectiveKind::MeanPayoff => Assignment::constant(n, game.min_reward().min(0.0)),
        _ => Assignment::constant(n, 0.0),
    }
}

/// A valid upper bound on the value of every state.
///
/// For total reward the bound is the larger of `R (1 - q) / q` with
/// `R = |S| max r` and `q = p_min^|S|`, and `(|S| - 1) max r / p_min^(|S|-1)`.
/// The second term keeps the bound valid for deterministic games, where the
/// first one degenerates to zero. The game must not contain states with
/// infinite value.
pub fn init_upper(game: &StochasticGame, objective: &Objective) -> Assignment {
    let n = game.num_states();
    let bound = match objective.kind {
        ObjectiveKind::Reachability | ObjectiveKind::Safety => 1.0,
        ObjectiveKind::MeanPayoff => game.max_reward(),
        ObjectiveKind::TotalReward => total_reward_bound(n, game.min_probability(), game.max_reward()),
    };
    Assignment::constant(n, bound)
}

pub(crate) fn total_reward_bound(n: usize, p_min: f64, max_reward: f64) -> f64 {
    if max_reward <= 0.0 {
        return 0.0;
    }
    let n_f = n as f64;
    let q = p_min.powi(n as i32);
    let horizon_bound = n_f * max_reward * (1.0 - q) / q;
    let round_bound = (n_f - 1.0) * max_reward / p_min.powi(n as i32 - 1);
    horizon_bound.max(round_bound)
}

/// Lower and upper starting bounds for bounded value iteration:
/// [`init_lower`] and [`init_upper`], tightened by graph reasoning. States
/// that cannot reach the target get upper bound 0 (reachability), states
/// that cannot reach the avoid set get lower bound 1 (safety), and states
/// that cannot reach a positive reward get both bounds 0 (total reward).
pub fn initial_bounds(game: &StochasticGame, objective: &Objective) -> (Assignment, Assignment) {
    let n = game.num_states();
    let mut lower = init_lower(game, objective);
    let mut upper = init_upper(game, objective);
    match objective.kind {
        ObjectiveKind::Reachability => {
            let reach = can_reach(game, &objective.target_mask(n));
            (0..n).filter(|&s| !reach[s]).for_each(|s| upper[s] = 0.0);
        }
        ObjectiveKind::Safety => {
            let reach = can_reach(game, &objective.target_mask(n));
            (0..n).filter(|&s| !reach[s]).for_each(|s| lower[s] = 1.0);
        }
        ObjectiveKind::TotalReward => {
            let positive: Vec<bool> = (0..n).map(|s| game.reward(s) > 0.0).collect();
            let reach = can_reach(game, &positive);
            (0..n).filter(|&s| !reach[s]).for_each(|s| upper[s] = 0.0);
        }
        ObjectiveKind::MeanPayoff => {}
    }
    (lower, upper)
}

/// Expected value of `f` after playing `a` in `s`.
pub fn q_value(game: &StochasticGame, f: &[f64], s: usize, a: usize) -> f64 {
    game.actions(s)[a].expect(f)
}

/// Best action value of `s` for its owner.
pub fn best_q_value(game: &StochasticGame, f: &[f64], s: usize) -> f64 {
    best_q_value_among(game, f, s, 0..game.actions(s).len())
}

pub(crate) fn best_q_value_among(
    game: &StochasticGame,
    f: &[f64],
    s: usize,
    actions: impl Iterator<Item = usize>,
) -> f64 {
    let owner = game.owner(s);
    actions.map(|a| q_value(game, f, s, a)).fold(owner.worst(), |acc, v| owner.better(acc, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepMode {
    /// Every state reads the previous iterate.
    #[default]
    Jacobi,
    /// States read values already updated in the same sweep. Faster in
    /// practice; the correctness arguments assume [`SweepMode::Jacobi`].
    GaussSeidel,
}

/// One step of value iteration.
pub fn bellman_update(game: &StochasticGame, objective: &Objective, x: &Assignment) -> Assignment {
    bellman_update_with(game, objective, x, SweepMode::Jacobi)
}

pub fn bellman_update_with(
    game: &StochasticGame,
    objective: &Objective,
    x: &Assignment,
    mode: SweepMode,
) -> Assignment {
    let reward = objective.accumulates_reward();
    let step = |s: usize, f: &[f64]| {
        let base = if reward { game.reward(s) } else { 0.0 };
        base + best_q_value(game, f, s)
    };
    match mode {
        SweepMode::Jacobi => (0..game.num_states()).map(|s| step(s, x)).collect::<Vec<_>>().into(),
        SweepMode::GaussSeidel => {
            let mut next = x.clone();
            for s in 0..game.num_states() {
                next[s] = step(s, &next);
            }
            next
        }
    }
}

/// The fixpoint operator: `offset(s) + opt_a f(s, a)`. Its least fixpoint
/// (reachability, total reward) or greatest fixpoint (safety) is the value.
pub fn fixpoint_update(game: &StochasticGame, objective: &Objective, f: &Assignment) -> Assignment {
    (0..game.num_states()).map(|s| objective.offset(game, s) + best_q_value(game, f, s)).collect::<Vec<_>>().into()
}

/// Largest change a fixpoint update makes to `f`.
pub fn fixpoint_residual(game: &StochasticGame, objective: &Objective, f: &Assignment) -> f64 {
    fixpoint_update(game, objective, f).max_distance(f)
}

/// Recommender memory: the profile recommended last.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommenderState {
    pub profile: StrategyProfile,
    pub tolerance: f64,
}

impl RecommenderState {
    /// Starts from the first action of every state.
    pub fn new(game: &StochasticGame) -> Self {
        RecommenderState { profile: StrategyProfile::first_actions(game), tolerance: TIE_TOLERANCE }
    }
}

/// Actions within `tolerance` of the owner's best action value.
pub fn optimal_actions(game: &StochasticGame, x: &[f64], s: usize, tolerance: f64) -> Vec<usize> {
    let values: Vec<f64> = (0..game.actions(s).len()).map(|a| q_value(game, x, s, a)).collect();
    let owner = game.owner(s);
    let best = values.iter().copied().fold(owner.worst(), |acc, v| owner.better(acc, v));
    (0..values.len())
        .filter(|&a| if best.is_infinite() { values[a] == best } else { (values[a] - best).abs() <= tolerance })
        .collect()
}

/// Recommends a profile of actions that witness the value-iteration update
/// from `x`, i.e. that are optimal for `x` in every state. The previous
/// choice is kept whenever it is still optimal; otherwise the smallest
/// optimal action index is taken.
pub fn recommend(game: &StochasticGame, x: &Assignment, state: &mut RecommenderState) -> StrategyProfile {
    for s in 0..game.num_states() {
        let optimal = optimal_actions(game, x, s, state.tolerance);
        let previous = state.profile.choices[s];
        if !optimal.contains(&previous) {
            state.profile.choices[s] = optimal[0];
        }
    }
    state.profile.clone()
}

/// Turns value-iteration iterates into strategy profiles for the bounded
/// value iteration algorithms. `x` is the iterate the latest update read.
pub trait Recommender {
    fn recommend(&mut self, game: &StochasticGame, objective: &Objective, x: &Assignment) -> StrategyProfile;
}

/// The recommender that keeps previous choices on ties.
#[derive(Debug, Clone)]
pub struct KeepPrevious(pub RecommenderState);

impl KeepPrevious {
    pub fn new(game: &StochasticGame) -> Self {
        KeepPrevious(RecommenderState::new(game))
    }
}

impl Recommender for KeepPrevious {
    fn recommend(&mut self, game: &StochasticGame, _objective: &Objective, x: &Assignment) -> StrategyProfile {
        recommend(game, x, &mut self.0)
    }
}
