//! Game representation, objectives, strategies and value assignments.

mod format;
mod random;
mod transform;

use std::collections::BTreeSet;
use std::ops::{Deref, DerefMut};

pub use format::{parse_game, render_game};
pub use random::{random_game, random_game_with_states, RandomGameParams};
pub use transform::{
    aperiodicity_transform, canonicalize, discount_to_total_reward, induce, rescale_rewards, restrict, CanonicalGame,
    CanonicalReport,
};

use crate::error::{Error, Result};

/// Owner of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Max,
    Min,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Max => Player::Min,
            Player::Min => Player::Max,
        }
    }

    /// Picks the preferred of two values for this player.
    pub fn better(self, a: f64, b: f64) -> f64 {
        match self {
            Player::Max => a.max(b),
            Player::Min => a.min(b),
        }
    }

    /// Value that loses against every other value.
    pub fn worst(self) -> f64 {
        match self {
            Player::Max => f64::NEG_INFINITY,
            Player::Min => f64::INFINITY,
        }
    }
}

/// A probability distribution over successor states, sorted by state index.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub name: Option<String>,
    pub successors: Vec<(usize, f64)>,
}

impl Action {
    pub fn new(successors: Vec<(usize, f64)>) -> Self {
        let mut successors = successors;
        successors.sort_by_key(|&(t, _)| t);
        Action { name: None, successors }
    }

    pub fn named(name: impl Into<String>, successors: Vec<(usize, f64)>) -> Self {
        Action { name: Some(name.into()), ..Action::new(successors) }
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.successors.iter().filter(|&&(_, p)| p > 0.0).map(|&(t, _)| t)
    }

    /// Expected value of `f` after taking this action.
    pub fn expect(&self, f: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(t, p) in &self.successors {
            if p > 0.0 {
                acc += p * f[t];
            }
        }
        acc
    }

    pub fn stays_within(&self, member: &[bool]) -> bool {
        self.support().all(|t| member[t])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub label: String,
    pub owner: Player,
    pub reward: f64,
    pub actions: Vec<Action>,
}

/// A finite turn-based stochastic game. MDPs and Markov chains are the
/// special cases where one or both players never have a choice.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticGame {
    states: Vec<State>,
}

impl StochasticGame {
    /// Builds a game, checking that it is non-empty, that every state has an
    /// action, and that every action is a distribution over existing states.
    /// Each distribution is renormalized so that it sums to one.
    pub fn new(states: Vec<State>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyGame);
        }
        let n = states.len();
        let mut states = states;
        for state in &mut states {
            if state.actions.is_empty() {
                return Err(Error::EmptyActions { state: state.label.clone() });
            }
            if !state.reward.is_finite() {
                return Err(Error::InvalidParameter(format!("state {}: reward must be finite", state.label)));
            }
            for (index, action) in state.actions.iter_mut().enumerate() {
                action.successors.sort_by_key(|&(t, _)| t);
                for &(t, p) in &action.successors {
                    if t >= n {
                        return Err(Error::DanglingSuccessor { state: state.label.clone(), successor: t.to_string() });
                    }
                    if !(0.0..=1.0 + 1e-9).contains(&p) {
                        return Err(Error::ProbabilityRange { state: state.label.clone(), action: index, prob: p });
                    }
                }
                let sum: f64 = action.successors.iter().map(|&(_, p)| p).sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::DistributionSum { state: state.label.clone(), action: index, sum });
                }
                normalize(&mut action.successors, sum);
            }
        }
        Ok(StochasticGame { states })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, s: usize) -> &State {
        &self.states[s]
    }

    pub fn owner(&self, s: usize) -> Player {
        self.states[s].owner
    }

    pub fn reward(&self, s: usize) -> f64 {
        self.states[s].reward
    }

    pub fn actions(&self, s: usize) -> &[Action] {
        &self.states[s].actions
    }

    pub fn label(&self, s: usize) -> &str {
        &self.states[s].label
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|st| st.label == label)
    }

    /// Display name of an action: its declared name or its index.
    pub fn action_name(&self, s: usize, a: usize) -> String {
        self.states[s].actions[a].name.clone().unwrap_or_else(|| a.to_string())
    }

    /// Whether only `player` can ever have more than one action.
    pub fn choices_only_for(&self, player: Player) -> bool {
        self.states.iter().all(|st| st.owner == player || st.actions.len() <= 1)
    }

    /// The player with choices, if only one player has any.
    pub fn single_chooser(&self) -> Result<Option<Player>> {
        let max = self.states.iter().any(|st| st.owner == Player::Max && st.actions.len() > 1);
        let min = self.states.iter().any(|st| st.owner == Player::Min && st.actions.len() > 1);
        match (max, min) {
            (true, true) => Err(Error::TwoOwner),
            (true, false) => Ok(Some(Player::Max)),
            (false, true) => Ok(Some(Player::Min)),
            (false, false) => Ok(None),
        }
    }

    pub fn is_markov_chain(&self) -> bool {
        self.states.iter().all(|st| st.actions.len() == 1)
    }

    pub fn max_reward(&self) -> f64 {
        self.states.iter().map(|st| st.reward).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_reward(&self) -> f64 {
        self.states.iter().map(|st| st.reward).fold(f64::INFINITY, f64::min)
    }

    /// Smallest positive transition probability.
    pub fn min_probability(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|st| st.actions.iter())
            .flat_map(|a| a.successors.iter())
            .map(|&(_, p)| p)
            .filter(|&p| p > 0.0)
            .fold(1.0, f64::min)
    }

    pub(crate) fn states_mut(&mut self) -> &mut [State] {
        &mut self.states
    }

    pub(crate) fn from_states_unchecked(states: Vec<State>) -> Self {
        StochasticGame { states }
    }
}

/// Divides by `sum` and lets the largest entry absorb the rounding error.
fn normalize(successors: &mut [(usize, f64)], sum: f64) {
    if successors.is_empty() || sum == 0.0 || sum == 1.0 {
        return;
    }
    for entry in successors.iter_mut() {
        entry.1 /= sum;
    }
    let largest = (0..successors.len()).max_by(|&i, &j| successors[i].1.total_cmp(&successors[j].1)).unwrap_or(0);
    let rest: f64 = successors.iter().enumerate().filter(|&(i, _)| i != largest).map(|(_, e)| e.1).sum();
    successors[largest].1 = 1.0 - rest;
    // Summing in order may still miss 1.0 by an ulp; nudge until it does not,
    // so that normalizing twice changes nothing.
    for _ in 0..8 {
        let total: f64 = successors.iter().map(|e| e.1).sum();
        if total == 1.0 {
            break;
        }
        successors[largest].1 += 1.0 - total;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    Reachability,
    Safety,
    TotalReward,
    MeanPayoff,
}

impl ObjectiveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::Reachability => "reachability",
            ObjectiveKind::Safety => "safety",
            ObjectiveKind::TotalReward => "total-reward",
            ObjectiveKind::MeanPayoff => "mean-payoff",
        }
    }
}

/// What Maximizer optimizes. Reachability and safety carry a target set:
/// the states to reach, or the states to avoid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub targets: BTreeSet<usize>,
}

impl Objective {
    pub fn reachability(targets: impl IntoIterator<Item = usize>) -> Self {
        Objective { kind: ObjectiveKind::Reachability, targets: targets.into_iter().collect() }
    }

    pub fn safety(avoid: impl IntoIterator<Item = usize>) -> Self {
        Objective { kind: ObjectiveKind::Safety, targets: avoid.into_iter().collect() }
    }

    pub fn total_reward() -> Self {
        Objective { kind: ObjectiveKind::TotalReward, targets: BTreeSet::new() }
    }

    pub fn mean_payoff() -> Self {
        Objective { kind: ObjectiveKind::MeanPayoff, targets: BTreeSet::new() }
    }

    pub fn is_target(&self, s: usize) -> bool {
        self.targets.contains(&s)
    }

    /// Reward collected at `s` by one application of the fixpoint operator:
    /// the state reward for total reward, zero otherwise.
    pub fn offset(&self, game: &StochasticGame, s: usize) -> f64 {
        match self.kind {
            ObjectiveKind::TotalReward => game.reward(s),
            _ => 0.0,
        }
    }

    /// Whether value iteration adds the state reward every step.
    pub fn accumulates_reward(&self) -> bool {
        matches!(self.kind, ObjectiveKind::TotalReward | ObjectiveKind::MeanPayoff)
    }

    pub fn target_mask(&self, n: usize) -> Vec<bool> {
        (0..n).map(|s| self.is_target(s)).collect()
    }

    pub fn validate(&self, game: &StochasticGame) -> Result<()> {
        if let Some(&t) = self.targets.iter().find(|&&t| t >= game.num_states()) {
            return Err(Error::UnknownState(t.to_string()));
        }
        Ok(())
    }
}

/// Values indexed by state. `f64::INFINITY` stands for an infinite value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment(pub Vec<f64>);

impl Assignment {
    pub fn constant(n: usize, value: f64) -> Self {
        Assignment(vec![value; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Largest pointwise distance; infinite entries that agree count as zero.
    pub fn max_distance(&self, other: &Assignment) -> f64 {
        self.iter().zip(other.iter()).map(|(&a, &b)| gap(a, b).abs()).fold(0.0, f64::max)
    }

    pub fn pointwise_max(&self, other: &Assignment) -> Assignment {
        Assignment(self.iter().zip(other.iter()).map(|(&a, &b)| a.max(b)).collect())
    }

    pub fn pointwise_min(&self, other: &Assignment) -> Assignment {
        Assignment(self.iter().zip(other.iter()).map(|(&a, &b)| a.min(b)).collect())
    }
}

/// `upper - lower`, treating two equal infinities as a zero gap.
pub fn gap(upper: f64, lower: f64) -> f64 {
    if upper == lower {
        0.0
    } else {
        upper - lower
    }
}

impl Deref for Assignment {
    type Target = Vec<f64>;
    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for Assignment {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

impl From<Vec<f64>> for Assignment {
    fn from(values: Vec<f64>) -> Self {
        Assignment(values)
    }
}

/// Memoryless deterministic strategy of one player: an action index for
/// every state that player owns, `None` elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub choices: Vec<Option<usize>>,
}

impl Strategy {
    pub fn choice(&self, s: usize) -> Option<usize> {
        self.choices.get(s).copied().flatten()
    }
}

/// One action per state, covering both players.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    pub choices: Vec<usize>,
}

impl StrategyProfile {
    /// Every state plays its first action.
    pub fn first_actions(game: &StochasticGame) -> Self {
        StrategyProfile { choices: vec![0; game.num_states()] }
    }

    pub fn strategy_of(&self, game: &StochasticGame, player: Player) -> Strategy {
        Strategy {
            choices: (0..game.num_states()).map(|s| (game.owner(s) == player).then_some(self.choices[s])).collect(),
        }
    }

    pub fn sigma(&self, game: &StochasticGame) -> Strategy {
        self.strategy_of(game, Player::Max)
    }

    pub fn tau(&self, game: &StochasticGame) -> Strategy {
        self.strategy_of(game, Player::Min)
    }

    /// Joins a Maximizer and a Minimizer strategy into one profile.
    pub fn join(game: &StochasticGame, sigma: &Strategy, tau: &Strategy) -> Result<Self> {
        let choices = (0..game.num_states())
            .map(|s| {
                let strategy = if game.owner(s) == Player::Max { sigma } else { tau };
                strategy.choice(s).ok_or(Error::StrategyUndefined(s))
            })
            .collect::<Result<_>>()?;
        Ok(StrategyProfile { choices })
    }
}
