//! Game-to-game transformations.

use super::{Action, Objective, ObjectiveKind, Player, State, StochasticGame, Strategy};
use crate::error::{Error, Result};
use crate::graph::{infinite_total_reward_states, EndComponent};

/// A game in the form the solvers expect, with the bookkeeping needed to map
/// results back to the original game.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalGame {
    pub game: StochasticGame,
    pub objective: Objective,
    pub report: CanonicalReport,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CanonicalReport {
    /// For each original state, its index in the canonical game.
    pub index_map: Vec<Option<usize>>,
    /// For each canonical state, its original index.
    pub original: Vec<usize>,
    /// Original states whose total-reward value is infinite. They are
    /// removed from the canonical game.
    pub infinite_states: Vec<usize>,
    /// Constant added to every reward (mean payoff with negative rewards).
    pub reward_shift: f64,
    /// Target states that were turned into absorbing states.
    pub absorbed_targets: Vec<usize>,
    /// For each canonical state, the original index of each kept action.
    /// Empty when actions were not renumbered.
    pub action_map: Vec<Vec<usize>>,
}

impl CanonicalGame {
    /// Canonical index of an original state, `None` if it was removed.
    pub fn lookup(&self, original: usize) -> Option<usize> {
        self.report.index_map.get(original).copied().flatten()
    }

    /// Original index of action `action` of canonical state `state`.
    pub fn original_action(&self, state: usize, action: usize) -> usize {
        self.report.action_map.get(state).map_or(action, |m| m[action])
    }
}

/// Normalizes a game for solving:
/// * reachability and safety targets become absorbing,
/// * total reward removes the states with infinite value (all actions leading
///   into them are dropped, which only removes choices Minimizer never makes),
/// * mean payoff shifts rewards so the smallest one is non-negative.
///
/// Applying it twice gives the same game as applying it once.
pub fn canonicalize(game: &StochasticGame, objective: &Objective) -> Result<CanonicalGame> {
    objective.validate(game)?;
    let n = game.num_states();
    let identity = CanonicalReport {
        index_map: (0..n).map(Some).collect(),
        original: (0..n).collect(),
        ..CanonicalReport::default()
    };
    match objective.kind {
        ObjectiveKind::Reachability | ObjectiveKind::Safety => {
            let mut canonical = game.clone();
            let mut absorbed = Vec::new();
            for &t in &objective.targets {
                let state = &mut canonical.states_mut()[t];
                let is_self_loop = state.actions.len() == 1 && state.actions[0].successors == [(t, 1.0)];
                if !is_self_loop {
                    state.actions = vec![Action::new(vec![(t, 1.0)])];
                    absorbed.push(t);
                }
            }
            Ok(CanonicalGame {
                game: canonical,
                objective: objective.clone(),
                report: CanonicalReport { absorbed_targets: absorbed, ..identity },
            })
        }
        ObjectiveKind::TotalReward => {
            if let Some(s) = (0..n).find(|&s| game.reward(s) < 0.0) {
                return Err(Error::NegativeReward { state: game.label(s).into(), reward: game.reward(s) });
            }
            let infinite = infinite_total_reward_states(game);
            if !infinite.iter().any(|&b| b) {
                return Ok(CanonicalGame { game: game.clone(), objective: objective.clone(), report: identity });
            }
            let original: Vec<usize> = (0..n).filter(|&s| !infinite[s]).collect();
            let mut index_map = vec![None; n];
            for (new, &old) in original.iter().enumerate() {
                index_map[old] = Some(new);
            }
            if original.is_empty() {
                return Err(Error::Unsupported("every state has infinite total reward".into()));
            }
            let action_map: Vec<Vec<usize>> = original
                .iter()
                .map(|&s| {
                    (0..game.actions(s).len()).filter(|&a| game.actions(s)[a].support().all(|t| !infinite[t])).collect()
                })
                .collect();
            let states = original
                .iter()
                .zip(&action_map)
                .map(|(&s, kept)| {
                    let st = game.state(s);
                    let actions: Vec<Action> = kept
                        .iter()
                        .map(|&a| &st.actions[a])
                        .map(|a| Action {
                            name: a.name.clone(),
                            successors: a
                                .successors
                                .iter()
                                .filter(|e| e.1 > 0.0)
                                .map(|&(t, p)| (index_map[t].unwrap(), p))
                                .collect(),
                        })
                        .collect();
                    debug_assert!(!actions.is_empty(), "finite state {s} lost all its actions");
                    State { actions, ..st.clone() }
                })
                .collect();
            Ok(CanonicalGame {
                game: StochasticGame::from_states_unchecked(states),
                objective: objective.clone(),
                report: CanonicalReport {
                    index_map,
                    original,
                    infinite_states: (0..n).filter(|&s| infinite[s]).collect(),
                    action_map,
                    ..CanonicalReport::default()
                },
            })
        }
        ObjectiveKind::MeanPayoff => {
            let shift = (-game.min_reward()).max(0.0);
            let canonical = if shift > 0.0 { rescale_rewards(game, 1.0, shift)? } else { game.clone() };
            Ok(CanonicalGame {
                game: canonical,
                objective: objective.clone(),
                report: CanonicalReport { reward_shift: shift, ..identity },
            })
        }
    }
}

/// Replaces every reward `r` by `a * r + b`.
pub fn rescale_rewards(game: &StochasticGame, a: f64, b: f64) -> Result<StochasticGame> {
    if !(a > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("rescale needs a > 0 and finite b, got a={a}, b={b}")));
    }
    let mut out = game.clone();
    for st in out.states_mut() {
        st.reward = a * st.reward + b;
    }
    Ok(out)
}

/// Turns a discounted-reward game into a total-reward game: every action
/// continues with probability `gamma` and moves to a fresh zero-reward trap
/// with probability `1 - gamma`. The total reward of the result equals the
/// discounted reward with discount factor `gamma`.
pub fn discount_to_total_reward(game: &StochasticGame, gamma: f64) -> Result<StochasticGame> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("discount factor must lie in (0, 1), got {gamma}")));
    }
    let trap = game.num_states();
    let mut label = String::from("trap");
    while game.state_index(&label).is_some() {
        label.push('_');
    }
    let mut states: Vec<State> = game
        .states()
        .iter()
        .map(|st| State {
            actions: st
                .actions
                .iter()
                .map(|a| {
                    let mut successors: Vec<(usize, f64)> = a.successors.iter().map(|&(t, p)| (t, gamma * p)).collect();
                    successors.push((trap, 1.0 - gamma));
                    Action { name: a.name.clone(), successors }
                })
                .collect(),
            ..st.clone()
        })
        .collect();
    states.push(State { label, owner: Player::Max, reward: 0.0, actions: vec![Action::new(vec![(trap, 1.0)])] });
    Ok(StochasticGame::from_states_unchecked(states))
}

/// Mixes every action with a self-loop: stay with probability `alpha`,
/// otherwise follow the original distribution. Mean payoff is unchanged.
pub fn aperiodicity_transform(game: &StochasticGame, alpha: f64) -> Result<StochasticGame> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("aperiodicity weight must lie in (0, 1), got {alpha}")));
    }
    let mut out = game.clone();
    for (s, st) in out.states_mut().iter_mut().enumerate() {
        for action in &mut st.actions {
            for entry in &mut action.successors {
                entry.1 *= 1.0 - alpha;
            }
            match action.successors.iter_mut().find(|e| e.0 == s) {
                Some(entry) => entry.1 += alpha,
                None => {
                    action.successors.push((s, alpha));
                    action.successors.sort_by_key(|e| e.0);
                }
            }
        }
    }
    Ok(out)
}

/// Fixes `player`'s choices to `strategy`, leaving every other state as is.
/// The fixed states keep exactly one action.
pub fn induce(game: &StochasticGame, strategy: &Strategy, player: Player) -> Result<StochasticGame> {
    let mut out = game.clone();
    for (s, st) in out.states_mut().iter_mut().enumerate() {
        if st.owner != player {
            continue;
        }
        let a = strategy.choice(s).filter(|&a| a < st.actions.len()).ok_or(Error::StrategyUndefined(s))?;
        let chosen = st.actions.swap_remove(a);
        st.actions = vec![chosen];
    }
    Ok(out)
}

/// The sub-game on an end component: state `i` of the result is
/// `ec.states[i]`, and each state keeps only the component's actions.
pub fn restrict(game: &StochasticGame, ec: &EndComponent) -> Result<StochasticGame> {
    let mut position = vec![None; game.num_states()];
    for (i, &s) in ec.states.iter().enumerate() {
        position[s] = Some(i);
    }
    let mut states = Vec::with_capacity(ec.states.len());
    for &s in &ec.states {
        let st = game.state(s);
        let mut actions = Vec::new();
        for a in ec.actions_of(s) {
            let action = &st.actions[a];
            let successors = action
                .successors
                .iter()
                .filter(|e| e.1 > 0.0)
                .map(|&(t, p)| position[t].map(|i| (i, p)).ok_or(Error::NotClosed))
                .collect::<Result<Vec<_>>>()?;
            actions.push(Action { name: action.name.clone(), successors });
        }
        if actions.is_empty() {
            return Err(Error::NotClosed);
        }
        states.push(State { actions, ..st.clone() });
    }
    if states.is_empty() {
        return Err(Error::NotClosed);
    }
    Ok(StochasticGame::from_states_unchecked(states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn rescale_example() {
        let game = StochasticGame::new(vec![
            State { label: "a".into(), owner: Player::Max, reward: -1.0, actions: vec![Action::new(vec![(1, 1.0)])] },
            State { label: "b".into(), owner: Player::Max, reward: 2.0, actions: vec![Action::new(vec![(0, 1.0)])] },
        ])
        .unwrap();
        let out = rescale_rewards(&game, 1.0, 1.0).unwrap();
        assert_eq!((out.reward(0), out.reward(1)), (0.0, 3.0));
        assert!(rescale_rewards(&game, 0.0, 1.0).is_err());
    }

    #[test]
    fn discount_adds_trap() {
        let (game, _) = fixtures::cycle();
        let out = discount_to_total_reward(&game, 0.5).unwrap();
        assert_eq!(out.num_states(), 3);
        assert_eq!(out.actions(0)[0].successors, vec![(1, 0.5), (2, 0.5)]);
        assert_eq!(out.reward(2), 0.0);
        assert!(discount_to_total_reward(&game, 1.0).is_err());
    }

    #[test]
    fn aperiodicity_mixes_self_loop() {
        let (game, _) = fixtures::cycle();
        let out = aperiodicity_transform(&game, 0.5).unwrap();
        assert_eq!(out.actions(0)[0].successors, vec![(0, 0.5), (1, 0.5)]);
        assert!(aperiodicity_transform(&game, 0.0).is_err());
    }

    #[test]
    fn induce_requires_total_strategy() {
        let (game, _) = fixtures::car();
        let missing = Strategy { choices: vec![None; game.num_states()] };
        assert_eq!(induce(&game, &missing, Player::Max), Err(Error::StrategyUndefined(0)));
        let sigma = Strategy { choices: vec![Some(1), None, Some(0), Some(0)] };
        let mdp = induce(&game, &sigma, Player::Max).unwrap();
        assert_eq!(mdp.actions(0).len(), 1);
        assert_eq!(mdp.actions(0)[0].name.as_deref(), Some("go"));
        assert_eq!(mdp.actions(1).len(), 2);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let (game, objective) = fixtures::collapse();
        let once = canonicalize(&game, &objective).unwrap();
        let twice = canonicalize(&once.game, &once.objective).unwrap();
        assert_eq!(once.game, twice.game);
        assert!(twice.report.absorbed_targets.is_empty());
    }

    #[test]
    fn canonicalize_shifts_negative_mean_payoff_rewards() {
        let game = StochasticGame::new(vec![State {
            label: "a".into(),
            owner: Player::Max,
            reward: -2.0,
            actions: vec![Action::new(vec![(0, 1.0)])],
        }])
        .unwrap();
        let canonical = canonicalize(&game, &Objective::mean_payoff()).unwrap();
        assert_eq!(canonical.report.reward_shift, 2.0);
        assert_eq!(canonical.game.reward(0), 0.0);
    }

    #[test]
    fn restrict_rejects_open_sets() {
        let (game, _) = fixtures::collapse();
        let open = EndComponent::new(vec![1], vec![(1, 1)]);
        assert_eq!(restrict(&game, &open), Err(Error::NotClosed));
        let ec = EndComponent::new(vec![0, 1], vec![(0, 0), (1, 0)]);
        let sub = restrict(&game, &ec).unwrap();
        assert_eq!(sub.num_states(), 2);
        assert_eq!(sub.actions(1)[0].successors, vec![(0, 1.0)]);
    }
}
