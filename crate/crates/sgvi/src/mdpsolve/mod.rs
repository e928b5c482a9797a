//! Solvers for Markov decision processes and Markov chains.
//!
//! MDPs are games in which only one player has choices. They arise from a
//! game by fixing one player's strategy.

mod chain;
mod span;

pub use chain::{solve_mc, Chain, NumericGame};
pub use span::{
    greedy_actions, mean_payoff_span, mean_payoff_span_observed, SpanResult, SpanStatus, StopThreshold,
    APERIODICITY_WEIGHT, MAX_SWEEPS,
};

use crate::bellman::{init_lower, init_upper};
use crate::error::{Error, Result};
use crate::graph::{all_actions, infinite_total_reward_states, mecs_within, EndComponent};
use crate::model::{gap, restrict, Assignment, Objective, ObjectiveKind, Player, StochasticGame};

/// Default sweep limit of [`solve_mdp`].
pub const MAX_QUOTIENT_SWEEPS: usize = 1_000_000;

/// Certified bounds on the value of every state, with a strategy for the
/// player that has choices.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedInterval {
    pub lower: Assignment,
    pub upper: Assignment,
    /// Whether `upper - lower <= eps` was reached everywhere.
    pub converged: bool,
    /// An action for every state; near-optimal for the choosing player.
    pub strategy: Vec<usize>,
}

impl CertifiedInterval {
    pub fn width(&self) -> f64 {
        self.upper.iter().zip(self.lower.iter()).map(|(&u, &l)| gap(u, l)).fold(0.0, f64::max)
    }
}

/// Which end of an interval is being iterated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

/// Node of the quotient: a single state or a collapsed end component.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientNode {
    pub states: Vec<usize>,
    /// Actions `(state, action)` available at the node. For a collapsed
    /// component these are its exits.
    pub actions: Vec<(usize, usize)>,
    /// Terminal value of staying in a collapsed component forever.
    pub stay: Option<(f64, f64)>,
    /// Value fixed in advance (infinite total reward).
    pub fixed: Option<f64>,
    pub offset: f64,
    pub component: Option<EndComponent>,
    /// Last iterate of the gain computation, for mean payoff components.
    stay_iterate: Option<Assignment>,
}

/// An MDP with every maximal end component collapsed into one node. Play in
/// the quotient cannot cycle forever outside the terminal stay choices, so
/// interval iteration on it converges from both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct Quotient {
    pub nodes: Vec<QuotientNode>,
    pub node_of: Vec<usize>,
    pub chooser: Player,
    objective: Objective,
    lower_start: f64,
    upper_start: f64,
}

impl Quotient {
    /// Collapses the MECs of `mdp`. For total reward only zero-reward MECs
    /// are collapsed and infinite states are fixed to `+inf`; for mean
    /// payoff each component's gain is computed to precision `eps / 2`.
    pub fn build(mdp: &StochasticGame, objective: &Objective, eps: f64) -> Result<Quotient> {
        objective.validate(mdp)?;
        let chooser = mdp.single_chooser()?.unwrap_or(Player::Max);
        let n = mdp.num_states();
        let infinite = match objective.kind {
            ObjectiveKind::TotalReward => infinite_total_reward_states(mdp),
            _ => vec![false; n],
        };
        // Target states keep their value whatever happens next, so they are
        // fixed and never part of a collapsed component.
        let fixed_target = match objective.kind {
            ObjectiveKind::Reachability => Some(1.0),
            ObjectiveKind::Safety => Some(0.0),
            _ => None,
        };
        let fixed: Vec<Option<f64>> = (0..n)
            .map(|s| if infinite[s] { Some(f64::INFINITY) } else { fixed_target.filter(|_| objective.is_target(s)) })
            .collect();
        let mut allowed = all_actions(mdp);
        for s in 0..n {
            let excluded = match objective.kind {
                ObjectiveKind::TotalReward => infinite[s] || mdp.reward(s) > 0.0,
                _ => fixed[s].is_some(),
            };
            if excluded {
                allowed[s].iter_mut().for_each(|b| *b = false);
            }
        }
        let components = mecs_within(mdp, &allowed);
        let mut node_of = vec![usize::MAX; n];
        let mut nodes = Vec::new();
        for ec in components {
            let member = ec.member_mask(n);
            let mut stay_iterate = None;
            let stay = match objective.kind {
                ObjectiveKind::Reachability => {
                    let v = if ec.states.iter().any(|&s| objective.is_target(s)) { 1.0 } else { 0.0 };
                    (v, v)
                }
                ObjectiveKind::Safety => {
                    let v = if ec.states.iter().any(|&s| objective.is_target(s)) { 0.0 } else { 1.0 };
                    (v, v)
                }
                ObjectiveKind::TotalReward => (0.0, 0.0),
                ObjectiveKind::MeanPayoff => {
                    let sub = restrict(mdp, &ec)?;
                    let span = mean_payoff_span(&sub, eps / 2.0, None, None);
                    stay_iterate = Some(span.iterate);
                    (span.lower, span.upper)
                }
            };
            let actions = ec
                .states
                .iter()
                .flat_map(|&s| {
                    let member = &member;
                    mdp.actions(s)
                        .iter()
                        .enumerate()
                        .filter(move |(_, a)| !a.stays_within(member))
                        .map(move |(a, _)| (s, a))
                })
                .collect();
            for &s in &ec.states {
                node_of[s] = nodes.len();
            }
            nodes.push(QuotientNode {
                states: ec.states.clone(),
                actions,
                stay: Some(stay),
                fixed: None,
                offset: 0.0,
                component: Some(ec),
                stay_iterate,
            });
        }
        for s in 0..n {
            if !(node_of[s] == usize::MAX) {
                continue;
            }
            node_of[s] = nodes.len();
            nodes.push(QuotientNode {
                states: vec![s],
                actions: (0..mdp.actions(s).len()).map(|a| (s, a)).collect(),
                stay: None,
                fixed: fixed[s],
                offset: objective.offset(mdp, s),
                component: None,
                stay_iterate: None,
            });
        }
        let finite_game_upper = match objective.kind {
            ObjectiveKind::TotalReward => {
                let finite = (0..n).filter(|&s| !infinite[s]).count().max(1);
                crate::bellman::total_reward_bound(finite, mdp.min_probability(), mdp.max_reward())
            }
            _ => init_upper(mdp, objective)[0],
        };
        Ok(Quotient {
            nodes,
            node_of,
            chooser,
            objective: objective.clone(),
            lower_start: init_lower(mdp, objective)[0],
            upper_start: finite_game_upper,
        })
    }

    /// Starting vector of interval iteration for one bound.
    pub fn initial(&self, bound: Bound) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|node| match (node.fixed, node.stay) {
                (Some(v), _) => v,
                (None, Some(stay)) if node.actions.is_empty() => pick(stay, bound),
                _ => match bound {
                    Bound::Lower => self.lower_start,
                    Bound::Upper => self.upper_start,
                },
            })
            .collect()
    }

    fn action_value(&self, mdp: &StochasticGame, values: &[f64], s: usize, a: usize) -> f64 {
        let mut acc = 0.0;
        for &(t, p) in &mdp.actions(s)[a].successors {
            if p > 0.0 {
                acc += p * values[self.node_of[t]];
            }
        }
        acc
    }

    /// One Jacobi sweep over the quotient.
    pub fn sweep(&self, mdp: &StochasticGame, values: &[f64], bound: Bound) -> Vec<f64> {
        let player = self.chooser;
        self.nodes
            .iter()
            .map(|node| {
                if let Some(v) = node.fixed {
                    return v;
                }
                let mut best = node.stay.map_or(player.worst(), |stay| pick(stay, bound));
                for &(s, a) in &node.actions {
                    best = player.better(best, self.action_value(mdp, values, s, a));
                }
                node.offset + best
            })
            .collect()
    }

    /// Maps node values back to states.
    pub fn expand(&self, values: &[f64]) -> Assignment {
        self.node_of.iter().map(|&k| values[k]).collect::<Vec<_>>().into()
    }

    /// A strategy that follows the best node choice under `values`: inside a
    /// component it either stays or walks to the chosen exit.
    fn strategy(&self, mdp: &StochasticGame, values: &[f64]) -> Vec<usize> {
        let player = self.chooser;
        let mut strategy = vec![0; mdp.num_states()];
        for node in &self.nodes {
            let mut best_value = node.stay.map_or(player.worst(), |stay| pick(stay, Bound::Lower));
            let mut best_exit = None;
            for &(s, a) in &node.actions {
                let v = self.action_value(mdp, values, s, a);
                let improves = if best_exit.is_none() && node.stay.is_none() {
                    true
                } else {
                    player.better(v, best_value) != best_value && (v - best_value).abs() > 1e-12
                };
                if improves {
                    best_value = v;
                    best_exit = Some((s, a));
                }
            }
            match (&node.component, best_exit) {
                (None, Some((s, a))) => strategy[s] = a,
                (None, None) => {}
                (Some(ec), None) => {
                    let inside = match (&node.stay_iterate, self.objective.kind) {
                        (Some(iterate), ObjectiveKind::MeanPayoff) => {
                            let sub = restrict(mdp, ec).expect("components are closed");
                            greedy_actions(&sub, iterate)
                        }
                        _ => vec![0; ec.states.len()],
                    };
                    for (i, &s) in ec.states.iter().enumerate() {
                        strategy[s] = ec.actions_of(s).nth(inside[i]).expect("restricted action exists");
                    }
                }
                (Some(ec), Some((exit_state, exit_action))) => {
                    for (s, a) in walk_to(mdp, ec, exit_state) {
                        strategy[s] = a;
                    }
                    strategy[exit_state] = exit_action;
                }
            }
        }
        strategy
    }
}

fn pick(interval: (f64, f64), bound: Bound) -> f64 {
    match bound {
        Bound::Lower => interval.0,
        Bound::Upper => interval.1,
    }
}

/// Component actions that reach `goal` almost surely inside `ec`.
fn walk_to(mdp: &StochasticGame, ec: &EndComponent, goal: usize) -> Vec<(usize, usize)> {
    let n = mdp.num_states();
    let mut reached = vec![false; n];
    reached[goal] = true;
    let mut out = Vec::new();
    loop {
        let mut changed = false;
        for &s in &ec.states {
            if reached[s] {
                continue;
            }
            if let Some(a) = ec.actions_of(s).find(|&a| mdp.actions(s)[a].support().any(|t| reached[t])) {
                reached[s] = true;
                out.push((s, a));
                changed = true;
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Solves an MDP to an interval of width at most `eps` at every state.
///
/// All maximal end components are collapsed (for total reward only the
/// zero-reward ones, after fixing infinite states to `+inf`; for mean payoff
/// each component keeps a stay option paying its gain), and the quotient is
/// iterated from a lower and an upper bound. Infinite entries are exact.
pub fn solve_mdp(mdp: &StochasticGame, objective: &Objective, eps: f64) -> Result<CertifiedInterval> {
    solve_mdp_capped(mdp, objective, eps, MAX_QUOTIENT_SWEEPS)
}

/// [`solve_mdp`] with an explicit sweep limit.
pub fn solve_mdp_capped(
    mdp: &StochasticGame,
    objective: &Objective,
    eps: f64,
    max_sweeps: usize,
) -> Result<CertifiedInterval> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("precision must be positive, got {eps}")));
    }
    let quotient = Quotient::build(mdp, objective, eps)?;
    let mut lower = quotient.initial(Bound::Lower);
    let mut upper = quotient.initial(Bound::Upper);
    let width = |l: &[f64], u: &[f64]| l.iter().zip(u).map(|(&a, &b)| gap(b, a)).fold(0.0, f64::max);
    let mut converged = width(&lower, &upper) <= eps;
    let mut sweeps = 0;
    while !converged && sweeps < max_sweeps {
        lower = quotient.sweep(mdp, &lower, Bound::Lower);
        upper = quotient.sweep(mdp, &upper, Bound::Upper);
        sweeps += 1;
        converged = width(&lower, &upper) <= eps;
    }
    let strategy = quotient.strategy(mdp, &lower);
    Ok(CertifiedInterval { lower: quotient.expand(&lower), upper: quotient.expand(&upper), converged, strategy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{induce, Strategy};

    #[test]
    fn collapse_quotient_upper_sequence() {
        let (game, objective) = fixtures::collapse();
        let quotient = Quotient::build(&game, &objective, 1e-6).unwrap();
        let rep = quotient.node_of[0];
        assert_eq!(rep, quotient.node_of[1]);
        let mut upper = quotient.initial(Bound::Upper);
        let mut seen = vec![upper[rep]];
        for _ in 0..2 {
            upper = quotient.sweep(&game, &upper, Bound::Upper);
            seen.push(upper[rep]);
        }
        assert_eq!(seen[0], 1.0);
        assert!((seen[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((seen[2] - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn collapse_solves_to_one_half() {
        let (game, objective) = fixtures::collapse();
        let sol = solve_mdp(&game, &objective, 1e-6).unwrap();
        assert!(sol.converged);
        for (s, v) in [(0, 0.5), (1, 0.5), (2, 0.0), (3, 1.0)] {
            assert!(sol.lower[s] <= v + 1e-12 && v <= sol.upper[s] + 1e-12);
            assert!(sol.upper[s] - sol.lower[s] <= 1e-6);
        }
        assert_eq!(sol.strategy[1], 1);
    }

    #[test]
    fn minimizer_mdp_of_car() {
        let (game, objective) = fixtures::car();
        let sigma = Strategy { choices: vec![Some(0), None, Some(0), Some(0)] };
        let mdp = induce(&game, &sigma, Player::Max).unwrap();
        let sol = solve_mdp(&mdp, &objective, 1e-9).unwrap();
        assert!((sol.lower[1] - 0.1).abs() < 1e-9);
        assert_eq!(sol.strategy[1], 1);
    }

    #[test]
    fn two_owner_input_is_rejected() {
        let (game, objective) = fixtures::car();
        assert_eq!(solve_mdp(&game, &objective, 1e-6), Err(Error::TwoOwner));
    }

    #[test]
    fn mean_payoff_cycle() {
        let (game, objective) = fixtures::cycle();
        let sol = solve_mdp(&game, &objective, 1e-8).unwrap();
        assert!(sol.lower[0] <= 1.0 && 1.0 <= sol.upper[0]);
        assert!(sol.width() <= 1e-8);
    }

    #[test]
    fn chain_values() {
        let (game, objective) = fixtures::collapse();
        let chain =
            induce(&game, &Strategy { choices: vec![Some(0), Some(1), Some(0), Some(0)] }, Player::Max).unwrap();
        let values = solve_mc(&chain, &objective).unwrap();
        assert!((values[0] - 0.5).abs() < 1e-15 && (values[1] - 0.5).abs() < 1e-15);
        let (cycle, mp) = fixtures::cycle();
        assert!((solve_mc(&cycle, &mp).unwrap()[0] - 1.0).abs() < 1e-15);
        assert_eq!(solve_mc(&cycle, &Objective::total_reward()).unwrap().0, vec![f64::INFINITY; 2]);
    }
}
