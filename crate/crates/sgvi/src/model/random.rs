use rand::seq::index::sample;
use rand::Rng;

use super::{Action, Player, State, StochasticGame};

/// Shape of randomly generated games.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomGameParams {
    pub max_states: usize,
    pub max_actions: usize,
    /// Largest successor count of one action.
    pub max_support: usize,
    /// Rewards are drawn uniformly from `0..=max_reward`.
    pub max_reward: u32,
    /// Probability that a state gets reward zero regardless of the draw.
    pub zero_reward_bias: f64,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        RandomGameParams { max_states: 6, max_actions: 3, max_support: 3, max_reward: 3, zero_reward_bias: 0.5 }
    }
}

const WEIGHTS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Draws a game with between one and `max_states` states. Transition weights
/// come from {1/4, 1/2, 3/4, 1} and are renormalized. A one-state game is a
/// single absorbing state.
pub fn random_game<R: Rng>(params: &RandomGameParams, rng: &mut R) -> StochasticGame {
    let n = rng.gen_range(1..=params.max_states.max(1));
    random_game_with_states(n, params, rng)
}

/// Like [`random_game`] with exactly `n` states.
pub fn random_game_with_states<R: Rng>(n: usize, params: &RandomGameParams, rng: &mut R) -> StochasticGame {
    let n = n.max(1);
    let states = (0..n)
        .map(|s| {
            let owner = if rng.gen_bool(0.5) { Player::Max } else { Player::Min };
            let reward = if rng.gen_bool(params.zero_reward_bias) {
                0.0
            } else {
                f64::from(rng.gen_range(0..=params.max_reward))
            };
            let num_actions = if n == 1 { 1 } else { rng.gen_range(1..=params.max_actions.max(1)) };
            let actions = (0..num_actions)
                .map(|a| {
                    let support = rng.gen_range(1..=params.max_support.clamp(1, n));
                    let targets = sample(rng, n, support);
                    let weights: Vec<f64> = (0..support).map(|_| WEIGHTS[rng.gen_range(0..WEIGHTS.len())]).collect();
                    let total: f64 = weights.iter().sum();
                    let successors = targets.iter().zip(&weights).map(|(t, w)| (t, w / total)).collect();
                    Action::named(format!("a{a}"), successors)
                })
                .collect();
            State { label: format!("s{s}"), owner, reward, actions }
        })
        .collect();
    StochasticGame::new(states).expect("generated games are well-formed")
}
