#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgvi::bellman::{fixpoint_residual, fixpoint_update, initial_bounds};
use sgvi::model::{
    canonicalize, random_game, Action, Assignment, CanonicalGame, Objective, ObjectiveKind, Player, RandomGameParams,
    State, StochasticGame,
};

pub const KINDS: [ObjectiveKind; 4] =
    [ObjectiveKind::Reachability, ObjectiveKind::Safety, ObjectiveKind::TotalReward, ObjectiveKind::MeanPayoff];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random objective of the given kind; reachability and safety get one or
/// two random target states.
pub fn random_objective(game: &StochasticGame, kind: ObjectiveKind, rng: &mut impl Rng) -> Objective {
    let n = game.num_states();
    let mut targets = || {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(rng);
        all.truncate(rng.gen_range(1..=2.min(n)));
        all
    };
    match kind {
        ObjectiveKind::Reachability => Objective::reachability(targets()),
        ObjectiveKind::Safety => Objective::safety(targets()),
        ObjectiveKind::TotalReward => Objective::total_reward(),
        ObjectiveKind::MeanPayoff => Objective::mean_payoff(),
    }
}

/// A canonicalized random instance, `None` if every state has infinite
/// total reward.
pub fn random_instance(seed: u64, kind: ObjectiveKind) -> Option<CanonicalGame> {
    let mut rng = rng(seed);
    let game = random_game(&RandomGameParams::default(), &mut rng);
    let objective = random_objective(&game, kind, &mut rng);
    canonicalize(&game, &objective).ok()
}

/// Random MDP of `owner` in which every action returns to state 0 with
/// positive probability, so every strategy yields one recurrent class.
pub fn random_unichain_mdp(seed: u64, owner: Player) -> StochasticGame {
    let mut rng = rng(seed);
    let base = random_game(&RandomGameParams::default(), &mut rng);
    let states = base
        .states()
        .iter()
        .map(|st| State {
            owner,
            actions: st
                .actions
                .iter()
                .map(|a| {
                    let mut successors: Vec<(usize, f64)> = a.successors.iter().map(|&(t, p)| (t, 0.75 * p)).collect();
                    successors.push((0, 0.25));
                    Action { name: a.name.clone(), successors: merge(successors) }
                })
                .collect(),
            ..st.clone()
        })
        .collect();
    StochasticGame::new(states).expect("valid game")
}

fn merge(mut successors: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    successors.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (t, p) in successors {
        match out.last_mut() {
            Some(last) if last.0 == t => last.1 += p,
            _ => out.push((t, p)),
        }
    }
    out
}

/// Iterates the fixpoint operator from the initial upper bound (the initial
/// lower bound for safety). Returns `None` if no fixpoint was reached.
pub fn extremal_fixpoint(game: &StochasticGame, objective: &Objective) -> Option<Assignment> {
    let (lower, upper) = initial_bounds(game, objective);
    let mut f = if objective.kind == ObjectiveKind::Safety { lower } else { upper };
    for _ in 0..200_000 {
        let next = fixpoint_update(game, objective, &f);
        let moved = next.max_distance(&f);
        f = next;
        if moved <= 1e-14 {
            break;
        }
    }
    (fixpoint_residual(game, objective, &f) <= 1e-10).then_some(f)
}

pub fn within(a: f64, b: f64, tol: f64) -> bool {
    (a == b) || (a - b).abs() <= tol
}
