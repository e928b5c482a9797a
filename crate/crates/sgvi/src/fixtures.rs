//! Small reference games with known values.

use crate::model::{parse_game, Objective, StochasticGame};

pub const COLLAPSE: &str = include_str!("../fixtures/collapse.json");
pub const CAR: &str = include_str!("../fixtures/car.json");
pub const STAY_EXIT: &str = include_str!("../fixtures/stay_exit.json");
pub const SIMPLE_EC: &str = include_str!("../fixtures/simple_ec.json");
pub const SAFE_TRAP: &str = include_str!("../fixtures/safe_trap.json");
pub const CYCLE: &str = include_str!("../fixtures/cycle.json");

fn load(text: &str) -> StochasticGame {
    parse_game(text).expect("bundled fixtures parse")
}

/// Maximizer-only game whose end component {p, q} traps naive upper bounds.
/// Reach t; values (p, q, s, t) = (1/2, 1/2, 0, 1).
pub fn collapse() -> (StochasticGame, Objective) {
    (load(COLLAPSE), Objective::reachability([3]))
}

/// Both players prefer to hand the decision to the other. Reach goal;
/// value 0.1 at p and q.
pub fn car() -> (StochasticGame, Objective) {
    (load(CAR), Objective::reachability([2]))
}

/// Mean payoff game with an end component {p, s, q}. Values p = s = 0,
/// q = 6.
pub fn stay_exit() -> (StochasticGame, Objective) {
    (load(STAY_EXIT), Objective::mean_payoff())
}

/// Minimizer picks between two Maximizer exits. Reach goal; values
/// (p, q, s) = (0.6, 0.9, 0.6).
pub fn simple_ec() -> (StochasticGame, Objective) {
    (load(SIMPLE_EC), Objective::reachability([3]))
}

/// Two Maximizer states that may stay with each other or exit to the
/// target. Reach t; value 1 everywhere.
pub fn safe_trap() -> (StochasticGame, Objective) {
    (load(SAFE_TRAP), Objective::reachability([2]))
}

/// Two-state cycle with rewards 0 and 2. Mean payoff 1.
pub fn cycle() -> (StochasticGame, Objective) {
    (load(CYCLE), Objective::mean_payoff())
}

/// All fixtures with their names.
pub fn all() -> Vec<(&'static str, StochasticGame, Objective)> {
    let named = [
        ("collapse", collapse as fn() -> (StochasticGame, Objective)),
        ("car", car),
        ("stay-exit", stay_exit),
        ("simple-ec", simple_ec),
        ("safe-trap", safe_trap),
        ("cycle", cycle),
    ];
    named
        .into_iter()
        .map(|(name, f)| {
            let (g, o) = f();
            (name, g, o)
        })
        .collect()
}
