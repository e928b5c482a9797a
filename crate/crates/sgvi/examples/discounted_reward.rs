// Discounted reward as total reward: every step continues with probability
// gamma and otherwise falls into a zero-reward trap.

use sgvi::bellman::best_q_value;
use sgvi::fixtures;
use sgvi::global::SolverConfig;
use sgvi::model::{discount_to_total_reward, Objective};
use sgvi::solve::{solve, Algorithm};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (game, _) = fixtures::stay_exit();
    let gamma = 0.7;
    // Direct discounted value iteration for comparison.
    let mut x = vec![0.0; game.num_states()];
    for _ in 0..200 {
        x = (0..game.num_states()).map(|s| game.reward(s) + gamma * best_q_value(&game, &x, s)).collect();
    }
    let total = discount_to_total_reward(&game, gamma)?;
    let objective = Objective::total_reward();
    for s0 in 0..game.num_states() {
        let sol = solve(&total, &objective, s0, 1e-8, Algorithm::Local, &SolverConfig::default())?;
        println!(
            "{}: discounted {:.6}, total reward [{:.6}, {:.6}]",
            game.label(s0),
            x[s0],
            sol.lower[s0],
            sol.upper[s0]
        );
        assert!(sol.lower[s0] <= x[s0] + 1e-6 && x[s0] <= sol.upper[s0] + 1e-6);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
