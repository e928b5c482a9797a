// Seeded random games solved by every algorithm and checked against the
// oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sgvi::global::SolverConfig;
use sgvi::model::{random_game, Objective, RandomGameParams};
use sgvi::oracle::{exact_value, DEFAULT_PROFILE_LIMIT};
use sgvi::solve::{solve, Algorithm};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = RandomGameParams::default();
    for round in 0..5 {
        let game = random_game(&params, &mut rng);
        let objective = Objective::reachability([game.num_states() - 1]);
        let value = exact_value(&game, &objective, DEFAULT_PROFILE_LIMIT)?.assignment();
        for algorithm in [Algorithm::Global, Algorithm::Local, Algorithm::StrategyIteration] {
            let sol = solve(&game, &objective, 0, 1e-6, algorithm, &SolverConfig::default())?;
            assert!(sol.lower[0] <= value[0] + 1e-9 && value[0] <= sol.upper[0] + 1e-9);
            println!(
                "game {round} ({} states) {}: [{:.6}, {:.6}], value {:.6}",
                game.num_states(),
                algorithm.as_str(),
                sol.lower[0],
                sol.upper[0],
                value[0]
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
