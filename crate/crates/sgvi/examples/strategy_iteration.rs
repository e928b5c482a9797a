// Anytime strategy iteration: one player improves its strategy, the other
// answers with a best response, and the two induced MDPs bound the value.

use sgvi::fixtures;
use sgvi::global::{si_anytime, SolverConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (name, game, objective) in fixtures::all() {
        if objective.kind == sgvi::model::ObjectiveKind::TotalReward {
            continue;
        }
        let res = si_anytime(&game, &objective, 0, 1e-6, &SolverConfig::default())?;
        println!("{name}: [{:.6}, {:.6}] after {} rounds", res.lower[0], res.upper[0], res.iterations);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
