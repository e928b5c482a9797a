// An end component whose states have different values. The global algorithm
// collapses it inside the Maximizer MDP, the local one deflates only where
// the recommended Minimizer strategy keeps play inside.

use sgvi::fixtures;
use sgvi::global::{bvi_global, SolverConfig};
use sgvi::local::bvi_local;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (game, objective) = fixtures::simple_ec();
    let config = SolverConfig::default();
    for s0 in 0..3 {
        let g = bvi_global(&game, &objective, s0, 1e-6, &config)?;
        let l = bvi_local(&game, &objective, s0, 1e-6, &config)?;
        println!(
            "{}: global [{:.6}, {:.6}] ({} it), local [{:.6}, {:.6}] ({} it)",
            game.label(s0),
            g.lower[s0],
            g.upper[s0],
            g.iterations,
            l.lower[s0],
            l.upper[s0],
            l.iterations
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
