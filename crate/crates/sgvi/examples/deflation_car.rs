// Each player in {p, q} would rather let the other one exit. Staying forever
// gives 0, so the upper bound on the end component drops to Maximizer's
// best exit in the very first iteration.

use sgvi::fixtures;
use sgvi::global::SolverConfig;
use sgvi::local::bvi_local;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (game, objective) = fixtures::car();
    let config = SolverConfig { trace: true, ..SolverConfig::default() };
    let res = bvi_local(&game, &objective, 0, 1e-6, &config)?;
    let first = &res.trace[0];
    println!("after iteration 1: U(p) = {}", first.upper);
    println!("final: [{}, {}] in {} iterations", res.lower[0], res.upper[0], res.iterations);
    assert!((first.upper - 0.1).abs() < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
