// Classical value iteration only approaches the value from below. Bounded
// value iteration also brings the upper bound down, even through the end
// component {p, q} that would keep a naive upper bound at 1.

use sgvi::bellman::{bellman_update, init_vi};
use sgvi::fixtures;
use sgvi::global::{bvi_global, SolverConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (game, objective) = fixtures::collapse();
    let mut x = init_vi(&game, &objective);
    for i in 1..=3 {
        x = bellman_update(&game, &objective, &x);
        println!("x{i}: p={:.4} q={:.4}", x[0], x[1]);
    }

    let config = SolverConfig { trace: true, ..SolverConfig::default() };
    let res = bvi_global(&game, &objective, 0, 1e-6, &config)?;
    for t in res.trace.iter().take(3) {
        println!("iteration {}: [{:.4}, {:.4}]", t.iteration, t.lower, t.upper);
    }
    println!("p in [{}, {}] after {} iterations", res.lower[0], res.upper[0], res.iterations);
    assert!(res.lower[0] <= 0.5 && 0.5 <= res.upper[0] + 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
