// Staying and exit values of an end component in a mean-payoff game, and the
// local algorithm's bounds.

use sgvi::fixtures;
use sgvi::global::SolverConfig;
use sgvi::graph::EndComponent;
use sgvi::local::{bvi_local, exit_value, staying_value, StayMode};
use sgvi::model::Player;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (game, objective) = fixtures::stay_exit();
    // p -in-> s, s -back-> p, s -up-> q, q -loop-> q, q -down-> p
    let ec = EndComponent::new(vec![0, 1, 2], vec![(0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]);
    let stay = staying_value(&game, &ec, &objective, &StayMode::Exact)?;
    let exits = [0.0, 0.0, 0.0, 0.0, 0.0, 6.0];
    println!("stay (p, s, q) = {:?}", stay.lower);
    println!(
        "best exit: max {}, min {}",
        exit_value(&game, &exits, &ec, Player::Max),
        exit_value(&game, &exits, &ec, Player::Min)
    );

    for s0 in 0..3 {
        let res = bvi_local(&game, &objective, s0, 1e-4, &SolverConfig::default())?;
        println!("{}: [{:.5}, {:.5}]", game.label(s0), res.lower[s0], res.upper[s0]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
