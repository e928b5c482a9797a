// Exact values by enumerating memoryless strategy profiles, in floating
// point and in rationals, and exact finite-horizon values.

use sgvi::fixtures;
use sgvi::oracle::{exact_value, exact_value_rational, finite_horizon_value_rational, DEFAULT_PROFILE_LIMIT};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (game, objective) = fixtures::collapse();
    let float = exact_value(&game, &objective, DEFAULT_PROFILE_LIMIT)?;
    let exact = exact_value_rational(&game, &objective, DEFAULT_PROFILE_LIMIT)?;
    println!("{} profiles", float.profiles);
    for s in 0..game.num_states() {
        let r = exact.values[s].as_ref().map_or("inf".to_string(), |v| v.to_string());
        println!("{}: {:?} = {r}", game.label(s), float.values[s]);
    }
    for k in 1..=3 {
        let v = finite_horizon_value_rational(&game, &objective, k)?;
        println!("{k} steps: p = {}, q = {}", v[0], v[1]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
