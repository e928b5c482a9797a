// Iterating the Bellman operator from the upper bound can stop at a
// fixpoint above the value. The difference is always explained by an end
// component on which the fixpoint is constant.

use sgvi::bellman::{fixpoint_update, initial_bounds};
use sgvi::fixtures;
use sgvi::local::{find_spurious_fixpoint_sec, is_sec_for};
use sgvi::oracle::{exact_value, DEFAULT_PROFILE_LIMIT};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (game, objective) = fixtures::collapse();
    let (_, mut f) = initial_bounds(&game, &objective);
    for _ in 0..100 {
        f = fixpoint_update(&game, &objective, &f);
    }
    let value = exact_value(&game, &objective, DEFAULT_PROFILE_LIMIT)?.assignment();
    println!("fixpoint {:?}, value {:?}", f.0, value.0);
    let ec = find_spurious_fixpoint_sec(&game, &objective, &f, &value)?.ok_or("no end component found")?;
    let labels: Vec<&str> = ec.states.iter().map(|&s| game.label(s)).collect();
    println!("stuck on {labels:?}, simple for f: {}", is_sec_for(&game, &f, &objective, &ec));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
