// Reading a game from JSON, solving it and writing it back.

use sgvi::global::SolverConfig;
use sgvi::model::{parse_game, render_game, Objective};
use sgvi::solve::{solve, Algorithm};

const GAME: &str = r#"{
  "states": [
    {"id": "start", "player": "max", "actions": [
      {"name": "safe", "dist": {"win": "1/2", "lose": "1/2"}},
      {"name": "gamble", "dist": {"guard": 1}}
    ]},
    {"id": "guard", "player": "min", "actions": [
      {"name": "block", "dist": {"win": 0.3, "lose": 0.7}},
      {"name": "back", "dist": {"start": 1}}
    ]},
    {"id": "win", "player": "max", "actions": [{"dist": {"win": 1}}]},
    {"id": "lose", "player": "max", "actions": [{"dist": {"lose": 1}}]}
  ]
}"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let game = parse_game(GAME)?;
    let win = game.state_index("win").ok_or("no win state")?;
    let sol = solve(&game, &Objective::reachability([win]), 0, 1e-9, Algorithm::Local, &SolverConfig::default())?;
    let choice = sol.sigma.choice(0).ok_or("no choice at start")?;
    println!("start: [{}, {}], play {}", sol.lower[0], sol.upper[0], game.action_name(0, choice));
    assert_eq!(parse_game(&render_game(&game))?, game);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
