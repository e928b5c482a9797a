mod common;

use proptest::prelude::*;
use rand::Rng;
use sgvi::graph::{bsccs, infinite_total_reward_states, mecs, msecs, EndComponent};
use sgvi::mdpsolve::solve_mc;
use sgvi::model::{induce, random_game, Objective, Player, RandomGameParams, StochasticGame, Strategy};
use sgvi::oracle::{exact_value, DEFAULT_PROFILE_LIMIT};

use common::{random_objective, rng, KINDS};

fn random_strategy(game: &StochasticGame, player: Player, rng: &mut impl Rng) -> Strategy {
    Strategy {
        choices: (0..game.num_states())
            .map(|s| (game.owner(s) == player).then(|| rng.gen_range(0..game.actions(s).len())))
            .collect(),
    }
}

fn random_chain(game: &StochasticGame, rng: &mut impl Rng) -> StochasticGame {
    let sigma = random_strategy(game, Player::Max, rng);
    let tau = random_strategy(game, Player::Min, rng);
    induce(&induce(game, &sigma, Player::Max).unwrap(), &tau, Player::Min).unwrap()
}

/// Maps an end component of `induce(game, strategy, player)` back to the
/// action indices of `game`.
fn lift(ec: &EndComponent, game: &StochasticGame, strategy: &Strategy, player: Player) -> EndComponent {
    let actions = ec
        .actions
        .iter()
        .map(|&(s, a)| (s, if game.owner(s) == player { strategy.choice(s).unwrap() } else { a }))
        .collect();
    EndComponent::new(ec.states.clone(), actions)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn mecs_are_valid_and_disjoint(seed in any::<u64>()) {
        let game = random_game(&RandomGameParams::default(), &mut rng(seed));
        let all = mecs(&game);
        let mut seen = vec![false; game.num_states()];
        for ec in &all {
            prop_assert!(ec.is_valid_in(&game), "{ec:?}");
            for &s in &ec.states {
                prop_assert!(!seen[s], "state {s} in two MECs");
                seen[s] = true;
            }
        }
        // Every bottom SCC of any strategy profile lies inside some MEC.
        let chain = random_chain(&game, &mut rng(seed ^ 1));
        for bottom in bsccs(&chain).unwrap() {
            prop_assert!(bottom.iter().all(|&s| seen[s]));
        }
    }

    #[test]
    fn induced_end_components_are_game_end_components(seed in any::<u64>(), max_side in any::<bool>()) {
        let mut rng = rng(seed);
        let game = random_game(&RandomGameParams::default(), &mut rng);
        let player = if max_side { Player::Max } else { Player::Min };
        let strategy = random_strategy(&game, player, &mut rng);
        let induced = induce(&game, &strategy, player).unwrap();
        for ec in mecs(&induced) {
            prop_assert!(lift(&ec, &game, &strategy, player).is_valid_in(&game));
        }
    }

    #[test]
    fn chains_end_in_bottom_components(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let chain = random_chain(&random_game(&RandomGameParams::default(), &mut rng), &mut rng);
        let bottom: Vec<usize> = bsccs(&chain).unwrap().into_iter().flatten().collect();
        let reach = solve_mc(&chain, &Objective::reachability(bottom)).unwrap();
        prop_assert!(reach.iter().all(|&p| (p - 1.0).abs() <= 1e-9), "{reach:?}");
    }

    #[test]
    fn infinite_states_are_exactly_the_unbounded_ones(seed in any::<u64>()) {
        let game = random_game(&RandomGameParams::default(), &mut rng(seed));
        let infinite = infinite_total_reward_states(&game);
        let value = exact_value(&game, &Objective::total_reward(), DEFAULT_PROFILE_LIMIT).unwrap();
        for s in 0..game.num_states() {
            prop_assert_eq!(infinite[s], value.values[s].is_none(), "state {}", s);
        }
    }

    #[test]
    fn msecs_are_end_components_of_the_mdp(seed in any::<u64>(), k in 0usize..4, max_side in any::<bool>()) {
        let mut rng = rng(seed);
        let game = random_game(&RandomGameParams::default(), &mut rng);
        let objective = random_objective(&game, KINDS[k], &mut rng);
        let fixed = if max_side { Player::Max } else { Player::Min };
        let mdp = induce(&game, &random_strategy(&game, fixed, &mut rng), fixed).unwrap();
        for ec in msecs(&mdp, &objective, fixed).unwrap() {
            prop_assert!(ec.is_valid_in(&mdp));
        }
    }
}
