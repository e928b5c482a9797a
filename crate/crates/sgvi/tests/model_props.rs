mod common;

use proptest::prelude::*;
use rand::Rng;
use sgvi::bellman::best_q_value;
use sgvi::bellman::optimal_actions;
use sgvi::fixtures;
use sgvi::model::{
    aperiodicity_transform, canonicalize, discount_to_total_reward, induce, parse_game, random_game,
    random_game_with_states, render_game, rescale_rewards, Objective, Player, RandomGameParams, StochasticGame,
    Strategy,
};
use sgvi::oracle::{exact_value, DEFAULT_PROFILE_LIMIT};

use common::{random_objective, rng, KINDS};

fn value(game: &StochasticGame, objective: &Objective) -> Vec<Option<f64>> {
    exact_value(game, objective, DEFAULT_PROFILE_LIMIT).unwrap().values
}

#[test]
fn fixtures_round_trip() {
    for (name, game, _) in fixtures::all() {
        assert_eq!(parse_game(&render_game(&game)).unwrap(), game, "{name}");
    }
}

fn discounted_reference(game: &StochasticGame, gamma: f64) -> Vec<f64> {
    let mut x = vec![0.0; game.num_states()];
    for _ in 0..2000 {
        x = (0..game.num_states()).map(|s| game.reward(s) + gamma * best_q_value(game, &x, s)).collect();
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_games_round_trip(seed in any::<u64>()) {
        let game = random_game(&RandomGameParams::default(), &mut rng(seed));
        prop_assert_eq!(parse_game(&render_game(&game)).unwrap(), game);
    }

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>(), k in 0usize..4) {
        let mut rng = rng(seed);
        let game = random_game(&RandomGameParams::default(), &mut rng);
        let objective = random_objective(&game, KINDS[k], &mut rng);
        if let Ok(once) = canonicalize(&game, &objective) {
            let twice = canonicalize(&once.game, &once.objective).unwrap();
            prop_assert_eq!(twice.game, once.game);
        }
    }

    #[test]
    fn rescaling_is_affine_on_mean_payoff(seed in any::<u64>(), a in 0.5f64..3.0, b in -2.0f64..2.0) {
        let game = random_game(&RandomGameParams::default(), &mut rng(seed));
        let mp = Objective::mean_payoff();
        let v = value(&game, &mp);
        let w = value(&rescale_rewards(&game, a, b).unwrap(), &mp);
        for s in 0..game.num_states() {
            prop_assert!((w[s].unwrap() - (a * v[s].unwrap() + b)).abs() <= 1e-9);
        }
    }

    #[test]
    fn discounting_matches_direct_iteration(seed in any::<u64>(), g in 0usize..2) {
        let gamma = [0.3, 0.7][g];
        let game = random_game_with_states(3, &RandomGameParams::default(), &mut rng(seed));
        let total = discount_to_total_reward(&game, gamma).unwrap();
        let v = value(&total, &Objective::total_reward());
        let reference = discounted_reference(&game, gamma);
        for s in 0..game.num_states() {
            prop_assert!((v[s].unwrap() - reference[s]).abs() <= 1e-7, "{} vs {}", v[s].unwrap(), reference[s]);
        }
    }

    #[test]
    fn aperiodicity_keeps_values_and_optimal_actions(seed in any::<u64>(), alpha in 0.1f64..0.9) {
        let game = random_game(&RandomGameParams::default(), &mut rng(seed));
        let mp = Objective::mean_payoff();
        let lazy = aperiodicity_transform(&game, alpha).unwrap();
        let (v, w) = (value(&game, &mp), value(&lazy, &mp));
        let v: Vec<f64> = v.into_iter().map(Option::unwrap).collect();
        let w: Vec<f64> = w.into_iter().map(Option::unwrap).collect();
        for s in 0..game.num_states() {
            prop_assert!((v[s] - w[s]).abs() <= 1e-9);
            // Optimality of an action for the gain only looks at where it leads.
            prop_assert_eq!(optimal_actions(&game, &v, s, 1e-9), optimal_actions(&lazy, &w, s, 1e-9));
        }
    }

    #[test]
    fn induce_keeps_distributions(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let game = random_game(&RandomGameParams::default(), &mut rng);
        let player = if rng.gen_bool(0.5) { Player::Max } else { Player::Min };
        let strategy = Strategy {
            choices: (0..game.num_states())
                .map(|s| (game.owner(s) == player).then(|| rng.gen_range(0..game.actions(s).len())))
                .collect(),
        };
        let induced = induce(&game, &strategy, player).unwrap();
        prop_assert_eq!(induced.num_states(), game.num_states());
        for s in 0..game.num_states() {
            let kept: Vec<_> = match strategy.choice(s) {
                Some(a) => vec![&game.actions(s)[a]],
                None => game.actions(s).iter().collect(),
            };
            prop_assert_eq!(induced.actions(s).iter().collect::<Vec<_>>(), kept);
            for a in induced.actions(s) {
                prop_assert_eq!(a.successors.iter().map(|e| e.1).sum::<f64>(), 1.0);
            }
        }
    }
}
