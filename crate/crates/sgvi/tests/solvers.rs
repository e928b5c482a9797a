mod common;

use common::{random_instance, random_objective, random_unichain_mdp, rng, within, KINDS};
use rand::Rng;
use rayon::prelude::*;
use sgvi::bellman::KeepPrevious;
use sgvi::fixtures;
use sgvi::global::{bvi_global_with, si_anytime_with, SolverConfig, Status};
use sgvi::local::bvi_local_with;
use sgvi::mdpsolve::{mean_payoff_span_observed, solve_mdp, Bound, NumericGame, Quotient};
use sgvi::model::{
    induce, random_game, Assignment, Objective, ObjectiveKind, Player, RandomGameParams, StochasticGame, Strategy,
};
use sgvi::oracle::{exact_value, DEFAULT_PROFILE_LIMIT};
use sgvi::solve::{solve, Algorithm};

const TOL: f64 = 1e-8;

fn oracle(game: &StochasticGame, objective: &Objective) -> Assignment {
    exact_value(game, objective, DEFAULT_PROFILE_LIMIT).unwrap().assignment()
}

fn random_strategy(game: &StochasticGame, player: Player, rng: &mut impl Rng) -> Strategy {
    Strategy {
        choices: (0..game.num_states())
            .map(|s| (game.owner(s) == player).then(|| rng.gen_range(0..game.actions(s).len())))
            .collect(),
    }
}

/// A canonical instance turned into an MDP by fixing one player randomly.
fn random_mdp(seed: u64, kind: ObjectiveKind) -> Option<(StochasticGame, Objective)> {
    let instance = random_instance(seed, kind)?;
    let mut rng = rng(seed ^ 0xfeed);
    let fixed = if rng.gen_bool(0.5) { Player::Max } else { Player::Min };
    let mdp = induce(&instance.game, &random_strategy(&instance.game, fixed, &mut rng), fixed).unwrap();
    Some((mdp, instance.objective))
}

#[derive(Clone, Copy, Debug)]
enum Solver {
    Global,
    Local,
    StrategyIteration,
}

/// Runs `solver` and checks every iteration: bounds contain the value and
/// move monotonically. Returns the final status.
fn checked_run(
    solver: Solver,
    game: &StochasticGame,
    objective: &Objective,
    config: &SolverConfig,
) -> Result<Status, String> {
    let value = oracle(game, objective);
    let mut previous: Option<(Assignment, Assignment)> = None;
    let mut failure = None;
    let mut observe = |view: &sgvi::global::IterationView| {
        if failure.is_some() {
            return;
        }
        for s in 0..game.num_states() {
            if !(view.lower[s] <= value[s] + TOL && value[s] <= view.upper[s] + TOL) {
                failure = Some(format!(
                    "iteration {}: state {s} value {} outside [{}, {}]",
                    view.iteration, value[s], view.lower[s], view.upper[s]
                ));
                return;
            }
            if let Some((l, u)) = &previous {
                if view.lower[s] < l[s] || view.upper[s] > u[s] {
                    failure = Some(format!("iteration {}: state {s} bounds widened", view.iteration));
                    return;
                }
            }
        }
        previous = Some((view.lower.clone(), view.upper.clone()));
    };
    let result = match solver {
        Solver::Global => bvi_global_with(game, objective, 0, 1e-6, config, &mut KeepPrevious::new(game), &mut observe),
        Solver::Local => bvi_local_with(game, objective, 0, 1e-6, config, &mut KeepPrevious::new(game), &mut observe),
        Solver::StrategyIteration => si_anytime_with(game, objective, 0, 1e-6, config, &mut observe),
    }
    .map_err(|e| e.to_string())?;
    if let Some(f) = failure {
        return Err(f);
    }
    if result.status == Status::Converged && result.gap() > 1e-6 {
        return Err(format!("converged with gap {}", result.gap()));
    }
    Ok(result.status)
}

fn report(failures: Vec<String>) {
    assert!(failures.is_empty(), "{} failures, first: {:#?}", failures.len(), &failures[..failures.len().min(5)]);
}

#[test]
fn global_and_strategy_iteration_are_sound_every_iteration() {
    let mut failures = Vec::new();
    for (name, game, objective) in fixtures::all() {
        for solver in [Solver::Global, Solver::StrategyIteration] {
            match checked_run(solver, &game, &objective, &SolverConfig::default()) {
                Ok(Status::Converged) => {}
                Ok(status) => failures.push(format!("{name} {solver:?}: {status:?}")),
                Err(e) => failures.push(format!("{name} {solver:?}: {e}")),
            }
        }
    }
    for kind in KINDS {
        let solvers: &[Solver] = if kind == ObjectiveKind::TotalReward {
            &[Solver::Global]
        } else {
            &[Solver::Global, Solver::StrategyIteration]
        };
        failures.extend(
            (0..200u64)
                .into_par_iter()
                .flat_map_iter(|seed| {
                    let mut out = Vec::new();
                    if let Some(instance) = random_instance(seed, kind) {
                        for &solver in solvers {
                            match checked_run(solver, &instance.game, &instance.objective, &SolverConfig::default()) {
                                Ok(Status::Converged) => {}
                                Ok(status) => out.push(format!("{kind:?} seed {seed} {solver:?}: {status:?}")),
                                Err(e) => out.push(format!("{kind:?} seed {seed} {solver:?}: {e}")),
                            }
                        }
                    }
                    out
                })
                .collect::<Vec<_>>(),
        );
    }
    report(failures);
}

/// The improved strategy (Minimizer's for safety, Maximizer's otherwise)
/// never gets worse for its owner.
#[test]
fn strategy_iteration_improves_its_player() {
    let failures: Vec<String> = (0..300u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let kind =
                [ObjectiveKind::Reachability, ObjectiveKind::Safety, ObjectiveKind::MeanPayoff][seed as usize % 3];
            let Some(instance) = random_instance(seed, kind) else { return Vec::new() };
            let (game, objective) = (&instance.game, &instance.objective);
            let improver = if kind == ObjectiveKind::Safety { Player::Min } else { Player::Max };
            let mut values = Vec::new();
            si_anytime_with(game, objective, 0, 1e-6, &SolverConfig::default(), |view| {
                let mdp = induce(game, &view.profile.strategy_of(game, improver), improver).unwrap();
                values.push(oracle(&mdp, objective)[0]);
            })
            .unwrap();
            values
                .windows(2)
                .filter(|w| (w[1] - w[0]).abs() > 1e-9 && improver.better(w[0], w[1]) == w[0])
                .map(|w| format!("{kind:?} seed {seed}: {} then {}", w[0], w[1]))
                .collect()
        })
        .collect();
    report(failures);
}

#[test]
fn gain_and_bias_of_a_cycle() {
    let (game, _) = fixtures::cycle();
    let chain = NumericGame::<f64>::from_game(&game).unwrap().chain(&[0, 0]);
    let (gain, bias) = chain.gain_bias().unwrap();
    assert_eq!(gain, vec![1.0, 1.0]);
    assert!(within(bias[0], -0.5, 1e-12) && within(bias[1], 0.5, 1e-12), "{bias:?}");
}

#[test]
fn interrupted_runs_keep_sound_bounds() {
    let config = SolverConfig { max_iterations: 1, ..SolverConfig::default() };
    let failures: Vec<String> = (0..100u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let kind = KINDS[seed as usize % 4];
            let Some(instance) = random_instance(seed, kind) else { return Vec::new() };
            let mut out = Vec::new();
            for solver in [Solver::Global, Solver::Local, Solver::StrategyIteration] {
                if matches!(solver, Solver::StrategyIteration) && kind == ObjectiveKind::TotalReward {
                    continue;
                }
                if let Err(e) = checked_run(solver, &instance.game, &instance.objective, &config) {
                    out.push(format!("{kind:?} seed {seed} {solver:?}: {e}"));
                }
            }
            out
        })
        .collect();
    report(failures);

    let (game, objective) = fixtures::collapse();
    assert_eq!(checked_run(Solver::Local, &game, &objective, &config), Ok(Status::IterationCapped));
}

#[test]
fn mdp_intervals_bracket_the_value() {
    for kind in KINDS {
        let instances: Vec<(u64, StochasticGame, Objective)> =
            (0..1000u64).filter_map(|seed| random_mdp(seed, kind).map(|(m, o)| (seed, m, o))).take(200).collect();
        assert_eq!(instances.len(), 200);
        let failures: Vec<String> = instances
            .into_par_iter()
            .filter_map(|(seed, mdp, objective)| {
                let value = oracle(&mdp, &objective);
                let interval = solve_mdp(&mdp, &objective, 1e-6).unwrap();
                let bad = !interval.converged
                    || interval.width() > 1e-6
                    || (0..mdp.num_states())
                        .any(|s| !(interval.lower[s] <= value[s] + TOL && value[s] <= interval.upper[s] + TOL));
                bad.then(|| {
                    format!("{kind:?} seed {seed}: value {value:?} interval {:?} {:?}", interval.lower, interval.upper)
                })
            })
            .collect();
        report(failures);
    }
}

#[test]
fn infinite_mdp_states_are_exact() {
    let mut checked = 0;
    for seed in 0..300u64 {
        let mut rng = rng(seed);
        let game = random_game(&RandomGameParams::default(), &mut rng);
        let mdp = induce(&game, &random_strategy(&game, Player::Min, &mut rng), Player::Min).unwrap();
        let objective = Objective::total_reward();
        let value = exact_value(&mdp, &objective, DEFAULT_PROFILE_LIMIT).unwrap();
        let interval = solve_mdp(&mdp, &objective, 1e-6).unwrap();
        for s in 0..mdp.num_states() {
            match value.values[s] {
                None => {
                    checked += 1;
                    assert_eq!((interval.lower[s], interval.upper[s]), (f64::INFINITY, f64::INFINITY), "seed {seed}");
                }
                Some(v) => assert!(interval.lower[s] <= v + TOL && v <= interval.upper[s] + TOL, "seed {seed}"),
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn span_bounds_hold_at_every_sweep() {
    let mut games: Vec<StochasticGame> = vec![fixtures::cycle().0];
    for seed in 0..50 {
        games.push(random_unichain_mdp(seed, if seed % 2 == 0 { Player::Max } else { Player::Min }));
    }
    for (i, game) in games.iter().enumerate() {
        let gain = oracle(game, &Objective::mean_payoff());
        let mut sweeps = 0;
        mean_payoff_span_observed(game, 1e-9, None, None, 100_000, |lower, upper| {
            sweeps += 1;
            for &g in gain.iter() {
                assert!(
                    lower <= g + 1e-9 && g <= upper + 1e-9,
                    "game {i} sweep {sweeps}: {g} outside [{lower}, {upper}]"
                );
            }
        });
        assert!(sweeps > 0);
    }
}

/// Interval iteration on the quotient converges to the same values from
/// below and above, and both match plain value iteration on the MDP.
#[test]
fn quotient_matches_the_original_mdp() {
    let mut compared = 0;
    for seed in 0..300u64 {
        let mut rng = rng(seed);
        let game = random_game(&RandomGameParams::default(), &mut rng);
        let owner = if seed % 2 == 0 { Player::Max } else { Player::Min };
        let fixed = owner.opponent();
        let mdp = induce(&game, &random_strategy(&game, fixed, &mut rng), fixed).unwrap();
        let objective = random_objective(&mdp, ObjectiveKind::Reachability, &mut rng);
        let quotient = Quotient::build(&mdp, &objective, 1e-9).unwrap();
        let mut lower = quotient.initial(Bound::Lower);
        let mut upper = quotient.initial(Bound::Upper);
        for _ in 0..100_000 {
            lower = quotient.sweep(&mdp, &lower, Bound::Lower);
            upper = quotient.sweep(&mdp, &upper, Bound::Upper);
            if upper.iter().zip(&lower).all(|(u, l)| u - l <= 1e-12) {
                break;
            }
        }
        let (lower, upper) = (quotient.expand(&lower), quotient.expand(&upper));
        let mut plain: Vec<f64> =
            (0..mdp.num_states()).map(|s| if objective.is_target(s) { 1.0 } else { 0.0 }).collect();
        for _ in 0..100_000 {
            let next: Vec<f64> = (0..mdp.num_states())
                .map(|s| {
                    if objective.is_target(s) {
                        return 1.0;
                    }
                    mdp.actions(s).iter().map(|a| a.expect(&plain)).fold(owner.worst(), |acc, v| owner.better(acc, v))
                })
                .collect();
            let moved = next.iter().zip(&plain).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            plain = next;
            if moved <= 1e-15 {
                break;
            }
        }
        for s in 0..mdp.num_states() {
            assert!(
                within(lower[s], plain[s], 1e-9) && within(upper[s], plain[s], 1e-9),
                "seed {seed} state {s}: {lower:?} {upper:?} {plain:?}"
            );
        }
        compared += 1;
    }
    assert_eq!(compared, 300);
}

#[test]
fn solve_reports_original_states() {
    let algorithms = [Algorithm::Global, Algorithm::Local, Algorithm::StrategyIteration, Algorithm::Oracle];
    let failures: Vec<String> = (0..400u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let mut rng = rng(seed);
            let game = random_game(&RandomGameParams::default(), &mut rng);
            let kind = KINDS[seed as usize % 4];
            let objective = random_objective(&game, kind, &mut rng);
            let value = exact_value(&game, &objective, DEFAULT_PROFILE_LIMIT).unwrap().assignment();
            let mut out = Vec::new();
            for algorithm in algorithms {
                if algorithm == Algorithm::StrategyIteration && kind == ObjectiveKind::TotalReward {
                    continue;
                }
                let solution = match solve(&game, &objective, 0, 1e-6, algorithm, &SolverConfig::default()) {
                    Ok(solution) => solution,
                    Err(e) => {
                        out.push(format!("seed {seed} {algorithm:?}: {e}"));
                        continue;
                    }
                };
                for s in 0..game.num_states() {
                    let ok = if value[s].is_infinite() {
                        solution.lower[s] == f64::INFINITY && solution.upper[s] == f64::INFINITY
                    } else {
                        solution.lower[s] <= value[s] + TOL && value[s] <= solution.upper[s] + TOL
                    };
                    if !ok {
                        out.push(format!(
                            "seed {seed} {algorithm:?} state {s}: value {} bounds [{}, {}]",
                            value[s], solution.lower[s], solution.upper[s]
                        ));
                    }
                }
                if value[0].is_finite() && solution.gap() > 1e-6 {
                    out.push(format!("seed {seed} {algorithm:?}: gap {}", solution.gap()));
                }
            }
            out
        })
        .collect();
    report(failures);
}
