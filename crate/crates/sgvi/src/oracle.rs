//! Reference values by exhaustive enumeration of memoryless deterministic
//! strategy profiles. Exponential; meant for small games and tests.

use std::collections::HashMap;

use num::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mdpsolve::NumericGame;
use crate::model::{Assignment, Objective, ObjectiveKind, Player, StochasticGame, Strategy, StrategyProfile};
use crate::numeric::Scalar;

pub const DEFAULT_PROFILE_LIMIT: u128 = 1_000_000;
/// Largest horizon accepted by [`finite_horizon_value`].
pub const MAX_HORIZON: usize = 12;
/// Agreement required between max-min and min-max values in `f64` mode.
pub const DETERMINACY_TOLERANCE: f64 = 1e-9;

/// Game values with uniformly optimal strategies. `None` in exact values
/// stands for `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    pub values: Vec<Option<T>>,
    pub sigma: Strategy,
    pub tau: Strategy,
    pub profiles: u128,
}

impl OracleResult<f64> {
    pub fn assignment(&self) -> Assignment {
        self.values.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect::<Vec<_>>().into()
    }
}

impl OracleResult<BigRational> {
    pub fn assignment(&self) -> Assignment {
        self.values.iter().map(|v| v.as_ref().map_or(f64::INFINITY, Scalar::to_f64)).collect::<Vec<_>>().into()
    }
}

/// Value of every state in floating point.
pub fn exact_value(game: &StochasticGame, objective: &Objective, limit: u128) -> Result<OracleResult<f64>> {
    enumerate::<f64>(game, objective, limit, 1)
}

/// Value of every state in exact rational arithmetic. Probabilities and
/// rewards must be fractions with denominators up to one million.
pub fn exact_value_rational(
    game: &StochasticGame,
    objective: &Objective,
    limit: u128,
) -> Result<OracleResult<BigRational>> {
    enumerate::<BigRational>(game, objective, limit, 1)
}

/// [`exact_value`] spread over `workers` threads. The result does not depend
/// on the worker count.
pub fn exact_value_parallel(
    game: &StochasticGame,
    objective: &Objective,
    limit: u128,
    workers: usize,
) -> Result<OracleResult<f64>> {
    enumerate::<f64>(game, objective, limit, workers)
}

/// Value of the Markov chain obtained by fixing both strategies.
pub fn profile_value(game: &StochasticGame, objective: &Objective, profile: &StrategyProfile) -> Result<Assignment> {
    let numeric = NumericGame::<f64>::from_game(game)?;
    let values = numeric.chain(&profile.choices).solve(objective)?;
    Ok(values.into_iter().map(|v| v.unwrap_or(f64::INFINITY)).collect::<Vec<_>>().into())
}

fn le<T: PartialOrd>(a: &Option<T>, b: &Option<T>) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    }
}

fn same<T: Scalar>(a: &Option<T>, b: &Option<T>, tolerance: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x.clone() - y.clone()).magnitude() <= tolerance,
        _ => false,
    }
}

fn tolerance<T: Scalar>() -> f64 {
    if T::pivot_tolerance() > 0.0 {
        DETERMINACY_TOLERANCE
    } else {
        0.0
    }
}

/// Mixed-radix decoding of a strategy index over the states in `owned`.
fn decode(index: usize, owned: &[usize], counts: &[usize], choice: &mut [usize]) {
    let mut rest = index;
    for (&s, &count) in owned.iter().zip(counts) {
        choice[s] = rest % count;
        rest /= count;
    }
}

struct Row<T> {
    /// Pointwise minimum over Minimizer strategies.
    worst: Vec<Option<T>>,
    /// Value for every Minimizer strategy.
    by_tau: Vec<Vec<Option<T>>>,
}

fn enumerate<T: Scalar + Send + Sync>(
    game: &StochasticGame,
    objective: &Objective,
    limit: u128,
    workers: usize,
) -> Result<OracleResult<T>> {
    objective.validate(game)?;
    let n = game.num_states();
    let numeric = NumericGame::<T>::from_game(game)?;
    let owned = |p: Player| -> (Vec<usize>, Vec<usize>) {
        let states: Vec<usize> = (0..n).filter(|&s| game.owner(s) == p).collect();
        let counts = states.iter().map(|&s| game.actions(s).len()).collect();
        (states, counts)
    };
    let (max_states, max_counts) = owned(Player::Max);
    let (min_states, min_counts) = owned(Player::Min);
    let count = |c: &[usize]| c.iter().try_fold(1u128, |acc, &k| acc.checked_mul(k as u128));
    let sigmas = count(&max_counts);
    let taus = count(&min_counts);
    let required = sigmas.zip(taus).and_then(|(a, b)| a.checked_mul(b)).unwrap_or(u128::MAX);
    if required > limit {
        return Err(Error::EnumerationLimit { required, limit });
    }
    let (sigmas, taus) = (sigmas.unwrap_or(0) as usize, taus.unwrap_or(0) as usize);
    let row = |i: usize| -> Result<Row<T>> {
        let mut choice = vec![0; n];
        decode(i, &max_states, &max_counts, &mut choice);
        let mut worst: Vec<Option<T>> = vec![None; n];
        let mut by_tau = Vec::with_capacity(taus);
        for j in 0..taus {
            decode(j, &min_states, &min_counts, &mut choice);
            let values = numeric.chain(&choice).solve(objective)?;
            for s in 0..n {
                if le(&values[s], &worst[s]) {
                    worst[s] = values[s].clone();
                }
            }
            by_tau.push(values);
        }
        Ok(Row { worst, by_tau })
    };
    let rows: Vec<Row<T>> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        pool.install(|| (0..sigmas).into_par_iter().map(row).collect::<Result<_>>())?
    } else {
        (0..sigmas).map(row).collect::<Result<_>>()?
    };

    let mut maxmin: Vec<Option<T>> = rows[0].worst.clone();
    for r in &rows[1..] {
        for s in 0..n {
            if !le(&r.worst[s], &maxmin[s]) {
                maxmin[s] = r.worst[s].clone();
            }
        }
    }
    let best_against: Vec<Vec<Option<T>>> = (0..taus)
        .map(|j| {
            let mut best = rows[0].by_tau[j].clone();
            for r in &rows[1..] {
                for s in 0..n {
                    if !le(&r.by_tau[j][s], &best[s]) {
                        best[s] = r.by_tau[j][s].clone();
                    }
                }
            }
            best
        })
        .collect();
    let mut minmax = best_against[0].clone();
    for b in &best_against[1..] {
        for s in 0..n {
            if le(&b[s], &minmax[s]) {
                minmax[s] = b[s].clone();
            }
        }
    }
    let tol = tolerance::<T>();
    for s in 0..n {
        if !same(&maxmin[s], &minmax[s], tol) {
            let f = |v: &Option<T>| v.as_ref().map_or(f64::INFINITY, Scalar::to_f64);
            return Err(Error::Determinacy { state: s, maxmin: f(&maxmin[s]), minmax: f(&minmax[s]) });
        }
    }
    let attains = |v: &[Option<T>]| (0..n).all(|s| same(&v[s], &maxmin[s], tol));
    let sigma_index = (0..sigmas).find(|&i| attains(&rows[i].worst)).expect("an optimal Maximizer strategy exists");
    let tau_index = (0..taus).find(|&j| attains(&best_against[j])).expect("an optimal Minimizer strategy exists");
    let mut choice = vec![0; n];
    decode(sigma_index, &max_states, &max_counts, &mut choice);
    decode(tau_index, &min_states, &min_counts, &mut choice);
    let profile = StrategyProfile { choices: choice };
    Ok(OracleResult { values: maxmin, sigma: profile.sigma(game), tau: profile.tau(game), profiles: required })
}

/// Optimal value of the game played for `k` steps, computed by recursion
/// over (state, steps left) in exact arithmetic. Equals the `k`-th iterate
/// of value iteration.
pub fn finite_horizon_value(game: &StochasticGame, objective: &Objective, k: usize) -> Result<Assignment> {
    let exact = finite_horizon_value_rational(game, objective, k)?;
    Ok(exact.iter().map(Scalar::to_f64).collect::<Vec<_>>().into())
}

pub fn finite_horizon_value_rational(
    game: &StochasticGame,
    objective: &Objective,
    k: usize,
) -> Result<Vec<BigRational>> {
    if k > MAX_HORIZON {
        return Err(Error::HorizonTooLarge(k));
    }
    objective.validate(game)?;
    let numeric = NumericGame::<BigRational>::from_game(game)?;
    let mut memo = HashMap::new();
    (0..game.num_states()).map(|s| Ok(horizon(game, &numeric, objective, s, k, &mut memo))).collect()
}

fn horizon(
    game: &StochasticGame,
    numeric: &NumericGame<BigRational>,
    objective: &Objective,
    s: usize,
    steps: usize,
    memo: &mut HashMap<(usize, usize), BigRational>,
) -> BigRational {
    if let Some(v) = memo.get(&(s, steps)) {
        return v.clone();
    }
    let value = if steps == 0 {
        let hit = objective.is_target(s);
        match objective.kind {
            ObjectiveKind::Reachability if hit => BigRational::one(),
            ObjectiveKind::Safety if !hit => BigRational::one(),
            _ => BigRational::zero(),
        }
    } else {
        let mut best: Option<BigRational> = None;
        for dist in &numeric.actions[s] {
            let mut v = BigRational::zero();
            for (t, p) in dist {
                v += p.clone() * horizon(game, numeric, objective, *t, steps - 1, memo);
            }
            best = Some(match best {
                None => v,
                Some(b) => match game.owner(s) {
                    Player::Max if v > b => v,
                    Player::Min if v < b => v,
                    _ => b,
                },
            });
        }
        let base = if objective.accumulates_reward() { numeric.reward[s].clone() } else { BigRational::zero() };
        base + best.expect("every state has an action")
    };
    memo.insert((s, steps), value.clone());
    value
}
