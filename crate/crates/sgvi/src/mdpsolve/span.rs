//! Mean-payoff value iteration with span-norm bounds.

use crate::bellman::best_q_value;
use crate::model::{aperiodicity_transform, Assignment, StochasticGame};

/// Self-loop weight of the internal aperiodicity transform.
pub const APERIODICITY_WEIGHT: f64 = 0.5;
/// Default sweep limit of [`mean_payoff_span`].
pub const MAX_SWEEPS: usize = 1_000_000;

/// Stops the iteration once the bound interval passes a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopThreshold {
    /// Stop when the upper bound drops below the value.
    UpperBelow(f64),
    /// Stop when the lower bound rises above the value.
    LowerAbove(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanStatus {
    Converged,
    StoppedEarly,
    IterationCapped,
}

/// Bounds on the optimal gain, valid at every state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanResult {
    pub lower: f64,
    pub upper: f64,
    pub status: SpanStatus,
    /// Last iterate, shifted so its minimum is zero. Use it to warm-start a
    /// later call on the same game.
    pub iterate: Assignment,
    pub sweeps: usize,
}

/// Iterates `x' = r + opt_a sum delta x` on the aperiodic version of `game`.
/// With `d = x' - x`, every sweep certifies `min d <= gain(s) <= max d` for
/// all states. Stops once `max d - min d <= eps`, when `stop` is crossed, or
/// after [`MAX_SWEEPS`] sweeps. The interval only shrinks to zero when all
/// states share the same optimal gain.
pub fn mean_payoff_span(
    game: &StochasticGame,
    eps: f64,
    warm_start: Option<&Assignment>,
    stop: Option<StopThreshold>,
) -> SpanResult {
    mean_payoff_span_observed(game, eps, warm_start, stop, MAX_SWEEPS, |_, _| {})
}

/// [`mean_payoff_span`] with an explicit sweep limit, calling `observe` with
/// the bounds of every sweep.
pub fn mean_payoff_span_observed(
    game: &StochasticGame,
    eps: f64,
    warm_start: Option<&Assignment>,
    stop: Option<StopThreshold>,
    max_sweeps: usize,
    mut observe: impl FnMut(f64, f64),
) -> SpanResult {
    let lazy = aperiodicity_transform(game, APERIODICITY_WEIGHT).expect("weight lies in (0, 1)");
    let n = game.num_states();
    let mut x = match warm_start {
        Some(w) if w.len() == n => w.clone(),
        _ => Assignment::constant(n, 0.0),
    };
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
    for sweep in 1..=max_sweeps.max(1) {
        let next: Vec<f64> = (0..n).map(|s| lazy.reward(s) + best_q_value(&lazy, &x, s)).collect();
        lower = f64::INFINITY;
        upper = f64::NEG_INFINITY;
        for (a, b) in next.iter().zip(x.iter()) {
            lower = lower.min(a - b);
            upper = upper.max(a - b);
        }
        observe(lower, upper);
        let base = next.iter().copied().fold(f64::INFINITY, f64::min);
        x = next.into_iter().map(|v| v - base).collect::<Vec<_>>().into();
        let status = if upper - lower <= eps {
            Some(SpanStatus::Converged)
        } else {
            match stop {
                Some(StopThreshold::UpperBelow(v)) if upper < v => Some(SpanStatus::StoppedEarly),
                Some(StopThreshold::LowerAbove(v)) if lower > v => Some(SpanStatus::StoppedEarly),
                _ => None,
            }
        };
        if let Some(status) = status {
            return SpanResult { lower, upper, status, iterate: x, sweeps: sweep };
        }
    }
    SpanResult { lower, upper, status: SpanStatus::IterationCapped, iterate: x, sweeps: max_sweeps.max(1) }
}

/// Gain-optimal actions for the converged iterate of [`mean_payoff_span`].
pub fn greedy_actions(game: &StochasticGame, iterate: &Assignment) -> Vec<usize> {
    (0..game.num_states())
        .map(|s| {
            let owner = game.owner(s);
            let mut best = 0;
            let mut best_value = owner.worst();
            for (a, action) in game.actions(s).iter().enumerate() {
                let v = action.expect(iterate);
                if owner.better(v, best_value) != best_value && (v - best_value).abs() > 1e-12 || a == 0 {
                    best = a;
                    best_value = v;
                }
            }
            best
        })
        .collect()
}
