//! Bounded value iteration for turn-based stochastic games with
//! reachability, safety, total-reward and mean-payoff objectives.

pub mod bellman;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod global;
pub mod graph;
pub mod local;
pub mod mdpsolve;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod solve;

pub use error::{Error, Result};
