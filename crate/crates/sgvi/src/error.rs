use thiserror::Error;

/// Errors reported by parsing, transforms and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed game document: {0}")]
    Malformed(String),
    #[error("empty game")]
    EmptyGame,
    #[error("state {state}: action list is empty")]
    EmptyActions { state: String },
    #[error("state {state}, action {action}: distribution sums to {sum:.4}")]
    DistributionSum { state: String, action: usize, sum: f64 },
    #[error("state {state}, action {action}: probability {prob} outside [0, 1]")]
    ProbabilityRange { state: String, action: usize, prob: f64 },
    #[error("state {state}: successor {successor} does not exist")]
    DanglingSuccessor { state: String, successor: String },
    #[error("duplicate state id {0}")]
    DuplicateState(String),
    #[error("state {state}: negative reward {reward}")]
    NegativeReward { state: String, reward: f64 },
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state set is not closed under the given actions")]
    NotClosed,
    #[error("strategy undefined at state {0}")]
    StrategyUndefined(usize),
    #[error("both players have choices; expected a single-owner model")]
    TwoOwner,
    #[error("state {0} has more than one action; expected a Markov chain")]
    NotMarkovChain(usize),
    #[error("linear system is singular")]
    Singular,
    #[error("strategy enumeration needs {required} profiles, limit is {limit}")]
    EnumerationLimit { required: u128, limit: u128 },
    #[error("horizon {0} exceeds the supported maximum of 12")]
    HorizonTooLarge(usize),
    #[error("assignment is not a fixpoint (residual {0:e})")]
    NotAFixpoint(f64),
    #[error("max-min and min-max values differ at state {state}: {maxmin} vs {minmax}")]
    Determinacy { state: usize, maxmin: f64, minmax: f64 },
    #[error("probability {0} has no small-denominator rational form")]
    NotRational(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
