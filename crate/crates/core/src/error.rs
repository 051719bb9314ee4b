use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),

    #[error("pursuer must be strictly faster than the evader (v_p_max = {v_p_max}, v_e_max = {v_e_max})")]
    SlowerPursuer { v_p_max: f64, v_e_max: f64 },

    #[error("line of sight undefined: players coincide")]
    DegenerateDirection,

    #[error("{name} is outside its domain: {value}")]
    Domain { name: &'static str, value: f64 },

    #[error("sensing requested at t = {time} with no budget left")]
    BudgetViolation { time: f64 },

    #[error("{player} exceeded its speed cap: |v| = {speed}, cap = {cap}")]
    SpeedLimit {
        player: &'static str,
        speed: f64,
        cap: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("exact enumeration over {intervals} randomised intervals exceeds the cap of {cap}")]
    EnumerationCap { intervals: usize, cap: usize },

    #[error("query not covered by the closed-form analysis: {0}")]
    RegionNotCovered(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
