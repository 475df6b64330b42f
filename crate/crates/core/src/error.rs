use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("arm index {arm} out of range for {m} arms")]
    ArmOutOfRange { arm: usize, m: usize },
    #[error("reward {0} is outside [0, 1]")]
    RewardOutOfRange(f64),
    #[error("arm {0} has not been observed yet")]
    Unobserved(usize),
    #[error("weight vector has length {got}, family is over {expected} arms")]
    WeightLength { got: usize, expected: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("family has more than {cap} super arms")]
    TooLarge { cap: usize },
    #[error("trace was recorded without sample vectors")]
    MissingSamples,
    #[error("solver did not converge: {0}")]
    Solver(String),
}
