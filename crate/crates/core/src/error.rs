use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("kernel {0} is not supported by this operation")]
    UnsupportedKernel(String),

    #[error("{what} = {value} is outside the available range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error(
        "problem size {size} exceeds the cap of {cap} cost entries; subsample the measures first"
    )]
    ResourceLimit { size: usize, cap: usize },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
