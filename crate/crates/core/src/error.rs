use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point ({re}, {im}) is outside the admissible region (|z| = {modulus})")]
    OutsideDisk { re: f64, im: f64, modulus: f64 },

    #[error("zero #{index} has modulus {modulus}; zeros must satisfy |a| <= 1 - 1e-9")]
    ZeroTooCloseToBoundary { index: usize, modulus: f64 },

    #[error("rotation factor has modulus {0}, expected 1")]
    NotUnimodular(f64),

    #[error("pole of the map encountered at ({re}, {im})")]
    Pole { re: f64, im: f64 },

    #[error(
        "boundary lift inversion did not converge: target {target}, bracket [{lo}, {hi}], \
         {iterations} iterations"
    )]
    RootFinding {
        target: f64,
        lo: f64,
        hi: f64,
        iterations: usize,
    },

    #[error("interior orbit too close to the unit circle at step n = {n} (1 - |F_n(0)| = {gap:e})")]
    PrecisionExhausted { n: usize, gap: f64 },

    #[error("map at index {n} is not centred (|f(0)| = {value:e})")]
    NotCentered { n: usize, value: f64 },

    #[error("horizon {horizon} too short: completed {completed} of {requested} requested blocks")]
    PartialPartition {
        completed: usize,
        requested: usize,
        horizon: usize,
    },

    #[error("empty block request")]
    EmptyBlock,

    #[error("exact preimage budget exceeded: {required} arcs needed, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("composition degree {0} exceeds the expansion limit of 64")]
    DegreeLimit(usize),

    #[error("sequence defined only up to index {horizon}, requested {n}")]
    HorizonExceeded { n: usize, horizon: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("postcondition failed: {0}")]
    Postcondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
