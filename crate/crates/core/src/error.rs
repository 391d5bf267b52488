use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("{0} points cannot form a red/black decomposition (need an odd count >= 3)")]
    EvenPointCount(usize),

    #[error("rectangle for subdomain {j} at iteration {k} starts at t={t_lo} above certified data (min front {front_min})")]
    InvalidPitch {
        j: usize,
        k: usize,
        t_lo: f64,
        front_min: f64,
    },

    #[error("tent pitching stagnated at iteration {k}: certified front stopped advancing")]
    Stagnation { k: usize },

    #[error("grid misalignment: {0}")]
    Misaligned(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("closed-form d'Alembert solution requires c_left == c_right")]
    NotHomogeneous,

    #[error("operation undefined for strategy class {0}")]
    UnsupportedClass(char),

    #[error("no closed form for this strategy: {0}")]
    NoClosedForm(String),

    #[error("local solve failed for subdomain {j} at iteration {k}: {reason}")]
    LocalSolve { j: usize, k: usize, reason: String },

    #[error("empty strategy list")]
    EmptyStrategyList,
}

pub type Result<T> = std::result::Result<T, Error>;
