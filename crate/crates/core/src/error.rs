use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} lies outside [0, 1]")]
    Domain(f64),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid map definition: {0}")]
    InvalidMap(String),

    #[error("{what}: count {count} exceeds the cap {cap}")]
    Resource {
        what: &'static str,
        count: usize,
        cap: usize,
    },

    #[error("iterate is not a diffeomorphism on the interval (witness x = {witness})")]
    NotDiffeomorphic { witness: f64 },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("intervals of length {gamma} do not cover [0, 1] within {cap} iterates")]
    NotTopologicallyExact { gamma: f64, cap: usize },

    #[error("unsupported map: {0}")]
    UnsupportedMap(String),

    #[error("no backward stability scale passed for epsilon = {epsilon}")]
    NoScaleFound { epsilon: f64 },

    #[error("no safe point found in the cell [{lo}, {hi}]")]
    NoSafePointInCell { lo: f64, hi: f64 },

    #[error("power iteration did not converge in {steps} steps")]
    Convergence { steps: usize },

    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    #[error("search failure: {0}")]
    SearchFailure(String),

    #[error("no partition element meets the constraint set near the base point")]
    NoConstrainedMass,

    #[error("horseshoe construction rejected: {0}")]
    ConstructionRejected(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("rate fit needs at least 3 finite points, got {finite}")]
    InsufficientData { finite: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
