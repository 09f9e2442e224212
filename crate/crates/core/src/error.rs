use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rank {0} out of range (supported: 1..=3)")]
    RankOutOfRange(usize),
    #[error("alcove has {0} weights, more than the supported 200")]
    AlcoveTooLarge(usize),
    #[error("level must be positive")]
    ZeroLevel,
    #[error("U(1)_{0} requires even level: odd k needs a spin structure (the twists e^{{πia²/k}} are not well defined on Z/k)")]
    OddU1Level(u32),
    #[error("integer extraction residual {residual:.3e} exceeds 1e-6 in {what}")]
    Residual { what: &'static str, residual: f64 },
    #[error("pants-decomposition oracle disagrees: formula {formula}, oracle {oracle}")]
    PantsMismatch { formula: i64, oracle: i64 },
    #[error("label {0} out of range")]
    BadLabel(usize),
    #[error("invalid plumbing graph: {0}")]
    InvalidGraph(String),
    #[error("graph too large for the requested evaluation: {0}")]
    TooLarge(String),
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("invalid manifold specification: {0}")]
    BadSpec(String),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix must be square")]
    NotSquare,
    #[error("level {k} incompatible: {reason}")]
    IncompatibleLevel { k: u32, reason: String },
    #[error("invalid sweep: {0}")]
    BadSweep(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("series needs at least {needed} coefficients, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
