use std::time::Duration;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("player index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("interaction pair must consist of two distinct players (got {0} twice)")]
    SamePlayer(usize),
    #[error("player {0} is already a member of the context coalition")]
    PlayerInCoalition(usize),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("{n} players exceeds the enumeration limit of {limit}")]
    TooManyPlayers { n: usize, limit: usize },
    #[error("order {m} outside the valid range 0..={max}")]
    OrderOutOfRange { m: usize, max: usize },
    #[error("enumeration needs {needed} coalitions but the budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("evaluation failed: {0}")]
    EvaluationFailed(String),

    #[error("input set is empty")]
    EmptyInputSet,
    #[error("duplicate input id `{0}`")]
    DuplicateInputId(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("raw strengths average to zero; profile cannot be normalized")]
    DegenerateRaw,
    #[error("flat profile: max J equals min J")]
    FlatProfile,
    #[error("{0} band contains no grid orders")]
    EmptyBand(&'static str),
    #[error("denominator is zero")]
    ZeroDenominator,
    #[error("invalid AMRIS parameters: {0}")]
    InvalidParams(String),
    #[error("grid search needs at least 3 models, got {0}")]
    InsufficientModels(usize),
    #[error("every candidate (a, b, c) is degenerate on some model")]
    AllCandidatesDegenerate,
    #[error("model `{model}` has no value for metric `{metric}`")]
    MissingMetric { model: String, metric: String },
    #[error("correlation undefined: series `{0}` is constant")]
    ConstantSeries(String),
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {found}")]
    TooFewObservations { needed: usize, found: usize },

    #[error("reward table incomplete: {0}")]
    IncompleteTable(String),
    #[error("invalid reward table: {0}")]
    InvalidTable(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("suppression factor {0} must lie in [0, 1)")]
    InvalidFactor(f64),
    #[error("mix weight {0} must lie in [0, 1]")]
    InvalidLambda(f64),

    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("invalid mask spec: {0}")]
    InvalidMask(String),
    #[error("scorer unavailable: {0}")]
    ScorerUnavailable(String),
    #[error("scorer protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("scorer did not answer within {0:?}")]
    Timeout(Duration),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::SamePlayer(_) => "SamePlayer",
            Error::PlayerInCoalition(_) => "PlayerInCoalition",
            Error::InvalidGame(_) => "InvalidGame",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::TooManyPlayers { .. } => "TooManyPlayers",
            Error::OrderOutOfRange { .. } => "OrderOutOfRange",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::EvaluationFailed(_) => "EvaluationFailed",
            Error::EmptyInputSet => "EmptyInputSet",
            Error::DuplicateInputId(_) => "DuplicateInputId",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::DegenerateRaw => "DegenerateRaw",
            Error::FlatProfile => "FlatProfile",
            Error::EmptyBand(_) => "EmptyBand",
            Error::ZeroDenominator => "ZeroDenominator",
            Error::InvalidParams(_) => "InvalidParams",
            Error::InsufficientModels(_) => "InsufficientModels",
            Error::AllCandidatesDegenerate => "AllCandidatesDegenerate",
            Error::MissingMetric { .. } => "MissingMetric",
            Error::ConstantSeries(_) => "ConstantSeries",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::TooFewObservations { .. } => "TooFewObservations",
            Error::IncompleteTable(_) => "IncompleteTable",
            Error::InvalidTable(_) => "InvalidTable",
            Error::InvalidPermutation(_) => "InvalidPermutation",
            Error::InvalidFactor(_) => "InvalidFactor",
            Error::InvalidLambda(_) => "InvalidLambda",
            Error::BadGrid(_) => "BadGrid",
            Error::InvalidMask(_) => "InvalidMask",
            Error::ScorerUnavailable(_) => "ScorerUnavailable",
            Error::ProtocolViolation(_) => "ProtocolViolation",
            Error::Timeout(_) => "Timeout",
        }
    }
}
