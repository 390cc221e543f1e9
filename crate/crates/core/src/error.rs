use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator closure exceeds the size cap of {cap} elements")]
    ClosureTooLarge { cap: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),
    #[error("multiplication is not associative at ({a}, {b}, {c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("mask has length {found}, expected group order {expected}")]
    MaskLength { expected: usize, found: usize },
    #[error("subset is not a subgroup")]
    NotSubgroup,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("word reduces to the identity")]
    TrivialWord,
    #[error("cannot parse word {input:?}: {reason}")]
    WordParse { input: String, reason: String },
    #[error("tuple has length {found}, word rank is {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("exhaustive enumeration needs {tuples} tuples, budget is {budget}")]
    EnumerationBudget { tuples: f64, budget: f64 },
    #[error("character table: {0}")]
    CharacterTable(String),
    #[error("class count {value} is not a nonnegative integer within tolerance")]
    NonIntegralCount { value: String },
    #[error("requested {requested} elements from a set of {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("element {element} has no representation as a product from the word images")]
    MissingRepresentation { element: usize },
    #[error("decomposition stuck on {group} (order {order}): no qualifying subgroup found")]
    DecompositionStuck { group: String, order: usize },
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: f64, limit: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
