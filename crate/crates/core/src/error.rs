use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("at least 2 users are required, got {0}")]
    TooFewUsers(usize),

    #[error("SNR of user {index} must be positive and finite, got {value}")]
    NonPositiveSnr { index: usize, value: f64 },

    #[error("user index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("pair {{{0}, {0}}} pairs a user with itself")]
    SelfPair(usize),

    #[error("ordering has no pairs")]
    EmptyOrdering,

    #[error("graph has {graph} vertices but the SNR profile has {profile} users")]
    SizeMismatch { graph: usize, profile: usize },

    #[error("client graph is not connected, the ordering is infeasible")]
    Infeasible,

    #[error("not a tree ordering: {edges} edges on {vertices} vertices")]
    NotATree { vertices: usize, edges: usize },

    #[error("user {0} is not paired with anyone")]
    IsolatedVertex(usize),

    #[error("phase count must be at least 1")]
    ZeroPhases,

    #[error("edge {{{0}, {1}}} is not in the graph")]
    MissingEdge(usize, usize),

    #[error("V-transform needs three distinct vertices, got ({0}, {1}, {2})")]
    DegenerateTransform(usize, usize, usize),

    #[error("Prüfer code for {n} vertices must have length {expected}, got {got}")]
    BadCodeLength { n: usize, expected: usize, got: usize },

    #[error("{n} users exceeds the enumeration cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("invalid channel configuration: {0}")]
    InvalidConfig(String),

    #[error("labels has {labels} entries for {n} users")]
    LabelCount { n: usize, labels: usize },

    #[error("malformed ordering document: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
