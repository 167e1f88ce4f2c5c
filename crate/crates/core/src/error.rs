use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid port layout: {0}")]
    InvalidLayout(String),

    #[error("duplicate port name `{0}`")]
    DuplicatePort(String),

    #[error("layout mismatch: expected {expected}, found {found}")]
    LayoutMismatch { expected: String, found: String },

    #[error("{what} count {count} exceeds the enumeration cap {cap}")]
    CapExceeded {
        what: &'static str,
        count: String,
        cap: u64,
    },

    #[error("invalid transfer function: {0}")]
    InvalidFunction(String),

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("invalid transition table: {0}")]
    InvalidTable(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid velocity: {0}")]
    InvalidVelocity(String),

    #[error("port `{0}` has no spacetime placement")]
    UnplacedPort(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("spacetime wiring is not admissible: {0}")]
    InadmissibleWiring(String),

    #[error("missing evidence: {0}")]
    MissingEvidence(String),

    #[error("parse error: {0}")]
    Parse(String),
}
