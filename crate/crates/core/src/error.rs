use crate::graph::Timestep;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{file}:{line}:{column}: {message}")]
    Malformed {
        file: String,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{location}edge {src}->{dst} at t={t} references undeclared node `{missing}`")]
    DanglingEndpoint {
        location: String,
        src: String,
        dst: String,
        t: Timestep,
        missing: String,
    },

    #[error("edge {src}->{dst} at t={t} precedes creation of `{node}` (created at t={created})")]
    EdgeBeforeCreation {
        src: String,
        dst: String,
        t: Timestep,
        node: String,
        created: Timestep,
    },

    #[error("attribute `{0}` mixes categorical and numeric values")]
    MixedAttributeType(String),

    #[error("timestep {t} outside dataset range [{lo}, {hi}]")]
    Range { t: Timestep, lo: Timestep, hi: Timestep },

    #[error("{location}unknown node `{node}`")]
    UnknownNode { location: String, node: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("degenerate training data: {0}")]
    DegenerateModel(String),

    #[error("empty training set: {0}")]
    EmptyTraining(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
