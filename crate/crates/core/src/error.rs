use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A table, search or enumeration would exceed its configured budget.
    #[error("resource budget exceeded: {what} needs {required}, budget is {budget}")]
    Resource {
        what: String,
        required: u128,
        budget: u128,
    },

    #[error("malformed tree: node {node} has no child for reachable answer {key}")]
    MalformedTree { node: String, key: String },

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    /// The machine's behaviour depends on a float tie the tolerance cannot resolve.
    #[error("ambiguous: {0}")]
    Ambiguous(String),

    #[error("protocol fault: {0}")]
    ProtocolFault(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, required: u128, budget: u128) -> Self {
        Error::Resource {
            what: what.into(),
            required,
            budget,
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
