use thiserror::Error;

use crate::provider::ProviderError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid configuration: {msg}")]
pub struct ConfigError {
    pub msg: String,
}

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self { msg: msg.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// The value function failed; frontier ordering cannot continue.
    #[error("value provider failed: {0}")]
    Value(ProviderError),
    #[error("node has no children")]
    NoChildren,
}
