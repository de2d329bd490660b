//! Wire bridge to externally hosted models.

mod client;
pub mod protocol;
pub mod server;

pub use client::{validate_candidates, BridgeBundle, BridgeClient, Endpoint, Transport, DEFAULT_TIMEOUT};
pub use protocol::{Candidate, Request, Response, PROTOCOL_VERSION};
