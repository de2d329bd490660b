//! Concrete generator / value / policy providers: exact oracles, noisy and
//! corrupted wrappers, count-based tabular models, and a client for models
//! served over a newline-delimited JSON bridge.

pub mod bridge;
pub mod noisy;
pub mod oracle;
pub mod tabular;

pub use ksubs_envs::gridworld::GridBundle;
pub use noisy::{CorruptedGenerator, NoisyValue};
pub use oracle::{RubikOracle, SokobanOracle};
pub use tabular::{read_records, Record, TabularBundle, TabularModel};
