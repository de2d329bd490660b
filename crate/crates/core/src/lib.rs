//! Subgoal search: planners that search the graph induced by a k-step-ahead
//! subgoal generator, guided by a value function and connected by a low-level
//! conditional policy.
//!
//! Everything real-valued is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below fix the scalar for callers that do not care.

pub mod best_first;
pub mod chain;
pub mod config;
pub mod env;
pub mod error;
pub mod mcts;
pub mod metrics;
pub mod path;
pub mod provider;
pub mod prune;
pub mod result;
pub mod scalar;
pub mod seed;

pub use best_first::bf_ksubs_solve;
pub use chain::{chain_sampler_solve, ChainConfig};
pub use config::{CountingPolicy, SearchConfig};
pub use env::{Environment, StateCodec};
pub use error::{ConfigError, SearchError};
pub use mcts::{mcts_solve, mcts_solve_with_tree, replay_trace, MctsConfig, MctsTree, NodeStats, TraceEvent, TreeEdge};
pub use metrics::{graph_size, SearchMetrics};
pub use path::{get_path_learned, PathOutcome};
pub use provider::{
    check_proposals, sort_proposals, BehaviorPolicy, ProviderBundle, ProviderError, SubgoalProposal,
    UniformBehavior,
};
pub use prune::prune_by_total_probability;
pub use result::{SearchResult, SearchStatus};
pub use scalar::Scalar;

pub type SearchConfig64 = SearchConfig<f64>;
pub type SearchConfig32 = SearchConfig<f32>;
pub type ChainConfig64 = ChainConfig<f64>;
pub type MctsConfig64 = MctsConfig<f64>;
pub type MctsConfig32 = MctsConfig<f32>;
pub type NodeStats64 = NodeStats<f64>;
pub type Proposal64<S> = SubgoalProposal<S, f64>;
