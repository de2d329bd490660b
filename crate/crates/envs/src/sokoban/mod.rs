//! Sokoban with a 7-channel one-hot cell encoding.
//!
//! Channels: 0 wall, 1 floor, 2 target, 3 box, 4 box on target, 5 agent,
//! 6 agent on target. Text boards use `#`, ` `, `.`, `$`, `*`, `@`, `+`.

pub mod analysis;
mod board;
pub mod corpus;
mod graph;
pub mod pixel;

pub use board::{parse_boards, BoardError, Cell, Direction, Sokoban, SokobanBoard, CHANNELS};
pub use graph::{bfs_get_path, dijkstra_all, forward_ball, Dist, DistanceMap, OverCap};

/// Graph-size cap used when certifying boards.
pub const DEFAULT_CAP: usize = 200_000;
