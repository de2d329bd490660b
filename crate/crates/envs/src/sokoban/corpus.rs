//! Bundled hand-made boards, at most 8×8 with at most two boxes.

use super::board::{parse_boards, SokobanBoard};

pub const MICRO_CORPUS: &str = include_str!("../../data/sokoban_micro.txt");

pub fn micro_corpus() -> Vec<SokobanBoard> {
    parse_boards(MICRO_CORPUS).expect("bundled corpus parses")
}
