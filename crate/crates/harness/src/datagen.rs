//! Dataset files in the tab-separated record format: id, step, state, action, value.

use std::io::Write;

use ksubs_core::StateCodec;
use ksubs_envs::rubik::generate_dataset;
use ksubs_envs::sokoban::{dijkstra_all, Sokoban, SokobanBoard, DEFAULT_CAP};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` reversed scrambles of `len` moves each.
pub fn rubik_records(count: usize, len: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_dataset(count, len, &mut rng)
        .iter()
        .flat_map(|t| t.records())
        .collect()
}

/// One shortest solution per board; over-cap and unsolvable boards are skipped
/// and their indices returned.
pub fn sokoban_records(boards: &[SokobanBoard]) -> (Vec<String>, Vec<usize>) {
    let mut lines = Vec::new();
    let mut skipped = Vec::new();
    for (id, board) in boards.iter().enumerate() {
        let Some((states, actions)) = dijkstra_all(board, DEFAULT_CAP)
            .ok()
            .and_then(|map| map.solution_path(board))
        else {
            skipped.push(id);
            continue;
        };
        let n = actions.len() as i64;
        for (l, s) in states.iter().enumerate() {
            let action = actions.get(l).map_or_else(|| "-".to_string(), |a| Sokoban.encode_action(a));
            lines.push(format!("{id}\t{l}\t{}\t{action}\t{}", Sokoban.encode_state(s), l as i64 - n));
        }
    }
    (lines, skipped)
}

pub fn write_lines<W: Write>(mut out: W, lines: &[String]) -> std::io::Result<()> {
    for l in lines {
        writeln!(out, "{l}")?;
    }
    out.flush()
}
