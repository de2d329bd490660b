//! Sokoban analyses over a corpus: subgoal quality (Δ histogram), value-error
//! statistics and value monotonicity along shortest solutions.

use std::sync::Arc;

use ksubs_core::seed::derive_seed;
use ksubs_core::ProviderBundle;
use ksubs_envs::sokoban::analysis::{delta_stats, monotonicity_counts, value_error_stats, DeltaHistogram, ValueErrorStats};
use ksubs_envs::sokoban::{dijkstra_all, Dist, DistanceMap, OverCap, Sokoban, SokobanBoard, DEFAULT_CAP};
use ksubs_providers::{CorruptedGenerator, NoisyValue, SokobanOracle};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Boards with their exact distance maps; over-cap boards are listed separately.
pub struct Certified {
    pub boards: Vec<(usize, SokobanBoard, Arc<DistanceMap>)>,
    pub skipped: Vec<usize>,
}

pub fn certify(corpus: &[SokobanBoard]) -> Certified {
    let mut boards = Vec::new();
    let mut skipped = Vec::new();
    for (i, b) in corpus.iter().enumerate() {
        match dijkstra_all(b, DEFAULT_CAP) {
            Ok(m) => boards.push((i, b.clone(), Arc::new(m))),
            Err(OverCap { .. }) => skipped.push(i),
        }
    }
    Certified { boards, skipped }
}

impl Certified {
    fn dist(&self, s: &SokobanBoard) -> Option<Dist> {
        self.boards.iter().find_map(|(_, _, m)| m.get(s))
    }
}

pub const DELTA_HEADER: [&str; 2] = ["bucket", "count"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub bucket: String,
    pub count: usize,
}

/// Δ histogram of the oracle generator (optionally corrupted at `corrupt`)
/// with `k`-step proposals, `c3` per state.
pub fn delta(certified: &Certified, k: usize, c3: usize, corrupt: f64, seed: u64) -> (DeltaHistogram, Vec<DeltaRow>) {
    let mut hist = DeltaHistogram::default();
    for (i, board, map) in &certified.boards {
        let oracle = SokobanOracle::from_map(map.clone());
        let mut gen = CorruptedGenerator::new(oracle, corrupt, derive_seed(seed, *i as u64));
        let h = delta_stats(
            std::slice::from_ref(board),
            |s1, _| {
                ProviderBundle::<Sokoban, f64>::subgoals(&mut gen, &Sokoban, s1, k, c3)
                    .map(|ps| ps.into_iter().map(|p| p.state).collect())
                    .unwrap_or_default()
            },
            DEFAULT_CAP,
        )
        .expect("certified boards fit the cap");
        hist.merge(&h);
    }
    let mut rows: Vec<DeltaRow> = hist
        .counts
        .iter()
        .map(|(d, &count)| DeltaRow { bucket: d.to_string(), count })
        .collect();
    rows.push(DeltaRow { bucket: "dead".into(), count: hist.dead });
    rows.push(DeltaRow { bucket: "outside".into(), count: hist.outside });
    (hist, rows)
}

/// `V(s) = −dist(s) + ε(s)` with `ε ~ N(0, σ²)` drawn once per state.
pub struct NoisyDistance<'c> {
    certified: &'c Certified,
    noise: NoisyValue<(), SokobanBoard, f64>,
    sigma: f64,
}

impl<'c> NoisyDistance<'c> {
    pub fn new(certified: &'c Certified, sigma: f64, seed: u64) -> Self {
        Self {
            certified,
            noise: NoisyValue::new((), sigma, seed),
            sigma,
        }
    }

    pub fn value(&mut self, s: &SokobanBoard) -> f64 {
        let base = match self.certified.dist(s) {
            Some(Dist::Live(d)) => -(d as f64),
            _ => -1.0e3,
        };
        if self.sigma == 0.0 {
            base
        } else {
            base + self.noise.noise_for(s)
        }
    }
}

pub const VALUE_ERROR_HEADER: [&str; 9] = [
    "board",
    "path_states",
    "mean_step_improvement",
    "sampled_states",
    "mean_std",
    "over_optimism_1",
    "over_optimism_4",
    "over_optimism_1_samples",
    "over_optimism_4_samples",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueErrorRow {
    pub board: String,
    pub path_states: usize,
    pub mean_step_improvement: f64,
    pub sampled_states: usize,
    pub mean_std: f64,
    pub over_optimism_1: f64,
    pub over_optimism_4: f64,
    pub over_optimism_1_samples: usize,
    pub over_optimism_4_samples: usize,
}

/// Pools statistics by weighting each mean with its sample count.
#[derive(Debug, Clone, Default)]
struct Pool {
    path_states: usize,
    step_sum: f64,
    sampled: usize,
    std_sum: f64,
    opt1: f64,
    opt1_n: usize,
    opt4: f64,
    opt4_n: usize,
}

impl Pool {
    fn add(&mut self, s: &ValueErrorStats) {
        self.path_states += s.path_states;
        self.step_sum += s.mean_step_improvement * s.path_states as f64;
        self.sampled += s.sampled_states;
        self.std_sum += s.mean_std * s.sampled_states as f64;
        self.opt1 += s.over_optimism_1 * s.over_optimism_1_samples as f64;
        self.opt1_n += s.over_optimism_1_samples;
        self.opt4 += s.over_optimism_4 * s.over_optimism_4_samples as f64;
        self.opt4_n += s.over_optimism_4_samples;
    }

    fn row(&self, board: String) -> ValueErrorRow {
        let r = |a: f64, n: usize| if n == 0 { 0.0 } else { a / n as f64 };
        ValueErrorRow {
            board,
            path_states: self.path_states,
            mean_step_improvement: r(self.step_sum, self.path_states),
            sampled_states: self.sampled,
            mean_std: r(self.std_sum, self.sampled),
            over_optimism_1: r(self.opt1, self.opt1_n),
            over_optimism_4: r(self.opt4, self.opt4_n),
            over_optimism_1_samples: self.opt1_n,
            over_optimism_4_samples: self.opt4_n,
        }
    }
}

/// Value-error statistics per board and over the whole corpus (board `all`),
/// pooled over `realizations` independent noise draws.
pub fn value_errors(certified: &Certified, sigma: f64, radius: usize, realizations: usize, seed: u64) -> Vec<ValueErrorRow> {
    let mut per_board = vec![Pool::default(); certified.boards.len()];
    let mut all = Pool::default();
    for r in 0..realizations {
        let mut v = NoisyDistance::new(certified, sigma, derive_seed(seed, r as u64));
        for (slot, (_, board, _)) in certified.boards.iter().enumerate() {
            let stats = value_error_stats(std::slice::from_ref(board), |s| v.value(s), DEFAULT_CAP, radius)
                .expect("certified boards fit the cap");
            per_board[slot].add(&stats);
            all.add(&stats);
        }
    }
    let mut rows: Vec<ValueErrorRow> = certified
        .boards
        .iter()
        .zip(&per_board)
        .map(|((i, _, _), p)| p.row(i.to_string()))
        .collect();
    rows.push(all.row("all".into()));
    rows
}

/// `Φ(−ℓ / (σ√2))`: the chance that independent N(0, σ²) noise makes a state
/// `ℓ` steps closer look worse.
pub fn expected_decrease(l: usize, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, 1.0).expect("unit normal").cdf(-(l as f64) / (sigma * 2f64.sqrt()))
}

pub const MONOTONICITY_HEADER: [&str; 5] = ["l", "pairs", "decreases", "rate", "expected"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityRow {
    pub l: usize,
    pub pairs: usize,
    pub decreases: usize,
    pub rate: f64,
    pub expected: f64,
}

/// Fraction of solution-path pairs `(s_i, s_{i+ℓ})` with `V(s_{i+ℓ}) < V(s_i)`.
pub fn monotonicity(certified: &Certified, sigma: f64, ls: &[usize], realizations: usize, seed: u64) -> Vec<MonotonicityRow> {
    let paths: Vec<Vec<SokobanBoard>> = certified
        .boards
        .iter()
        .filter_map(|(_, b, m)| m.solution_path(b).map(|(states, _)| states))
        .collect();
    let mut counts = vec![(0usize, 0usize); ls.len()];
    for r in 0..realizations {
        let mut v = NoisyDistance::new(certified, sigma, derive_seed(seed, r as u64));
        for path in &paths {
            for (slot, &l) in ls.iter().enumerate() {
                let (h, n) = monotonicity_counts(path, |s| v.value(s), l);
                counts[slot].0 += h;
                counts[slot].1 += n;
            }
        }
    }
    ls.iter()
        .zip(counts)
        .map(|(&l, (decreases, pairs))| MonotonicityRow {
            l,
            pairs,
            decreases,
            rate: if pairs == 0 { 0.0 } else { decreases as f64 / pairs as f64 },
            expected: expected_decrease(l, sigma),
        })
        .collect()
}
