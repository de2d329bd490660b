//! Subgoal-quality and value-error statistics measured against exact distances.

use std::collections::BTreeMap;

use super::board::SokobanBoard;
use super::graph::{dijkstra_all, forward_ball, Dist, DistanceMap, OverCap};

/// Histogram of `Δ = dist(s1) − dist(s2)` over generated subgoals `s2` of
/// states `s1` on shortest solution paths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeltaHistogram {
    pub counts: BTreeMap<i64, usize>,
    /// `s2` cannot reach a solved state.
    pub dead: usize,
    /// `s2` is not reachable from the board's start at all.
    pub outside: usize,
}

impl DeltaHistogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum::<usize>() + self.dead + self.outside
    }

    pub fn merge(&mut self, other: &DeltaHistogram) {
        for (&d, &n) in &other.counts {
            *self.counts.entry(d).or_default() += n;
        }
        self.dead += other.dead;
        self.outside += other.outside;
    }
}

/// Live, non-solved states on the greedy shortest solution path of `board`.
pub fn path_states(map: &DistanceMap, board: &SokobanBoard) -> Vec<SokobanBoard> {
    map.solution_path(board)
        .map(|(states, _)| states.into_iter().filter(|s| !s.is_solved()).collect())
        .unwrap_or_default()
}

pub fn delta_stats<G>(boards: &[SokobanBoard], mut generator: G, cap: usize) -> Result<DeltaHistogram, OverCap>
where
    G: FnMut(&SokobanBoard, &DistanceMap) -> Vec<SokobanBoard>,
{
    let mut hist = DeltaHistogram::default();
    for board in boards {
        let map = dijkstra_all(board, cap)?;
        for s1 in path_states(&map, board) {
            let d1 = map.get(&s1).and_then(Dist::live).expect("path states are live") as i64;
            for s2 in generator(&s1, &map) {
                match map.get(&s2) {
                    Some(Dist::Live(d2)) => *hist.counts.entry(d1 - d2 as i64).or_default() += 1,
                    Some(Dist::Dead) => hist.dead += 1,
                    None => hist.outside += 1,
                }
            }
        }
    }
    Ok(hist)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValueErrorStats {
    /// Non-solved states visited on solution paths.
    pub path_states: usize,
    /// Mean of `V(s_{i+1}) − V(s_i)` over consecutive path states.
    pub mean_step_improvement: f64,
    /// Path states with `|S(s)| ≥ 5`.
    pub sampled_states: usize,
    /// Mean sample standard deviation of V over `S(s)`.
    pub mean_std: f64,
    /// Fraction of sampled states where some member of `S(s)` beats every successor one step closer.
    pub over_optimism_1: f64,
    /// Same, against states within four moves that are four steps closer.
    pub over_optimism_4: f64,
    pub over_optimism_1_samples: usize,
    pub over_optimism_4_samples: usize,
}

/// Minimum size of `S(s)` for a state to enter the spread statistics.
pub const MIN_SET: usize = 5;

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn max_of(xs: impl Iterator<Item = f64>) -> Option<f64> {
    xs.fold(None, |m, x| Some(m.map_or(x, |m: f64| m.max(x))))
}

/// Statistics of `value` along each board's shortest solution path. `S(s)` is
/// the set of states at the same distance as `s` reachable from `s` within
/// `radius` moves, `s` included.
pub fn value_error_stats<V>(
    boards: &[SokobanBoard],
    mut value: V,
    cap: usize,
    radius: usize,
) -> Result<ValueErrorStats, OverCap>
where
    V: FnMut(&SokobanBoard) -> f64,
{
    let mut out = ValueErrorStats::default();
    let (mut step_sum, mut step_n) = (0.0, 0usize);
    let mut std_sum = 0.0;
    let (mut opt1, mut opt4) = (0usize, 0usize);
    for board in boards {
        let map = dijkstra_all(board, cap)?;
        let Some((path, _)) = map.solution_path(board) else {
            continue;
        };
        for w in path.windows(2) {
            step_sum += value(&w[1]) - value(&w[0]);
            step_n += 1;
        }
        for s in path.iter().filter(|s| !s.is_solved()) {
            out.path_states += 1;
            let d = map.get(s).and_then(Dist::live).expect("path states are live");
            let ball = forward_ball(s, radius.max(4));
            let same: Vec<f64> = ball
                .iter()
                .filter(|(t, r)| *r <= radius && map.get(t) == Some(Dist::Live(d)))
                .map(|(t, _)| value(t))
                .collect();
            if same.len() < MIN_SET {
                continue;
            }
            out.sampled_states += 1;
            std_sum += sample_std(&same);
            let best_same = max_of(same.iter().copied()).expect("non-empty");

            let one_closer = max_of(
                ball.iter()
                    .filter(|(t, r)| *r == 1 && map.get(t) == Some(Dist::Live(d - 1)))
                    .map(|(t, _)| value(t)),
            );
            if let Some(best) = one_closer {
                out.over_optimism_1_samples += 1;
                opt1 += (best_same > best) as usize;
            }
            if d >= 4 {
                let four_closer = max_of(
                    ball.iter()
                        .filter(|(t, r)| *r <= 4 && map.get(t) == Some(Dist::Live(d - 4)))
                        .map(|(t, _)| value(t)),
                );
                if let Some(best) = four_closer {
                    out.over_optimism_4_samples += 1;
                    opt4 += (best_same > best) as usize;
                }
            }
        }
    }
    let ratio = |a: f64, n: usize| if n == 0 { 0.0 } else { a / n as f64 };
    out.mean_step_improvement = ratio(step_sum, step_n);
    out.mean_std = ratio(std_sum, out.sampled_states);
    out.over_optimism_1 = ratio(opt1 as f64, out.over_optimism_1_samples);
    out.over_optimism_4 = ratio(opt4 as f64, out.over_optimism_4_samples);
    Ok(out)
}

/// Fraction of indices `i` with `V(s_{i+l}) < V(s_i)`, or `None` when the path
/// has no such pair.
pub fn monotonicity_stats<V>(path: &[SokobanBoard], mut value: V, l: usize) -> Option<f64>
where
    V: FnMut(&SokobanBoard) -> f64,
{
    let (hits, n) = monotonicity_counts(path, &mut value, l);
    (n > 0).then(|| hits as f64 / n as f64)
}

/// `(decreases, pairs)` behind `monotonicity_stats`, for pooling across paths.
pub fn monotonicity_counts<V>(path: &[SokobanBoard], mut value: V, l: usize) -> (usize, usize)
where
    V: FnMut(&SokobanBoard) -> f64,
{
    if l == 0 || path.len() <= l {
        return (0, 0);
    }
    let vals: Vec<f64> = path.iter().map(&mut value).collect();
    let n = vals.len() - l;
    let hits = (0..n).filter(|&i| vals[i + l] < vals[i]).count();
    (hits, n)
}
