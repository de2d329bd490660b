//! Exact providers backed by brute-force distances.

use std::sync::Arc;

use ksubs_core::{sort_proposals, PathOutcome, ProviderBundle, ProviderError, Scalar, SubgoalProposal};
use ksubs_envs::rubik::{neighbourhood, shortest_path, CubeState, DistanceTable, Move, RubikCube};
use ksubs_envs::sokoban::{bfs_get_path, dijkstra_all, forward_ball, Direction, Dist, DistanceMap, OverCap, Sokoban, SokobanBoard};

fn uniform<S: Ord, F: Scalar>(states: Vec<S>) -> Vec<SubgoalProposal<S, F>> {
    if states.is_empty() {
        return Vec::new();
    }
    let p = F::one() / F::from_count(states.len());
    let mut out: Vec<_> = states.into_iter().map(|s| SubgoalProposal::new(s, p)).collect();
    sort_proposals(&mut out);
    out
}

/// Rubik oracle: the `C3` closest states of the `k`-move neighbourhood, value
/// `−distance`, and the first move of a shortest path as the policy.
#[derive(Debug, Clone)]
pub struct RubikOracle {
    table: &'static DistanceTable,
    /// Forward search depth past the distance table.
    pub extra_depth: usize,
}

impl Default for RubikOracle {
    fn default() -> Self {
        Self::new(4)
    }
}

impl RubikOracle {
    pub fn new(extra_depth: usize) -> Self {
        Self {
            table: DistanceTable::shared(),
            extra_depth,
        }
    }

    pub fn max_depth(&self) -> usize {
        self.table.depth() + self.extra_depth
    }

    pub fn distance(&self, s: &CubeState) -> Result<usize, ProviderError> {
        self.table.distance(s, self.extra_depth).ok_or_else(|| {
            ProviderError::Unknown(format!("distance beyond {} moves", self.max_depth()))
        })
    }

    /// Exact distance, or `max_depth + 1` for states past the search horizon.
    pub fn horizon_distance(&self, s: &CubeState) -> usize {
        self.distance(s).unwrap_or(self.max_depth() + 1)
    }

    /// Neighbourhood states ranked by (distance, state). Past one move beyond
    /// the table, distances are only bounded, so far states rank by order alone.
    pub fn ranked_neighbourhood(&self, s: &CubeState, k: usize, take: usize) -> Vec<CubeState> {
        let ball = neighbourhood(s, k);
        let mut hits: Vec<(usize, CubeState)> = ball
            .iter()
            .filter_map(|t| self.table.lookup(t).map(|d| (d, *t)))
            .collect();
        // table entries are all closer than anything outside it
        if hits.len() < take {
            let depth = self.table.depth();
            hits = ball
                .iter()
                .map(|t| {
                    let d = self.table.lookup(t).unwrap_or_else(|| {
                        let near = Move::ALL.iter().any(|&m| self.table.lookup(&t.apply(m)).is_some());
                        if near { depth + 1 } else { self.max_depth() + 1 }
                    });
                    (d, *t)
                })
                .collect();
        }
        hits.sort();
        hits.into_iter().take(take).map(|(_, t)| t).collect()
    }
}

impl<F: Scalar> ProviderBundle<RubikCube, F> for RubikOracle {
    fn subgoals(
        &mut self,
        _env: &RubikCube,
        state: &CubeState,
        k: usize,
        max_candidates: usize,
    ) -> Result<Vec<SubgoalProposal<CubeState, F>>, ProviderError> {
        Ok(uniform(self.ranked_neighbourhood(state, k, max_candidates)))
    }

    fn value(&mut self, _env: &RubikCube, state: &CubeState) -> Result<F, ProviderError> {
        Ok(-F::from_count(self.horizon_distance(state)))
    }

    fn policy(&mut self, _env: &RubikCube, state: &CubeState, subgoal: &CubeState) -> Result<Move, ProviderError> {
        shortest_path(state, subgoal, self.max_depth())
            .and_then(|p| p.first().copied())
            .ok_or_else(|| ProviderError::Unknown("no path to subgoal".into()))
    }
}

/// Sokoban oracle over one board's exact distance map. The low-level policy is
/// a breadth-first search.
#[derive(Debug, Clone)]
pub struct SokobanOracle {
    map: Arc<DistanceMap>,
    /// Value reported for states that cannot be solved.
    pub dead_value: f64,
}

impl SokobanOracle {
    pub fn new(board: &SokobanBoard, cap: usize) -> Result<Self, OverCap> {
        Ok(Self::from_map(Arc::new(dijkstra_all(board, cap)?)))
    }

    pub fn from_map(map: Arc<DistanceMap>) -> Self {
        Self {
            map,
            dead_value: -1.0e3,
        }
    }

    pub fn map(&self) -> &DistanceMap {
        &self.map
    }

    fn dist(&self, s: &SokobanBoard) -> Result<Dist, ProviderError> {
        self.map
            .get(s)
            .ok_or_else(|| ProviderError::Unknown("board outside the certified graph".into()))
    }
}

impl<F: Scalar> ProviderBundle<Sokoban, F> for SokobanOracle {
    fn subgoals(
        &mut self,
        _env: &Sokoban,
        state: &SokobanBoard,
        k: usize,
        max_candidates: usize,
    ) -> Result<Vec<SubgoalProposal<SokobanBoard, F>>, ProviderError> {
        let mut live: Vec<(u32, SokobanBoard)> = forward_ball(state, k)
            .into_iter()
            .skip(1)
            .filter_map(|(t, _)| self.map.get(&t).and_then(Dist::live).map(|d| (d, t)))
            .collect();
        live.sort();
        Ok(uniform(live.into_iter().take(max_candidates).map(|(_, t)| t).collect()))
    }

    fn value(&mut self, _env: &Sokoban, state: &SokobanBoard) -> Result<F, ProviderError> {
        Ok(match self.dist(state)? {
            Dist::Live(d) => -F::from_count(d as usize),
            Dist::Dead => F::lit(self.dead_value),
        })
    }

    fn policy(&mut self, _env: &Sokoban, state: &SokobanBoard, subgoal: &SokobanBoard) -> Result<Direction, ProviderError> {
        bfs_get_path(state, subgoal, 64)
            .first()
            .copied()
            .ok_or_else(|| ProviderError::Unknown("no path to subgoal".into()))
    }

    fn get_path(
        &mut self,
        _env: &Sokoban,
        start: &SokobanBoard,
        subgoal: &SokobanBoard,
        step_limit: usize,
    ) -> PathOutcome<Direction> {
        let path = bfs_get_path(start, subgoal, step_limit);
        let n = path.len();
        if n == 0 {
            PathOutcome::unreachable(0, 0)
        } else {
            PathOutcome::reached(path, n, 0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ksubs_envs::rubik::{brute_distance, format_moves, parse_moves};

    #[test]
    fn rubik_oracle_top_proposal_solves_distance_four() {
        let s = CubeState::solved().apply_all(&parse_moves("F R U' B").unwrap());
        assert_eq!(brute_distance(&s, 8), Some(4));
        let mut o = RubikOracle::default();
        let props: Vec<SubgoalProposal<CubeState, f64>> = o.subgoals(&RubikCube, &s, 4, 3).unwrap();
        assert_eq!(props.len(), 3);
        assert!(props.iter().any(|p| p.state.is_solved()));
        assert_eq!(ProviderBundle::<RubikCube, f64>::value(&mut o, &RubikCube, &CubeState::solved()).unwrap(), 0.0);
        assert_eq!(ProviderBundle::<RubikCube, f64>::value(&mut o, &RubikCube, &s).unwrap(), -4.0);
    }

    #[test]
    fn rubik_policy_path() {
        let s = CubeState::solved().apply_all(&parse_moves("L D").unwrap());
        let mut o = RubikOracle::default();
        let out = ksubs_core::get_path_learned(
            &s,
            &CubeState::solved(),
            &mut |a: &CubeState, b: &CubeState| ProviderBundle::<RubikCube, f64>::policy(&mut o, &RubikCube, a, b),
            &RubikCube,
            7,
        );
        assert_eq!(format_moves(&out.actions), "D' L'");
    }
}
