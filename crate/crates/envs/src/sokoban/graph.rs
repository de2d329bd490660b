use std::collections::{HashMap, VecDeque};

use super::board::{Direction, SokobanBoard};

/// Breadth-first search over primitive moves, at most `k` deep. Returns a
/// shortest sequence reaching `subgoal` exactly, or an empty list.
pub fn bfs_get_path(start: &SokobanBoard, subgoal: &SokobanBoard, k: usize) -> Vec<Direction> {
    if start == subgoal || k == 0 {
        return Vec::new();
    }
    let mut visited = std::collections::HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start.clone(), Vec::new())]);
    while let Some((s, path)) = queue.pop_front() {
        for dir in Direction::ALL {
            let next = s.step(dir);
            if !visited.insert(next.clone()) {
                continue;
            }
            let mut child_path: Vec<Direction> = path.clone();
            child_path.push(dir);
            if &next == subgoal {
                return child_path;
            }
            if child_path.len() < k {
                queue.push_back((next, child_path));
            }
        }
    }
    Vec::new()
}

/// Every state reachable within `radius` moves, with its move distance from `start`.
pub fn forward_ball(start: &SokobanBoard, radius: usize) -> Vec<(SokobanBoard, usize)> {
    let mut seen = HashMap::from([(start.clone(), 0usize)]);
    let mut out = vec![(start.clone(), 0)];
    let mut head = 0;
    while head < out.len() {
        let (s, d) = out[head].clone();
        head += 1;
        if d == radius {
            continue;
        }
        for dir in Direction::ALL {
            let next = s.step(dir);
            if !seen.contains_key(&next) {
                seen.insert(next.clone(), d + 1);
                out.push((next, d + 1));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dist {
    Live(u32),
    /// No solved state is reachable.
    Dead,
}

impl Dist {
    pub fn live(self) -> Option<u32> {
        match self {
            Dist::Live(d) => Some(d),
            Dist::Dead => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("state graph exceeds the cap of {cap} states")]
pub struct OverCap {
    pub cap: usize,
}

/// Exact distance to the nearest solved state for every forward-reachable state.
#[derive(Debug, Clone)]
pub struct DistanceMap {
    states: Vec<SokobanBoard>,
    index: HashMap<SokobanBoard, usize>,
    succ: Vec<[usize; 4]>,
    dist: Vec<Option<u32>>,
}

impl DistanceMap {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[SokobanBoard] {
        &self.states
    }

    pub fn index_of(&self, b: &SokobanBoard) -> Option<usize> {
        self.index.get(b).copied()
    }

    /// `None` when `b` lies outside the explored graph.
    pub fn get(&self, b: &SokobanBoard) -> Option<Dist> {
        self.index_of(b).map(|i| self.dist_at(i))
    }

    pub fn dist_at(&self, i: usize) -> Dist {
        self.dist[i].map_or(Dist::Dead, Dist::Live)
    }

    /// Successor indices in `Direction::ALL` order (self-loops included).
    pub fn successors(&self, i: usize) -> &[usize; 4] {
        &self.succ[i]
    }

    pub fn live_count(&self) -> usize {
        self.dist.iter().filter(|d| d.is_some()).count()
    }

    /// Greedy descent through the first move lowering the distance by one.
    pub fn solution_path(&self, b: &SokobanBoard) -> Option<(Vec<SokobanBoard>, Vec<Direction>)> {
        let mut i = self.index_of(b)?;
        let mut d = self.dist[i]?;
        let mut states = vec![self.states[i].clone()];
        let mut actions = Vec::new();
        while d > 0 {
            let (dir, j) = Direction::ALL
                .iter()
                .zip(self.succ[i])
                .find(|&(_, j)| self.dist[j] == Some(d - 1))
                .expect("live state has a descending edge");
            actions.push(*dir);
            states.push(self.states[j].clone());
            i = j;
            d -= 1;
        }
        Some((states, actions))
    }
}

/// Enumerates the forward state graph from `board` and runs a multi-source
/// breadth-first search backwards from its solved states.
pub fn dijkstra_all(board: &SokobanBoard, cap: usize) -> Result<DistanceMap, OverCap> {
    let mut states = vec![board.clone()];
    let mut index = HashMap::from([(board.clone(), 0usize)]);
    let mut succ: Vec<[usize; 4]> = Vec::new();
    let mut head = 0;
    while head < states.len() {
        let s = states[head].clone();
        let mut row = [0usize; 4];
        for (slot, dir) in row.iter_mut().zip(Direction::ALL) {
            let next = s.step(dir);
            *slot = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if states.len() >= cap {
                        return Err(OverCap { cap });
                    }
                    let j = states.len();
                    index.insert(next.clone(), j);
                    states.push(next);
                    j
                }
            };
        }
        succ.push(row);
        head += 1;
    }

    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for (i, row) in succ.iter().enumerate() {
        for &j in row {
            if j != i {
                pred[j].push(i);
            }
        }
    }
    let mut dist = vec![None; states.len()];
    let mut queue = VecDeque::new();
    for (i, s) in states.iter().enumerate() {
        if s.is_solved() {
            dist[i] = Some(0);
            queue.push_back(i);
        }
    }
    while let Some(j) = queue.pop_front() {
        let d = dist[j].expect("queued states have a distance");
        for &i in &pred[j] {
            if dist[i].is_none() {
                dist[i] = Some(d + 1);
                queue.push_back(i);
            }
        }
    }
    Ok(DistanceMap {
        states,
        index,
        succ,
        dist,
    })
}
