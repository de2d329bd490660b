//! Synthetic grid world with a noisy value function and a synthetic subgoal generator.
//!
//! States are points of `{0, …, n}^m`; the start is the origin and the goal is
//! `(n, …, n)`. Two states are adjacent when their L1 distance is 1.

use std::collections::HashMap;
use std::fmt;

use ksubs_core::seed::{derive_seed, substream};
use ksubs_core::{
    bf_ksubs_solve, sort_proposals, CountingPolicy, Environment, PathOutcome, ProviderBundle,
    ProviderError, Scalar, SearchConfig, StateCodec, SubgoalProposal,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig<F> {
    pub m: usize,
    pub n: i32,
    pub sigma: F,
    pub k: usize,
    pub c3: usize,
    pub seed: u64,
}

impl<F: Scalar> GridConfig<F> {
    /// The six-dimensional, side-ten setting with k = 4 and C3 = 4.
    pub fn table4(sigma: F) -> Self {
        Self {
            m: 6,
            n: 10,
            sigma,
            k: 4,
            c3: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridState {
    pub coords: Vec<i32>,
}

impl GridState {
    pub fn origin(m: usize) -> Self {
        Self { coords: vec![0; m] }
    }

    pub fn l1(&self, other: &Self) -> i32 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

impl fmt::Display for GridState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Unit move along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridMove {
    pub axis: usize,
    pub up: bool,
}

impl fmt::Display for GridMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.up { '+' } else { '-' }, self.axis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridWorld {
    pub m: usize,
    pub n: i32,
}

impl GridWorld {
    pub fn new(m: usize, n: i32) -> Self {
        assert!(m >= 1 && n >= 1, "grid needs m >= 1 and n >= 1");
        Self { m, n }
    }

    pub fn start(&self) -> GridState {
        GridState::origin(self.m)
    }

    pub fn goal(&self) -> GridState {
        GridState {
            coords: vec![self.n; self.m],
        }
    }

    pub fn in_bounds(&self, s: &GridState) -> bool {
        s.coords.len() == self.m && s.coords.iter().all(|&c| (0..=self.n).contains(&c))
    }

    pub fn true_dist(&self, s: &GridState) -> i32 {
        true_dist(s, self.n)
    }
}

/// L1 distance to `(n, …, n)`.
pub fn true_dist(s: &GridState, n: i32) -> i32 {
    s.coords.iter().map(|&c| n - c).sum()
}

impl Environment for GridWorld {
    type State = GridState;
    type Action = GridMove;

    fn next_state(&self, state: &GridState, action: &GridMove) -> GridState {
        let mut next = state.clone();
        let c = &mut next.coords[action.axis];
        let moved = if action.up { *c + 1 } else { *c - 1 };
        if (0..=self.n).contains(&moved) {
            *c = moved;
        }
        next
    }

    fn is_solved(&self, state: &GridState) -> bool {
        state.coords.iter().all(|&c| c == self.n)
    }

    fn actions(&self, state: &GridState) -> Vec<GridMove> {
        let mut out = Vec::with_capacity(2 * self.m);
        for axis in 0..self.m {
            let c = state.coords[axis];
            if c > 0 {
                out.push(GridMove { axis, up: false });
            }
            if c < self.n {
                out.push(GridMove { axis, up: true });
            }
        }
        out
    }
}

impl StateCodec for GridWorld {
    fn encode_state(&self, state: &GridState) -> String {
        state.to_string()
    }

    fn decode_state(&self, text: &str) -> Result<GridState, String> {
        let coords = text
            .split(',')
            .map(|t| t.trim().parse::<i32>().map_err(|e| format!("bad coordinate {t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        let s = GridState { coords };
        if !self.in_bounds(&s) {
            return Err(format!("state {text:?} outside the grid"));
        }
        Ok(s)
    }

    fn encode_action(&self, action: &GridMove) -> String {
        action.to_string()
    }

    fn decode_action(&self, token: &str) -> Result<GridMove, String> {
        let (sign, axis) = token.split_at(token.len().min(1));
        let up = match sign {
            "+" => true,
            "-" => false,
            _ => return Err(format!("bad move token {token:?}")),
        };
        let axis = axis
            .parse::<usize>()
            .map_err(|e| format!("bad move token {token:?}: {e}"))?;
        if axis >= self.m {
            return Err(format!("axis {axis} out of range"));
        }
        Ok(GridMove { axis, up })
    }
}

/// All integer offsets with L1 norm in `[1, k]` in `m` dimensions.
pub fn ball_offsets(m: usize, k: usize) -> Vec<Vec<i32>> {
    fn rec(dim: usize, m: usize, budget: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if dim == m {
            if cur.iter().any(|&c| c != 0) {
                out.push(cur.clone());
            }
            return;
        }
        for d in -budget..=budget {
            cur.push(d);
            rec(dim + 1, m, budget - d.abs(), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k as i32, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Members of `B_k(s)`: in-bounds states at L1 distance `1..=k` from `s`.
pub fn ball(world: &GridWorld, s: &GridState, offsets: &[Vec<i32>]) -> Vec<GridState> {
    offsets
        .iter()
        .filter_map(|off| {
            let coords: Vec<i32> = s.coords.iter().zip(off).map(|(c, d)| c + d).collect();
            coords
                .iter()
                .all(|&c| (0..=world.n).contains(&c))
                .then_some(GridState { coords })
        })
        .collect()
}

/// `C3 − 1` uniform samples from `B_k(s)` plus one uniformly chosen member of
/// minimal true distance, all with probability `1 / C3`.
pub fn synthetic_sub_generate<F: Scalar, R: Rng + ?Sized>(
    world: &GridWorld,
    s: &GridState,
    offsets: &[Vec<i32>],
    c3: usize,
    rng: &mut R,
) -> Vec<SubgoalProposal<GridState, F>> {
    let members = ball(world, s, offsets);
    if members.is_empty() || c3 == 0 {
        return Vec::new();
    }
    let prob = F::one() / F::from_count(c3);
    let mut out = Vec::with_capacity(c3);
    for _ in 0..c3 - 1 {
        let pick = members[rng.random_range(0..members.len())].clone();
        out.push(SubgoalProposal::new(pick, prob));
    }
    let best = members.iter().map(|t| world.true_dist(t)).min().expect("non-empty");
    let minimizers: Vec<&GridState> = members
        .iter()
        .filter(|t| world.true_dist(t) == best)
        .collect();
    let good = minimizers[rng.random_range(0..minimizers.len())].clone();
    out.push(SubgoalProposal::new(good, prob));
    sort_proposals(&mut out);
    out
}

/// The `c3` members of `B_k(s)` closest to the goal, with uniform probabilities.
pub fn oracle_sub_generate<F: Scalar>(
    world: &GridWorld,
    s: &GridState,
    offsets: &[Vec<i32>],
    c3: usize,
) -> Vec<SubgoalProposal<GridState, F>> {
    let mut members = ball(world, s, offsets);
    members.sort_by(|a, b| world.true_dist(a).cmp(&world.true_dist(b)).then_with(|| a.cmp(b)));
    members.truncate(c3);
    if members.is_empty() {
        return Vec::new();
    }
    let prob = F::one() / F::from_count(members.len());
    members
        .into_iter()
        .map(|t| SubgoalProposal::new(t, prob))
        .collect()
}

/// `−true_dist(s) + ε` with `ε ~ N(0, σ²)`.
pub fn noisy_value<F: Scalar, R: Rng + ?Sized>(world: &GridWorld, s: &GridState, sigma: F, rng: &mut R) -> F {
    let base = F::from_i32(-world.true_dist(s)).expect("distance fits");
    if sigma == F::zero() {
        return base;
    }
    let z: f64 = StandardNormal.sample(rng);
    base + sigma * F::lit(z)
}

/// Canonical path: fix coordinates in index order, one unit per action.
///
/// Empty when the L1 distance exceeds `step_limit`.
pub fn grid_get_path(s: &GridState, subgoal: &GridState, step_limit: usize) -> Vec<GridMove> {
    if s.l1(subgoal) as usize > step_limit {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (axis, (&a, &b)) in s.coords.iter().zip(&subgoal.coords).enumerate() {
        let up = b > a;
        for _ in 0..(a - b).abs() {
            out.push(GridMove { axis, up });
        }
    }
    out
}

/// Move along the first axis where `s` and `subgoal` differ.
pub fn oracle_move(s: &GridState, subgoal: &GridState) -> Option<GridMove> {
    s.coords
        .iter()
        .zip(&subgoal.coords)
        .position(|(a, b)| a != b)
        .map(|axis| GridMove {
            axis,
            up: subgoal.coords[axis] > s.coords[axis],
        })
}

/// Which generator the grid bundle runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridGenerator {
    /// Random members of `B_k(s)` plus one good subgoal.
    Synthetic,
    /// Only the closest members of `B_k(s)`.
    Oracle,
}

/// Provider bundle for the grid world: synthetic (or oracle) generator, noisy
/// value memoised per state, and exact coordinate moves as the policy.
#[derive(Debug, Clone)]
pub struct GridBundle<F> {
    sigma: F,
    generator: GridGenerator,
    gen_rng: ChaCha8Rng,
    value_rng: ChaCha8Rng,
    values: HashMap<GridState, F>,
    offsets: HashMap<usize, Vec<Vec<i32>>>,
}

impl<F: Scalar> GridBundle<F> {
    pub fn new(sigma: F, generator: GridGenerator, seed: u64) -> Self {
        Self {
            sigma,
            generator,
            gen_rng: ChaCha8Rng::seed_from_u64(substream(seed, 1)),
            value_rng: ChaCha8Rng::seed_from_u64(substream(seed, 2)),
            values: HashMap::new(),
            offsets: HashMap::new(),
        }
    }

    pub fn synthetic(sigma: F, seed: u64) -> Self {
        Self::new(sigma, GridGenerator::Synthetic, seed)
    }

    pub fn oracle() -> Self {
        Self::new(F::zero(), GridGenerator::Oracle, 0)
    }
}

impl<F: Scalar> ProviderBundle<GridWorld, F> for GridBundle<F> {
    fn subgoals(
        &mut self,
        env: &GridWorld,
        state: &GridState,
        k: usize,
        max_candidates: usize,
    ) -> Result<Vec<SubgoalProposal<GridState, F>>, ProviderError> {
        let offsets = self
            .offsets
            .entry(k)
            .or_insert_with(|| ball_offsets(env.m, k));
        Ok(match self.generator {
            GridGenerator::Synthetic => {
                synthetic_sub_generate(env, state, offsets, max_candidates, &mut self.gen_rng)
            }
            GridGenerator::Oracle => oracle_sub_generate(env, state, offsets, max_candidates),
        })
    }

    fn value(&mut self, env: &GridWorld, state: &GridState) -> Result<F, ProviderError> {
        if let Some(&v) = self.values.get(state) {
            return Ok(v);
        }
        let v = noisy_value(env, state, self.sigma, &mut self.value_rng);
        self.values.insert(state.clone(), v);
        Ok(v)
    }

    fn policy(
        &mut self,
        _env: &GridWorld,
        state: &GridState,
        subgoal: &GridState,
    ) -> Result<GridMove, ProviderError> {
        oracle_move(state, subgoal).ok_or_else(|| ProviderError::Unknown("state equals subgoal".into()))
    }

    fn get_path(
        &mut self,
        _env: &GridWorld,
        start: &GridState,
        subgoal: &GridState,
        step_limit: usize,
    ) -> PathOutcome<GridMove> {
        let actions = grid_get_path(start, subgoal, step_limit);
        if actions.is_empty() {
            return PathOutcome::unreachable(0, 0);
        }
        let n = actions.len();
        PathOutcome::reached(actions, n, n)
    }
}

/// Search settings for one grid-world run: seen-set budget, `C2 = k`.
pub fn grid_search_config<F: Scalar>(k: usize, c3: usize, budget: usize, seed: u64) -> SearchConfig<F> {
    SearchConfig::new(k, budget, k, c3, F::one())
        .with_counting(CountingPolicy::SubgoalsOnly)
        .with_seed(seed)
}

/// One seeded trial from the origin; returns whether it was solved.
pub fn grid_trial<F: Scalar>(cfg: &GridConfig<F>, k: usize, budget: usize, seed: u64) -> bool {
    let world = GridWorld::new(cfg.m, cfg.n);
    let mut bundle = GridBundle::synthetic(cfg.sigma, seed);
    let search = grid_search_config(k, cfg.c3, budget, seed);
    bf_ksubs_solve(&world.start(), &world, &mut bundle, &search)
        .map(|r| r.is_solved())
        .unwrap_or(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMethod {
    /// Expansion through the synthetic generator with `k = 1`.
    BestFs,
    KSubS,
}

impl GridMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BestFs => "BestFS",
            Self::KSubS => "BF-kSubS",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table4Row {
    pub sigma: f64,
    pub method: GridMethod,
    pub success_rate: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Trial seed for `(sigma index, method, trial)` under a master seed.
pub fn table4_trial_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, trial as u64)
}

/// Success rates of BestFS (`k = 1`) and BF-kSubS (`k = cfg.k`) for each noise level.
///
/// Trial `i` uses the same seed for both methods and every σ, so cells are paired.
pub fn run_table4<F: Scalar>(cfg: &GridConfig<F>, sigmas: &[F], budget: usize, trials: usize) -> Vec<Table4Row> {
    let mut rows = Vec::new();
    for &sigma in sigmas {
        let cell = GridConfig { sigma, ..cfg.clone() };
        for method in [GridMethod::BestFs, GridMethod::KSubS] {
            let k = match method {
                GridMethod::BestFs => 1,
                GridMethod::KSubS => cfg.k,
            };
            let solved = (0..trials)
                .filter(|&i| grid_trial(&cell, k, budget, table4_trial_seed(cfg.seed, i)))
                .count();
            rows.push(Table4Row {
                sigma: sigma.as_f64(),
                method,
                success_rate: solved as f64 / trials.max(1) as f64,
                trials,
                seed: cfg.seed,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashSet, VecDeque};

    fn bfs_dist(world: &GridWorld, s: &GridState) -> i32 {
        let goal = world.goal();
        let mut seen = HashSet::from([s.clone()]);
        let mut q = VecDeque::from([(s.clone(), 0)]);
        while let Some((cur, d)) = q.pop_front() {
            if cur == goal {
                return d;
            }
            for a in world.actions(&cur) {
                let nx = world.next_state(&cur, &a);
                if seen.insert(nx.clone()) {
                    q.push_back((nx, d + 1));
                }
            }
        }
        unreachable!("goal is always reachable")
    }

    #[test]
    fn true_dist_examples() {
        let w = GridWorld::new(6, 10);
        assert_eq!(w.true_dist(&w.goal()), 0);
        assert_eq!(w.true_dist(&w.start()), 60);
    }

    #[test]
    fn true_dist_matches_bfs() {
        let w = GridWorld::new(2, 4);
        for x in 0..=4 {
            for y in 0..=4 {
                let s = GridState { coords: vec![x, y] };
                assert_eq!(w.true_dist(&s), bfs_dist(&w, &s));
            }
        }
    }

    #[test]
    fn ball_sizes() {
        // |B_2| in the plane: 4 at radius 1, 8 at radius 2
        let w = GridWorld::new(2, 10);
        let s = GridState { coords: vec![5, 5] };
        assert_eq!(ball(&w, &s, &ball_offsets(2, 2)).len(), 12);
        assert_eq!(ball_offsets(6, 4).len(), 1288);
    }

    #[test]
    fn good_subgoal_one_step_for_k1() {
        let w = GridWorld::new(6, 10);
        let s = GridState { coords: vec![3; 6] };
        let offs = ball_offsets(6, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let props: Vec<SubgoalProposal<GridState, f64>> = synthetic_sub_generate(&w, &s, &offs, 4, &mut rng);
        assert_eq!(props.len(), 4);
        let best = props.iter().map(|p| w.true_dist(&p.state)).min().unwrap();
        assert_eq!(best, w.true_dist(&s) - 1);
        assert!(props.iter().all(|p| (p.prob - 0.25).abs() < 1e-15));
    }

    #[test]
    fn good_subgoal_at_goal_is_one_away() {
        let w = GridWorld::new(3, 4);
        let offs = ball_offsets(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let props: Vec<SubgoalProposal<GridState, f64>> =
            synthetic_sub_generate(&w, &w.goal(), &offs, 3, &mut rng);
        let best = props.iter().map(|p| w.true_dist(&p.state)).min().unwrap();
        assert_eq!(best, 1);
        assert!(props.iter().all(|p| p.state != w.goal()));
    }

    #[test]
    fn canonical_paths() {
        let a = GridState { coords: vec![0, 0] };
        let b = GridState { coords: vec![1, 1] };
        assert_eq!(
            grid_get_path(&a, &b, 4),
            vec![GridMove { axis: 0, up: true }, GridMove { axis: 1, up: true }]
        );
        let c = GridState { coords: vec![3] };
        let d = GridState { coords: vec![1] };
        assert_eq!(grid_get_path(&c, &d, 4), vec![GridMove { axis: 0, up: false }; 2]);
        assert!(grid_get_path(&a, &GridState { coords: vec![3, 3] }, 4).is_empty());
    }

    #[test]
    fn sigma_zero_is_exact() {
        let w = GridWorld::new(6, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = GridState { coords: vec![1, 2, 3, 4, 5, 6] };
        assert_eq!(noisy_value(&w, &s, 0.0f64, &mut rng), -(w.true_dist(&s) as f64));
    }

    #[test]
    fn noise_moments() {
        let w = GridWorld::new(6, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let s = GridState { coords: vec![2; 6] };
        let d = w.true_dist(&s) as f64;
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| noisy_value(&w, &s, 10.0, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((mean + d).abs() <= 0.15, "mean {mean}");
        assert!((var.sqrt() - 10.0).abs() <= 0.2, "std {}", var.sqrt());
    }

    #[test]
    fn codec_round_trip() {
        let w = GridWorld::new(3, 5);
        let s = GridState { coords: vec![0, 5, 2] };
        assert_eq!(w.decode_state(&w.encode_state(&s)).unwrap(), s);
        let mv = GridMove { axis: 2, up: false };
        assert_eq!(w.decode_action(&w.encode_action(&mv)).unwrap(), mv);
        assert!(w.decode_state("0,6,2").is_err());
    }

    proptest::proptest! {
        #[test]
        fn proposals_stay_in_ball(coords in proptest::collection::vec(0i32..=6, 3), k in 1usize..4, seed: u64) {
            let w = GridWorld::new(3, 6);
            let s = GridState { coords };
            let offs = ball_offsets(3, k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let props: Vec<SubgoalProposal<GridState, f64>> = synthetic_sub_generate(&w, &s, &offs, 4, &mut rng);
            let d = w.true_dist(&s);
            for p in &props {
                let r = s.l1(&p.state);
                proptest::prop_assert!(r >= 1 && r as usize <= k);
                proptest::prop_assert!(w.in_bounds(&p.state));
            }
            let best = props.iter().map(|p| w.true_dist(&p.state)).min().unwrap();
            if d > 0 {
                proptest::prop_assert_eq!(best, (d - k as i32).max(0));
            }
        }

        #[test]
        fn path_length_is_l1(a in proptest::collection::vec(0i32..=8, 4), b in proptest::collection::vec(0i32..=8, 4)) {
            let s = GridState { coords: a };
            let t = GridState { coords: b };
            let path = grid_get_path(&s, &t, 64);
            proptest::prop_assert_eq!(path.len() as i32, s.l1(&t));
            let w = GridWorld::new(4, 8);
            proptest::prop_assert_eq!(w.replay(&s, &path), t);
        }
    }
}
