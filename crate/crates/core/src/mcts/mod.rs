//! Single-player AlphaZero-style MCTS over subgoal edges or primitive actions.
//!
//! The tree maps states to expanded nodes; its statistics persist across the
//! planner calls of one solve. Leaves whose expansion yields no children are
//! marked dead and never selected again. Selection also stops when it would
//! revisit a state already on the current path, so cycles in the subgoal graph
//! cannot trap a pass.

mod children;
mod stats;

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use children::{
    gen_children_baseline, gen_children_ksubs, BaselineChildren, ChildGenerator, SubgoalChildren,
    TreeEdge,
};
pub use stats::{
    backup, choose_child, puct_scores, select_child, select_child_among, visit_distribution,
    NodeStats, PathStep,
};

use crate::env::Environment;
use crate::error::{ConfigError, SearchError};
use crate::metrics::SearchMetrics;
use crate::provider::ProviderBundle;
use crate::result::{SearchResult, SearchStatus};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct MctsConfig<F> {
    /// Passes per planner call (P).
    pub passes_per_call: usize,
    pub gamma: F,
    pub c_puct: F,
    /// Action sampling temperature (τ).
    pub tau: F,
    /// Replace sampling by argmax over visit counts.
    pub argmax_actions: bool,
    /// Maximum executed actions per solve (L_a).
    pub action_limit: usize,
    /// Maximum planner calls per solve (L_p).
    pub planner_call_limit: usize,
    pub rng_seed: u64,
}

impl<F: Scalar> Default for MctsConfig<F> {
    fn default() -> Self {
        Self {
            passes_per_call: 5,
            gamma: F::lit(0.99),
            c_puct: F::one(),
            tau: F::one(),
            argmax_actions: false,
            action_limit: 24,
            planner_call_limit: 8,
            rng_seed: 0,
        }
    }
}

impl<F: Scalar> MctsConfig<F> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.passes_per_call < 1 {
            return Err(ConfigError::new("P must be at least 1"));
        }
        if !(self.gamma > F::zero() && self.gamma <= F::one()) {
            return Err(ConfigError::new("gamma must lie in (0, 1]"));
        }
        if !(self.c_puct >= F::zero()) {
            return Err(ConfigError::new("c_puct must be non-negative"));
        }
        if !(self.tau > F::zero()) {
            return Err(ConfigError::new("tau must be positive"));
        }
        if self.action_limit < 1 || self.planner_call_limit < 1 {
            return Err(ConfigError::new("L_a and L_p must be at least 1"));
        }
        Ok(())
    }
}

/// Bookkeeping events, recorded when tracing is enabled.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent<F> {
    Expand {
        node: usize,
        rewards: Vec<F>,
        child_values: Vec<F>,
    },
    Backup {
        path: Vec<PathStep<F>>,
        leaf_value: F,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leaf {
    New,
    Terminal,
}

/// Search tree plus statistics, reusable across planner calls.
#[derive(Debug, Clone)]
pub struct MctsTree<S, A, F> {
    index: HashMap<S, usize>,
    states: Vec<S>,
    edges: Vec<Vec<TreeEdge<S, A, F>>>,
    stats: Vec<NodeStats<F>>,
    dead: Vec<bool>,
    trace: Option<Vec<TraceEvent<F>>>,
}

impl<S, A, F> Default for MctsTree<S, A, F> {
    fn default() -> Self {
        Self {
            index: HashMap::new(),
            states: Vec::new(),
            edges: Vec::new(),
            stats: Vec::new(),
            dead: Vec::new(),
            trace: None,
        }
    }
}

impl<S, A, F> MctsTree<S, A, F>
where
    S: Clone + Eq + std::hash::Hash,
    A: Clone,
    F: Scalar,
{
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_trace() -> Self {
        Self {
            trace: Some(Vec::new()),
            ..Self::default()
        }
    }

    pub fn trace(&self) -> Option<&[TraceEvent<F>]> {
        self.trace.as_deref()
    }

    pub fn node_count(&self) -> usize {
        self.states.len()
    }

    pub fn node_id(&self, state: &S) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn state(&self, node: usize) -> &S {
        &self.states[node]
    }

    pub fn stats(&self, node: usize) -> &NodeStats<F> {
        &self.stats[node]
    }

    pub fn edges(&self, node: usize) -> &[TreeEdge<S, A, F>] {
        &self.edges[node]
    }

    pub fn is_dead(&self, node: usize) -> bool {
        self.dead[node]
    }

    fn edge_alive(&self, node: usize, edge: usize) -> bool {
        match self.index.get(&self.edges[node][edge].child) {
            Some(&c) => !self.dead[c],
            None => true,
        }
    }

    fn priors(&self, node: usize) -> Vec<F> {
        self.edges[node].iter().map(|e| e.prior).collect()
    }

    /// Descends from `root` while the current state is expanded.
    fn select(&mut self, root: &S, c_puct: F) -> (Vec<PathStep<F>>, S, Leaf) {
        let mut path = Vec::new();
        let mut state = root.clone();
        let mut on_path: HashSet<usize> = HashSet::new();
        loop {
            let Some(&id) = self.index.get(&state) else {
                return (path, state, Leaf::New);
            };
            if self.dead[id] || !on_path.insert(id) {
                return (path, state, Leaf::Terminal);
            }
            let priors = self.priors(id);
            let choice = select_child_among(&self.stats[id], &priors, c_puct, |i| {
                self.edge_alive(id, i)
            });
            let Some(i) = choice else {
                self.dead[id] = true;
                return (path, state, Leaf::Terminal);
            };
            let edge = &self.edges[id][i];
            path.push((id, i, edge.reward));
            state = edge.child.clone();
        }
    }

    fn insert(&mut self, state: S, children: Vec<TreeEdge<S, A, F>>, child_values: Vec<F>, gamma: F) {
        let rewards: Vec<F> = children.iter().map(|e| e.reward).collect();
        let id = self.states.len();
        let stats = NodeStats::from_expansion(&rewards, &child_values, gamma);
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent::Expand {
                node: id,
                rewards,
                child_values,
            });
        }
        self.dead.push(children.is_empty());
        self.index.insert(state.clone(), id);
        self.states.push(state);
        self.edges.push(children);
        self.stats.push(stats);
    }

    fn backup(&mut self, path: Vec<PathStep<F>>, leaf_value: F, gamma: F) {
        backup(&path, leaf_value, gamma, &mut self.stats);
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent::Backup { path, leaf_value });
        }
    }

    /// One select / expand / update pass rooted at `root`.
    pub fn pass<E, B, G>(
        &mut self,
        root: &S,
        env: &E,
        providers: &mut B,
        children: &mut G,
        cfg: &MctsConfig<F>,
        metrics: &mut SearchMetrics,
    ) -> Result<(), SearchError>
    where
        E: Environment<State = S, Action = A>,
        B: ProviderBundle<E, F> + ?Sized,
        G: ChildGenerator<E, F, B> + ?Sized,
    {
        let (path, leaf, kind) = self.select(root, cfg.c_puct);
        if kind == Leaf::New && !env.is_solved(&leaf) {
            metrics.expansions += 1;
            let kids = children.gen_children(env, providers, &leaf, metrics);
            let mut values = Vec::with_capacity(kids.len());
            for e in &kids {
                metrics.value_calls += 1;
                values.push(providers.value(env, &e.child).map_err(SearchError::Value)?);
            }
            metrics.seen_count += kids.len();
            self.insert(leaf.clone(), kids, values, cfg.gamma);
        }
        metrics.value_calls += 1;
        let leaf_value = providers.value(env, &leaf).map_err(SearchError::Value)?;
        self.backup(path, leaf_value, cfg.gamma);
        metrics.mcts_passes += 1;
        Ok(())
    }

    /// Picks the action list of a root edge by visit-count sampling.
    pub fn choose_actions(
        &self,
        root: &S,
        cfg: &MctsConfig<F>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<A>, SearchError> {
        let id = self.node_id(root).ok_or(SearchError::NoChildren)?;
        let i = choose_child(&self.stats[id], cfg.tau, cfg.argmax_actions, rng, |i| {
            self.edge_alive(id, i)
        })?;
        Ok(self.edges[id][i].actions.clone())
    }
}

/// Runs `P` passes from `root` and returns the chosen edge's actions.
pub fn plan<E, F, B, G>(
    tree: &mut MctsTree<E::State, E::Action, F>,
    root: &E::State,
    env: &E,
    providers: &mut B,
    children: &mut G,
    cfg: &MctsConfig<F>,
    rng: &mut ChaCha8Rng,
    metrics: &mut SearchMetrics,
) -> Result<Vec<E::Action>, SearchError>
where
    E: Environment,
    F: Scalar,
    B: ProviderBundle<E, F> + ?Sized,
    G: ChildGenerator<E, F, B> + ?Sized,
{
    metrics.planner_calls += 1;
    for _ in 0..cfg.passes_per_call {
        tree.pass(root, env, providers, children, cfg, metrics)?;
    }
    tree.choose_actions(root, cfg, rng)
}

/// Repeatedly queries the planner and executes the returned actions.
///
/// Stops with `ActionLimit` before the executed solution would exceed `L_a`,
/// with `FrontierEmpty` when the root becomes a dead end, and with
/// `BudgetExhausted` after `L_p` planner calls.
pub fn mcts_solve<E, F, B, G>(
    start: &E::State,
    env: &E,
    providers: &mut B,
    children: &mut G,
    cfg: &MctsConfig<F>,
) -> Result<SearchResult<E::Action>, SearchError>
where
    E: Environment,
    F: Scalar,
    B: ProviderBundle<E, F> + ?Sized,
    G: ChildGenerator<E, F, B> + ?Sized,
{
    let mut tree = MctsTree::new();
    mcts_solve_with_tree(&mut tree, start, env, providers, children, cfg)
}

/// [`mcts_solve`] with a caller-owned tree, so statistics can be inspected afterwards.
pub fn mcts_solve_with_tree<E, F, B, G>(
    tree: &mut MctsTree<E::State, E::Action, F>,
    start: &E::State,
    env: &E,
    providers: &mut B,
    children: &mut G,
    cfg: &MctsConfig<F>,
) -> Result<SearchResult<E::Action>, SearchError>
where
    E: Environment,
    F: Scalar,
    B: ProviderBundle<E, F> + ?Sized,
    G: ChildGenerator<E, F, B> + ?Sized,
{
    cfg.validate()?;
    let mut metrics = SearchMetrics {
        seen_count: 1,
        ..Default::default()
    };
    let mut state = start.clone();
    let mut solution = Vec::new();
    if env.is_solved(&state) {
        return Ok(SearchResult::solved(solution, metrics));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    for _ in 0..cfg.planner_call_limit {
        let actions = match plan(tree, &state, env, providers, children, cfg, &mut rng, &mut metrics) {
            Ok(a) => a,
            Err(SearchError::NoChildren) => {
                let mut r = SearchResult::unsolved(SearchStatus::FrontierEmpty, metrics);
                r.partial_actions = solution;
                return Ok(r);
            }
            Err(e) => return Err(e),
        };
        for a in actions {
            if solution.len() == cfg.action_limit {
                let mut r = SearchResult::unsolved(SearchStatus::ActionLimit, metrics);
                r.partial_actions = solution;
                return Ok(r);
            }
            state = env.next_state(&state, &a);
            solution.push(a);
        }
        if env.is_solved(&state) {
            return Ok(SearchResult::solved(solution, metrics));
        }
    }
    let mut r = SearchResult::unsolved(SearchStatus::BudgetExhausted, metrics);
    r.partial_actions = solution;
    Ok(r)
}

/// Recomputes every node's statistics from a recorded trace, without the
/// incremental updates: each edge's backed-up qualities are listed, then
/// `N` is their count, `W` their sum in order, `Q = W / N`.
pub fn replay_trace<F: Scalar>(trace: &[TraceEvent<F>], gamma: F) -> Vec<NodeStats<F>> {
    let mut qualities: Vec<Vec<Vec<F>>> = Vec::new();
    for event in trace {
        match event {
            TraceEvent::Expand {
                node,
                rewards,
                child_values,
            } => {
                assert_eq!(*node, qualities.len(), "expansions are recorded in id order");
                qualities.push(
                    rewards
                        .iter()
                        .zip(child_values)
                        .map(|(&r, &v)| vec![r + gamma * v])
                        .collect(),
                );
            }
            TraceEvent::Backup { path, leaf_value } => {
                let mut returns = vec![*leaf_value; path.len() + 1];
                for j in (0..path.len()).rev() {
                    returns[j] = path[j].2 + gamma * returns[j + 1];
                }
                for (j, &(node, edge, _)) in path.iter().enumerate() {
                    qualities[node][edge].push(returns[j]);
                }
            }
        }
    }
    qualities
        .into_iter()
        .map(|edges| {
            let n: Vec<u64> = edges.iter().map(|q| q.len() as u64).collect();
            let w: Vec<F> = edges
                .iter()
                .map(|q| q.iter().skip(1).fold(q[0], |acc, &x| acc + x))
                .collect();
            let q = w
                .iter()
                .zip(&n)
                .map(|(&w, &n)| w / F::from_u64(n).expect("visit count fits"))
                .collect();
            NodeStats { n, w, q }
        })
        .collect()
}
