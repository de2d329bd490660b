//! Best-first search over the subgoal graph.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::config::SearchConfig;
use crate::env::Environment;
use crate::error::SearchError;
use crate::metrics::{graph_size, SearchMetrics};
use crate::provider::{ProviderBundle, SubgoalProposal};
use crate::prune::prune_by_total_probability;
use crate::result::{SearchResult, SearchStatus};
use crate::scalar::{cmp_nan_low, Scalar};

struct Entry<F> {
    value: F,
    seq: u64,
    node: usize,
}

impl<F: Scalar> PartialEq for Entry<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<F: Scalar> Eq for Entry<F> {}

impl<F: Scalar> PartialOrd for Entry<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: Scalar> Ord for Entry<F> {
    // max-heap: larger value first, then earlier insertion
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_nan_low(self.value, other.value).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Node<S, A> {
    state: S,
    parent: Option<usize>,
    actions: Vec<A>,
}

fn path_to<S, A: Clone>(nodes: &[Node<S, A>], mut id: usize) -> Vec<A> {
    let mut segments = Vec::new();
    loop {
        let node = &nodes[id];
        segments.push(&node.actions);
        match node.parent {
            Some(p) => id = p,
            None => break,
        }
    }
    segments.into_iter().rev().flatten().cloned().collect()
}

/// Requests proposals for `state` and applies the C3 limit and the C4 cutoff.
pub(crate) fn sub_generate<E, F, B>(
    env: &E,
    providers: &mut B,
    state: &E::State,
    cfg: &SearchConfig<F>,
    metrics: &mut SearchMetrics,
) -> Vec<SubgoalProposal<E::State, F>>
where
    E: Environment,
    F: Scalar,
    B: ProviderBundle<E, F> + ?Sized,
{
    metrics.generator_calls += 1;
    match providers.subgoals(env, state, cfg.k, cfg.c3_num_subgoals) {
        Ok(mut proposals) => {
            proposals.truncate(cfg.c3_num_subgoals);
            metrics.subgoals_generated += proposals.len();
            prune_by_total_probability(proposals, cfg.c4_target_prob)
        }
        Err(_) => {
            metrics.provider_failures += 1;
            Vec::new()
        }
    }
}

/// Best-First Subgoal Search.
///
/// The frontier is a max-priority queue keyed by the value function, with FIFO
/// order among equal values. Every proposal not yet seen enters the seen set
/// before its low-level path is computed, so unreachable proposals still count
/// toward the budget. The budget test runs at the top of the loop, therefore
/// the seen set can overshoot `C1` by at most one expansion batch.
pub fn bf_ksubs_solve<E, F, B>(
    start: &E::State,
    env: &E,
    providers: &mut B,
    cfg: &SearchConfig<F>,
) -> Result<SearchResult<E::Action>, SearchError>
where
    E: Environment,
    F: Scalar,
    B: ProviderBundle<E, F> + ?Sized,
{
    cfg.validate()?;
    let mut metrics = SearchMetrics {
        seen_count: 1,
        ..Default::default()
    };
    if env.is_solved(start) {
        return Ok(SearchResult::solved(Vec::new(), metrics));
    }

    let mut seen: HashSet<E::State> = HashSet::new();
    let mut nodes: Vec<Node<E::State, E::Action>> = Vec::new();
    let mut queue = BinaryHeap::new();
    let mut seq = 0u64;

    metrics.value_calls += 1;
    let v0 = providers.value(env, start).map_err(SearchError::Value)?;
    nodes.push(Node {
        state: start.clone(),
        parent: None,
        actions: Vec::new(),
    });
    queue.push(Entry {
        value: v0,
        seq,
        node: 0,
    });
    seq += 1;
    seen.insert(start.clone());

    while !queue.is_empty() && graph_size(&metrics, cfg.counting_policy) < cfg.c1_max_nodes {
        let Entry { node: parent, .. } = queue.pop().expect("queue is non-empty");
        let state = nodes[parent].state.clone();
        metrics.expansions += 1;
        let proposals = sub_generate(env, providers, &state, cfg, &mut metrics);

        for SubgoalProposal { state: sub, .. } in proposals {
            if sub == state || seen.contains(&sub) {
                continue;
            }
            seen.insert(sub.clone());
            metrics.seen_count = seen.len();

            let outcome = providers.get_path(env, &state, &sub, cfg.c2_step_limit);
            metrics.policy_calls += outcome.policy_calls;
            metrics.policy_transition_nodes += outcome.visited;
            if outcome.failure.is_some() {
                metrics.provider_failures += 1;
            }
            if outcome.is_empty() {
                metrics.unreachable_proposals += 1;
                continue;
            }

            if cfg.detect_intermediate_solved {
                let mut s = state.clone();
                for (i, a) in outcome.actions.iter().enumerate() {
                    s = env.next_state(&s, a);
                    if i + 1 < outcome.actions.len() && env.is_solved(&s) {
                        let mut actions = path_to(&nodes, parent);
                        actions.extend_from_slice(&outcome.actions[..=i]);
                        return Ok(SearchResult::solved(actions, metrics));
                    }
                }
            }

            metrics.value_calls += 1;
            let v = providers.value(env, &sub).map_err(SearchError::Value)?;
            let id = nodes.len();
            let solved = env.is_solved(&sub);
            nodes.push(Node {
                state: sub,
                parent: Some(parent),
                actions: outcome.actions,
            });
            queue.push(Entry { value: v, seq, node: id });
            seq += 1;
            if solved {
                return Ok(SearchResult::solved(path_to(&nodes, id), metrics));
            }
        }
    }

    let status = if graph_size(&metrics, cfg.counting_policy) >= cfg.c1_max_nodes {
        SearchStatus::BudgetExhausted
    } else {
        SearchStatus::FrontierEmpty
    };
    Ok(SearchResult::unsolved(status, metrics))
}
