//! Naive planner that samples independent subgoal chains instead of searching.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::best_first::sub_generate;
use crate::config::SearchConfig;
use crate::env::Environment;
use crate::error::{ConfigError, SearchError};
use crate::metrics::{graph_size, SearchMetrics};
use crate::provider::{ProviderBundle, SubgoalProposal};
use crate::result::{SearchResult, SearchStatus};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig<F> {
    /// Generator settings; `c1_max_nodes` is the total node budget over all chains.
    pub search: SearchConfig<F>,
    pub num_chains: usize,
    pub chain_length: usize,
}

impl<F: Scalar> ChainConfig<F> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.search.validate()?;
        if self.num_chains < 1 || self.chain_length < 1 {
            return Err(ConfigError::new("num_chains and chain_length must be at least 1"));
        }
        Ok(())
    }
}

fn sample_index<F: Scalar, S>(proposals: &[SubgoalProposal<S, F>], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = proposals.iter().map(|p| p.prob.as_f64().max(0.0)).sum();
    if !(total > 0.0) {
        return rng.random_range(0..proposals.len());
    }
    let mut r = rng.random::<f64>() * total;
    for (i, p) in proposals.iter().enumerate() {
        r -= p.prob.as_f64().max(0.0);
        if r < 0.0 {
            return i;
        }
    }
    proposals.len() - 1
}

/// Samples `num_chains` subgoal sequences of up to `chain_length` steps each.
///
/// Every sampled subgoal costs one node (plus its low-level nodes under the
/// inclusive counting policy). A chain is abandoned when the generator returns
/// nothing usable or the sampled subgoal cannot be connected. On failure the
/// chain whose final state has the highest value is kept in `partial_actions`.
pub fn chain_sampler_solve<E, F, B>(
    start: &E::State,
    env: &E,
    providers: &mut B,
    cfg: &ChainConfig<F>,
) -> Result<SearchResult<E::Action>, SearchError>
where
    E: Environment,
    F: Scalar,
    B: ProviderBundle<E, F> + ?Sized,
{
    cfg.validate()?;
    let search = &cfg.search;
    let mut metrics = SearchMetrics {
        seen_count: 1,
        ..Default::default()
    };
    if env.is_solved(start) {
        return Ok(SearchResult::solved(Vec::new(), metrics));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(search.rng_seed);
    let budget_left =
        |m: &SearchMetrics| graph_size(m, search.counting_policy) < search.c1_max_nodes;
    let mut best: Option<(F, Vec<E::Action>)> = None;

    'chains: for _ in 0..cfg.num_chains {
        if !budget_left(&metrics) {
            break;
        }
        let mut state = start.clone();
        let mut actions = Vec::new();
        for _ in 0..cfg.chain_length {
            if !budget_left(&metrics) {
                break;
            }
            metrics.expansions += 1;
            let mut proposals = sub_generate(env, providers, &state, search, &mut metrics);
            proposals.retain(|p| p.state != state);
            if proposals.is_empty() {
                break;
            }
            let pick = proposals.swap_remove(sample_index(&proposals, &mut rng)).state;
            metrics.seen_count += 1;
            let outcome = providers.get_path(env, &state, &pick, search.c2_step_limit);
            metrics.policy_calls += outcome.policy_calls;
            metrics.policy_transition_nodes += outcome.visited;
            if outcome.failure.is_some() {
                metrics.provider_failures += 1;
            }
            if outcome.is_empty() {
                metrics.unreachable_proposals += 1;
                break;
            }
            actions.extend(outcome.actions);
            state = pick;
            if env.is_solved(&state) {
                return Ok(SearchResult::solved(actions, metrics));
            }
        }
        if actions.is_empty() {
            continue 'chains;
        }
        metrics.value_calls += 1;
        let v = providers.value(env, &state).map_err(SearchError::Value)?;
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, actions));
        }
    }

    let mut result = SearchResult::unsolved(SearchStatus::BudgetExhausted, metrics);
    if let Some((_, actions)) = best {
        result.partial_actions = actions;
    }
    Ok(result)
}
