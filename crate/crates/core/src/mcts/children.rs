//! Child generation: subgoal edges for MCTS-kSubS, single actions for the baseline.

use std::cmp::Ordering;

use crate::best_first::sub_generate;
use crate::config::SearchConfig;
use crate::env::Environment;
use crate::metrics::SearchMetrics;
use crate::provider::{BehaviorPolicy, ProviderBundle};
use crate::scalar::{cmp_nan_low, Scalar};

/// An edge of the search tree: the child, the reward collected on the way, and
/// the primitive actions that realise the transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEdge<S, A, F> {
    pub child: S,
    pub reward: F,
    pub actions: Vec<A>,
    /// Exploration prior taken from the generator or behavioral policy.
    pub prior: F,
}

pub trait ChildGenerator<E: Environment, F: Scalar, B: ?Sized> {
    fn gen_children(
        &mut self,
        env: &E,
        providers: &mut B,
        state: &E::State,
        metrics: &mut SearchMetrics,
    ) -> Vec<TreeEdge<E::State, E::Action, F>>;
}

/// Subgoal children: generator proposals connected by the low-level path search.
#[derive(Debug, Clone)]
pub struct SubgoalChildren<F> {
    /// Only `k`, `c2_step_limit`, `c3_num_subgoals` and `c4_target_prob` are used.
    pub search: SearchConfig<F>,
}

impl<E, F, B> ChildGenerator<E, F, B> for SubgoalChildren<F>
where
    E: Environment,
    F: Scalar,
    B: ProviderBundle<E, F> + ?Sized,
{
    fn gen_children(
        &mut self,
        env: &E,
        providers: &mut B,
        state: &E::State,
        metrics: &mut SearchMetrics,
    ) -> Vec<TreeEdge<E::State, E::Action, F>> {
        gen_children_ksubs(env, providers, state, &self.search, metrics)
    }
}

/// Runs the generator, drops proposals the low-level path cannot reach and
/// attaches reward sums and generator probabilities.
pub fn gen_children_ksubs<E, F, B>(
    env: &E,
    providers: &mut B,
    state: &E::State,
    cfg: &SearchConfig<F>,
    metrics: &mut SearchMetrics,
) -> Vec<TreeEdge<E::State, E::Action, F>>
where
    E: Environment,
    F: Scalar,
    B: ProviderBundle<E, F> + ?Sized,
{
    let proposals = sub_generate(env, providers, state, cfg, metrics);
    let mut children = Vec::with_capacity(proposals.len());
    for p in proposals {
        if &p.state == state {
            continue;
        }
        let outcome = providers.get_path(env, state, &p.state, cfg.c2_step_limit);
        metrics.policy_calls += outcome.policy_calls;
        metrics.policy_transition_nodes += outcome.visited;
        if outcome.failure.is_some() {
            metrics.provider_failures += 1;
        }
        if outcome.is_empty() {
            metrics.unreachable_proposals += 1;
            continue;
        }
        let reward = env.reward_sum(state, &outcome.actions);
        children.push(TreeEdge {
            child: p.state,
            reward,
            actions: outcome.actions,
            prior: p.prob,
        });
    }
    children
}

/// Primitive-action children drawn from a behavioral policy.
#[derive(Debug, Clone)]
pub struct BaselineChildren<P> {
    pub policy: P,
    pub c3: usize,
}

impl<E, F, B, P> ChildGenerator<E, F, B> for BaselineChildren<P>
where
    E: Environment,
    F: Scalar,
    B: ?Sized,
    P: BehaviorPolicy<E, F>,
{
    fn gen_children(
        &mut self,
        env: &E,
        _providers: &mut B,
        state: &E::State,
        metrics: &mut SearchMetrics,
    ) -> Vec<TreeEdge<E::State, E::Action, F>> {
        gen_children_baseline(env, &mut self.policy, state, self.c3, metrics)
    }
}

/// Top-`c3` actions by probability (ties by action order), one edge per action.
pub fn gen_children_baseline<E, F, P>(
    env: &E,
    policy: &mut P,
    state: &E::State,
    c3: usize,
    metrics: &mut SearchMetrics,
) -> Vec<TreeEdge<E::State, E::Action, F>>
where
    E: Environment,
    F: Scalar,
    P: BehaviorPolicy<E, F> + ?Sized,
{
    metrics.policy_calls += 1;
    let mut probs = match policy.action_probs(env, state) {
        Ok(p) => p,
        Err(_) => {
            metrics.provider_failures += 1;
            return Vec::new();
        }
    };
    probs.sort_by(|a, b| match cmp_nan_low(b.1, a.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        other => other,
    });
    probs.truncate(c3);
    probs
        .into_iter()
        .map(|(action, prior)| {
            let child = env.next_state(state, &action);
            metrics.policy_transition_nodes += 1;
            let reward = env.step_reward(state, &action, &child);
            TreeEdge {
                child,
                reward,
                actions: vec![action],
                prior,
            }
        })
        .collect()
}
