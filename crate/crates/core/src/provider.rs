//! The (generator, value, policy) provider interface consumed by every planner.

use std::cmp::Ordering;

use thiserror::Error;

use crate::env::Environment;
use crate::path::{get_path_learned, PathOutcome};
use crate::scalar::{cmp_nan_low, Scalar};

/// A candidate next state together with its generator probability.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgoalProposal<S, F> {
    pub state: S,
    pub prob: F,
}

impl<S, F> SubgoalProposal<S, F> {
    pub fn new(state: S, prob: F) -> Self {
        Self { state, prob }
    }
}

/// Sorts proposals by probability, descending; ties go to the smaller state.
pub fn sort_proposals<S: Ord, F: Scalar>(proposals: &mut [SubgoalProposal<S, F>]) {
    proposals.sort_by(|a, b| match cmp_nan_low(b.prob, a.prob) {
        Ordering::Equal => a.state.cmp(&b.state),
        other => other,
    });
}

/// Checks the sortedness and probability-range contract of a generator output.
pub fn check_proposals<S: Ord, F: Scalar>(
    proposals: &[SubgoalProposal<S, F>],
    max_candidates: usize,
) -> Result<(), ProviderError> {
    if proposals.len() > max_candidates {
        return Err(ProviderError::Validation(format!(
            "{} candidates exceed the limit of {max_candidates}",
            proposals.len()
        )));
    }
    for p in proposals {
        if !(p.prob >= F::zero() && p.prob <= F::one()) {
            return Err(ProviderError::Validation(format!(
                "probability {} outside [0, 1]",
                p.prob
            )));
        }
    }
    for w in proposals.windows(2) {
        if w[0].prob < w[1].prob {
            return Err(ProviderError::Validation(format!(
                "candidates not sorted: {} before {}",
                w[0].prob, w[1].prob
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("request timed out")]
    Timeout,
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("protocol version mismatch: expected {expected}, got {got}")]
    VersionMismatch { expected: u32, got: u32 },
    #[error("server error: {0}")]
    Server(String),
    #[error("response failed validation: {0}")]
    Validation(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("no answer for this query: {0}")]
    Unknown(String),
}

/// Subgoal generator ρ, value function V and low-level policy π behind one interface.
///
/// Implementations may keep per-solve state (caches, RNG, a connection), hence `&mut self`.
pub trait ProviderBundle<E: Environment, F: Scalar> {
    /// Up to `max_candidates` proposals sorted by descending probability.
    fn subgoals(
        &mut self,
        env: &E,
        state: &E::State,
        k: usize,
        max_candidates: usize,
    ) -> Result<Vec<SubgoalProposal<E::State, F>>, ProviderError>;

    fn value(&mut self, env: &E, state: &E::State) -> Result<F, ProviderError>;

    fn policy(
        &mut self,
        env: &E,
        state: &E::State,
        subgoal: &E::State,
    ) -> Result<E::Action, ProviderError>;

    /// Connects `start` to `subgoal` within `step_limit` primitive steps.
    ///
    /// Defaults to rolling out [`ProviderBundle::policy`]; environments with a cheap exact
    /// search (Sokoban BFS, grid moves) override it.
    fn get_path(
        &mut self,
        env: &E,
        start: &E::State,
        subgoal: &E::State,
        step_limit: usize,
    ) -> PathOutcome<E::Action> {
        get_path_learned(
            start,
            subgoal,
            &mut |s: &E::State, g: &E::State| self.policy(env, s, g),
            env,
            step_limit,
        )
    }
}

impl<E: Environment, F: Scalar, B: ProviderBundle<E, F> + ?Sized> ProviderBundle<E, F> for &mut B {
    fn subgoals(
        &mut self,
        env: &E,
        state: &E::State,
        k: usize,
        max_candidates: usize,
    ) -> Result<Vec<SubgoalProposal<E::State, F>>, ProviderError> {
        (**self).subgoals(env, state, k, max_candidates)
    }

    fn value(&mut self, env: &E, state: &E::State) -> Result<F, ProviderError> {
        (**self).value(env, state)
    }

    fn policy(
        &mut self,
        env: &E,
        state: &E::State,
        subgoal: &E::State,
    ) -> Result<E::Action, ProviderError> {
        (**self).policy(env, state, subgoal)
    }

    fn get_path(
        &mut self,
        env: &E,
        start: &E::State,
        subgoal: &E::State,
        step_limit: usize,
    ) -> PathOutcome<E::Action> {
        (**self).get_path(env, start, subgoal, step_limit)
    }
}

impl<E: Environment, F: Scalar, B: ProviderBundle<E, F> + ?Sized> ProviderBundle<E, F> for Box<B> {
    fn subgoals(
        &mut self,
        env: &E,
        state: &E::State,
        k: usize,
        max_candidates: usize,
    ) -> Result<Vec<SubgoalProposal<E::State, F>>, ProviderError> {
        (**self).subgoals(env, state, k, max_candidates)
    }

    fn value(&mut self, env: &E, state: &E::State) -> Result<F, ProviderError> {
        (**self).value(env, state)
    }

    fn policy(
        &mut self,
        env: &E,
        state: &E::State,
        subgoal: &E::State,
    ) -> Result<E::Action, ProviderError> {
        (**self).policy(env, state, subgoal)
    }

    fn get_path(
        &mut self,
        env: &E,
        start: &E::State,
        subgoal: &E::State,
        step_limit: usize,
    ) -> PathOutcome<E::Action> {
        (**self).get_path(env, start, subgoal, step_limit)
    }
}

/// Behavioral-cloning policy used by the primitive-action MCTS baseline.
pub trait BehaviorPolicy<E: Environment, F: Scalar> {
    /// Action probabilities for `state`; order is irrelevant, callers sort.
    fn action_probs(&mut self, env: &E, state: &E::State) -> Result<Vec<(E::Action, F)>, ProviderError>;
}

/// Uniform distribution over `env.actions(state)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformBehavior;

impl<E: Environment, F: Scalar> BehaviorPolicy<E, F> for UniformBehavior {
    fn action_probs(&mut self, env: &E, state: &E::State) -> Result<Vec<(E::Action, F)>, ProviderError> {
        let actions = env.actions(state);
        if actions.is_empty() {
            return Ok(Vec::new());
        }
        let p = F::one() / F::from_count(actions.len());
        Ok(actions.into_iter().map(|a| (a, p)).collect())
    }
}
