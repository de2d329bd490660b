//! Low-level path execution between consecutive subgoals.

use crate::env::Environment;
use crate::provider::ProviderError;

/// Result of connecting two states with primitive actions.
///
/// An empty `actions` list means the subgoal was not reached and must be discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome<A> {
    pub actions: Vec<A>,
    /// States stepped through or expanded while searching for the path.
    pub visited: usize,
    pub policy_calls: usize,
    /// Set when a provider failure cut the rollout short.
    pub failure: Option<ProviderError>,
}

impl<A> PathOutcome<A> {
    pub fn unreachable(visited: usize, policy_calls: usize) -> Self {
        Self {
            actions: Vec::new(),
            visited,
            policy_calls,
            failure: None,
        }
    }

    pub fn reached(actions: Vec<A>, visited: usize, policy_calls: usize) -> Self {
        Self {
            actions,
            visited,
            policy_calls,
            failure: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Rolls out a conditional policy for at most `step_limit` steps.
///
/// Returns the action prefix that first lands exactly on `subgoal`, or an empty
/// path if the limit is hit first. A policy failure counts as unreachable.
pub fn get_path_learned<E, P>(
    start: &E::State,
    subgoal: &E::State,
    policy: &mut P,
    env: &E,
    step_limit: usize,
) -> PathOutcome<E::Action>
where
    E: Environment,
    P: FnMut(&E::State, &E::State) -> Result<E::Action, ProviderError> + ?Sized,
{
    let mut state = start.clone();
    let mut actions = Vec::new();
    let mut calls = 0;
    for _ in 0..step_limit {
        calls += 1;
        let action = match policy(&state, subgoal) {
            Ok(a) => a,
            Err(e) => {
                let mut out = PathOutcome::unreachable(actions.len(), calls);
                out.failure = Some(e);
                return out;
            }
        };
        state = env.next_state(&state, &action);
        actions.push(action);
        if &state == subgoal {
            let visited = actions.len();
            return PathOutcome::reached(actions, visited, calls);
        }
    }
    PathOutcome::unreachable(actions.len(), calls)
}
