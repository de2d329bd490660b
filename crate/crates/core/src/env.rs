//! Deterministic environment model.

use std::fmt::Debug;
use std::hash::Hash;

use crate::scalar::Scalar;

/// A deterministic, fully observable transition model with a success predicate.
///
/// `State`'s `Ord` is the canonical serialization order used to break ties
/// between candidates; `Action`'s `Ord` orders primitive actions likewise.
pub trait Environment {
    type State: Clone + Eq + Hash + Ord + Debug;
    type Action: Clone + Eq + Ord + Debug;

    /// Total and deterministic: invalid actions leave the state unchanged.
    fn next_state(&self, state: &Self::State, action: &Self::Action) -> Self::State;

    fn is_solved(&self, state: &Self::State) -> bool;

    /// Primitive actions available in `state`, in canonical order.
    fn actions(&self, state: &Self::State) -> Vec<Self::Action>;

    /// Sparse success reward: 1 when a transition enters a solved state, 0 otherwise.
    fn step_reward<F: Scalar>(
        &self,
        state: &Self::State,
        _action: &Self::Action,
        next: &Self::State,
    ) -> F {
        if self.is_solved(next) && !self.is_solved(state) {
            F::one()
        } else {
            F::zero()
        }
    }

    /// Folds `actions` through the model.
    fn replay<'a, I>(&self, start: &Self::State, actions: I) -> Self::State
    where
        I: IntoIterator<Item = &'a Self::Action>,
        Self::Action: 'a,
    {
        actions
            .into_iter()
            .fold(start.clone(), |s, a| self.next_state(&s, a))
    }

    /// Sum of step rewards collected while replaying `actions` from `start`.
    fn reward_sum<F: Scalar>(&self, start: &Self::State, actions: &[Self::Action]) -> F {
        let mut s = start.clone();
        let mut total = F::zero();
        for a in actions {
            let next = self.next_state(&s, a);
            total = total + self.step_reward(&s, a, &next);
            s = next;
        }
        total
    }
}

/// Text encoding of states and actions, used by dataset files and the model bridge.
pub trait StateCodec: Environment {
    fn encode_state(&self, state: &Self::State) -> String;
    fn decode_state(&self, text: &str) -> Result<Self::State, String>;
    fn encode_action(&self, action: &Self::Action) -> String;
    fn decode_action(&self, token: &str) -> Result<Self::Action, String>;
}
