//! Wrappers that degrade an exact bundle: Gaussian value noise and corrupted proposals.

use std::collections::HashMap;
use std::hash::Hash;

use ksubs_core::{Environment, PathOutcome, ProviderBundle, ProviderError, Scalar, SubgoalProposal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Adds `N(0, σ²)` to the inner value, drawn once per state.
#[derive(Debug, Clone)]
pub struct NoisyValue<B, S, F> {
    pub inner: B,
    sigma: F,
    rng: ChaCha8Rng,
    noise: HashMap<S, F>,
}

impl<B, S: Eq + Hash, F: Scalar> NoisyValue<B, S, F> {
    pub fn new(inner: B, sigma: F, seed: u64) -> Self {
        Self {
            inner,
            sigma,
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise: HashMap::new(),
        }
    }

    /// Forgets the drawn noise, keeping the RNG stream.
    pub fn reset(&mut self) {
        self.noise.clear();
    }

    pub fn noise_for(&mut self, state: &S) -> F
    where
        S: Clone,
    {
        if let Some(&e) = self.noise.get(state) {
            return e;
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let e = self.sigma * F::lit(z);
        self.noise.insert(state.clone(), e);
        e
    }
}

impl<E, F, B> ProviderBundle<E, F> for NoisyValue<B, E::State, F>
where
    E: Environment,
    F: Scalar,
    B: ProviderBundle<E, F>,
{
    fn subgoals(
        &mut self,
        env: &E,
        state: &E::State,
        k: usize,
        max_candidates: usize,
    ) -> Result<Vec<SubgoalProposal<E::State, F>>, ProviderError> {
        self.inner.subgoals(env, state, k, max_candidates)
    }

    fn value(&mut self, env: &E, state: &E::State) -> Result<F, ProviderError> {
        let v = self.inner.value(env, state)?;
        Ok(v + self.noise_for(state))
    }

    fn policy(&mut self, env: &E, state: &E::State, subgoal: &E::State) -> Result<E::Action, ProviderError> {
        self.inner.policy(env, state, subgoal)
    }

    fn get_path(&mut self, env: &E, start: &E::State, subgoal: &E::State, step_limit: usize) -> PathOutcome<E::Action> {
        self.inner.get_path(env, start, subgoal, step_limit)
    }
}

/// Replaces each proposal, with probability `rate`, by the end of a uniform
/// random `k`-step walk from the expanded state. Probabilities are kept.
#[derive(Debug, Clone)]
pub struct CorruptedGenerator<B> {
    pub inner: B,
    pub rate: f64,
    rng: ChaCha8Rng,
}

impl<B> CorruptedGenerator<B> {
    pub fn new(inner: B, rate: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&rate), "rate must lie in [0, 1]");
        Self {
            inner,
            rate,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl<E, F, B> ProviderBundle<E, F> for CorruptedGenerator<B>
where
    E: Environment,
    F: Scalar,
    B: ProviderBundle<E, F>,
{
    fn subgoals(
        &mut self,
        env: &E,
        state: &E::State,
        k: usize,
        max_candidates: usize,
    ) -> Result<Vec<SubgoalProposal<E::State, F>>, ProviderError> {
        let mut out = self.inner.subgoals(env, state, k, max_candidates)?;
        for p in out.iter_mut() {
            if self.rng.random::<f64>() < self.rate {
                let mut s = state.clone();
                for _ in 0..k {
                    let actions = env.actions(&s);
                    if actions.is_empty() {
                        break;
                    }
                    s = env.next_state(&s, &actions[self.rng.random_range(0..actions.len())]);
                }
                p.state = s;
            }
        }
        ksubs_core::sort_proposals(&mut out);
        Ok(out)
    }

    fn value(&mut self, env: &E, state: &E::State) -> Result<F, ProviderError> {
        self.inner.value(env, state)
    }

    fn policy(&mut self, env: &E, state: &E::State, subgoal: &E::State) -> Result<E::Action, ProviderError> {
        self.inner.policy(env, state, subgoal)
    }

    fn get_path(&mut self, env: &E, start: &E::State, subgoal: &E::State, step_limit: usize) -> PathOutcome<E::Action> {
        self.inner.get_path(env, start, subgoal, step_limit)
    }
}
