//! Integer line world and closure-driven providers shared by the planner tests.

#![allow(dead_code)]

use ksubs_core::{Environment, ProviderBundle, ProviderError, SubgoalProposal};

/// States `0..=len`, goal at `goal`, moves of ±1 clamped to the ends.
#[derive(Debug, Clone, Copy)]
pub struct Line {
    pub len: i64,
    pub goal: i64,
}

impl Line {
    pub fn new(len: i64) -> Self {
        Self { len, goal: len }
    }
}

impl Environment for Line {
    type State = i64;
    type Action = i8;

    fn next_state(&self, s: &i64, a: &i8) -> i64 {
        (s + *a as i64).clamp(0, self.len)
    }

    fn is_solved(&self, s: &i64) -> bool {
        *s == self.goal
    }

    fn actions(&self, _s: &i64) -> Vec<i8> {
        vec![-1, 1]
    }
}

type GenFn = Box<dyn FnMut(i64, usize) -> Result<Vec<(i64, f64)>, ProviderError>>;
type ValFn = Box<dyn FnMut(i64) -> Result<f64, ProviderError>>;

/// Generator and value given as closures; the policy steps toward the subgoal.
pub struct Scripted {
    pub generate: GenFn,
    pub value: ValFn,
    pub expanded: Vec<i64>,
}

impl Scripted {
    pub fn new(
        generate: impl FnMut(i64, usize) -> Result<Vec<(i64, f64)>, ProviderError> + 'static,
        value: impl FnMut(i64) -> Result<f64, ProviderError> + 'static,
    ) -> Self {
        Self {
            generate: Box::new(generate),
            value: Box::new(value),
            expanded: Vec::new(),
        }
    }

    /// Proposes `s + k, s + k - 1, ..., s + 1` (then the backward states) with
    /// decreasing probability; value is minus the distance to `goal`.
    pub fn oracle(env: Line) -> Self {
        Self::new(
            move |s, k| {
                let mut out = Vec::new();
                for j in (1..=k as i64).rev() {
                    out.push(s + j);
                }
                for j in 1..=k as i64 {
                    out.push(s - j);
                }
                out.retain(|t| (0..=env.len).contains(t));
                let total = out.len() as f64;
                Ok(out
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| (t, (total - i as f64) / (total * (total + 1.0) / 2.0)))
                    .collect())
            },
            move |s| Ok(-((env.goal - s).abs() as f64)),
        )
    }
}

impl ProviderBundle<Line, f64> for Scripted {
    fn subgoals(
        &mut self,
        _env: &Line,
        state: &i64,
        k: usize,
        max: usize,
    ) -> Result<Vec<SubgoalProposal<i64, f64>>, ProviderError> {
        self.expanded.push(*state);
        let mut out: Vec<_> = (self.generate)(*state, k)?
            .into_iter()
            .map(|(s, p)| SubgoalProposal::new(s, p))
            .collect();
        out.truncate(max);
        Ok(out)
    }

    fn value(&mut self, _env: &Line, state: &i64) -> Result<f64, ProviderError> {
        (self.value)(*state)
    }

    fn policy(&mut self, _env: &Line, s: &i64, g: &i64) -> Result<i8, ProviderError> {
        Ok(if g > s { 1 } else { -1 })
    }
}
