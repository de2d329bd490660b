//! Count-based stand-in for trained networks, fit on reversed-scramble datasets.
//!
//! States and actions are kept in their text encoding, so the same model can
//! back an in-process bundle and the reference bridge server.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use ksubs_core::{sort_proposals, ProviderBundle, ProviderError, Scalar, StateCodec, SubgoalProposal};

/// One dataset line: trajectory id, step, state, action (absent on the final state), value label.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub traj: usize,
    pub step: usize,
    pub state: String,
    pub action: Option<String>,
    pub value: f64,
}

impl Record {
    pub fn parse(line: &str) -> Result<Self, String> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(format!("expected 5 tab-separated fields, got {}", f.len()));
        }
        Ok(Self {
            traj: f[0].parse().map_err(|e| format!("bad trajectory id: {e}"))?,
            step: f[1].parse().map_err(|e| format!("bad step: {e}"))?,
            state: f[2].to_string(),
            action: (f[3] != "-").then(|| f[3].to_string()),
            value: f[4].parse().map_err(|e| format!("bad value label: {e}"))?,
        })
    }
}

pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<Record>, String> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(Record::parse(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TabularModel {
    pub k: usize,
    subgoals: HashMap<String, Vec<(String, f64)>>,
    values: HashMap<String, f64>,
    policy: HashMap<(String, String), String>,
    /// Returned for states absent from the dataset.
    pub default_value: f64,
}

impl TabularModel {
    /// Groups records by trajectory (ordered by step) and counts targets.
    pub fn fit(records: &[Record], k: usize) -> Self {
        let mut trajs: BTreeMap<usize, Vec<&Record>> = BTreeMap::new();
        for r in records {
            trajs.entry(r.traj).or_default().push(r);
        }
        let mut succ: HashMap<String, BTreeMap<String, usize>> = HashMap::new();
        let mut vals: HashMap<String, (f64, usize)> = HashMap::new();
        let mut acts: HashMap<(String, String), BTreeMap<String, usize>> = HashMap::new();
        let mut longest = 0usize;
        for steps in trajs.values_mut() {
            steps.sort_by_key(|r| r.step);
            let n = steps.len() - 1;
            longest = longest.max(n);
            for (l, r) in steps.iter().enumerate() {
                let target = &steps[(l + k).min(n)].state;
                *succ.entry(r.state.clone()).or_default().entry(target.clone()).or_default() += 1;
                let v = vals.entry(r.state.clone()).or_default();
                v.0 += r.value;
                v.1 += 1;
                if let Some(a) = &r.action {
                    for i in 1..=k {
                        let sub = &steps[(l + i).min(n)].state;
                        *acts
                            .entry((r.state.clone(), sub.clone()))
                            .or_default()
                            .entry(a.clone())
                            .or_default() += 1;
                    }
                }
            }
        }
        let subgoals = succ
            .into_iter()
            .map(|(s, counts)| {
                let total: usize = counts.values().sum();
                let mut list: Vec<(String, f64)> = counts
                    .into_iter()
                    .map(|(t, c)| (t, c as f64 / total as f64))
                    .collect();
                list.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                (s, list)
            })
            .collect();
        let values = vals.into_iter().map(|(s, (sum, n))| (s, sum / n as f64)).collect();
        let policy = acts
            .into_iter()
            .map(|(key, counts)| {
                // BTreeMap iteration makes the lowest token win ties
                let best = counts
                    .iter()
                    .fold(None::<(&String, usize)>, |m, (a, &c)| match m {
                        Some((_, mc)) if mc >= c => m,
                        _ => Some((a, c)),
                    })
                    .expect("non-empty counts");
                (key, best.0.clone())
            })
            .collect();
        Self {
            k,
            subgoals,
            values,
            policy,
            default_value: -2.0 * longest as f64,
        }
    }

    pub fn states(&self) -> usize {
        self.values.len()
    }

    /// Observed `k`-step successors, most frequent first; empty for unseen states.
    pub fn subgoals(&self, state: &str, max_candidates: usize) -> Vec<(String, f64)> {
        self.subgoals
            .get(state)
            .map(|l| l.iter().take(max_candidates).cloned().collect())
            .unwrap_or_default()
    }

    pub fn value(&self, state: &str) -> f64 {
        self.values.get(state).copied().unwrap_or(self.default_value)
    }

    pub fn policy(&self, state: &str, subgoal: &str) -> Option<&str> {
        self.policy
            .get(&(state.to_string(), subgoal.to_string()))
            .map(String::as_str)
    }
}

/// In-process bundle over a tabular model.
#[derive(Debug, Clone)]
pub struct TabularBundle<'m> {
    pub model: &'m TabularModel,
}

impl<'m> TabularBundle<'m> {
    pub fn new(model: &'m TabularModel) -> Self {
        Self { model }
    }
}

/// Decodes text proposals and applies the canonical ordering.
pub fn decode_proposals<E: StateCodec, F: Scalar>(
    env: &E,
    list: &[(String, f64)],
) -> Result<Vec<SubgoalProposal<E::State, F>>, ProviderError> {
    let mut out = list
        .iter()
        .map(|(s, p)| {
            env.decode_state(s)
                .map(|st| SubgoalProposal::new(st, F::lit(*p)))
                .map_err(ProviderError::Validation)
        })
        .collect::<Result<Vec<_>, _>>()?;
    sort_proposals(&mut out);
    Ok(out)
}

impl<'m, E: StateCodec, F: Scalar> ProviderBundle<E, F> for TabularBundle<'m> {
    fn subgoals(
        &mut self,
        env: &E,
        state: &E::State,
        _k: usize,
        max_candidates: usize,
    ) -> Result<Vec<SubgoalProposal<E::State, F>>, ProviderError> {
        decode_proposals(env, &self.model.subgoals(&env.encode_state(state), max_candidates))
    }

    fn value(&mut self, env: &E, state: &E::State) -> Result<F, ProviderError> {
        Ok(F::lit(self.model.value(&env.encode_state(state))))
    }

    fn policy(&mut self, env: &E, state: &E::State, subgoal: &E::State) -> Result<E::Action, ProviderError> {
        let a = self
            .model
            .policy(&env.encode_state(state), &env.encode_state(subgoal))
            .ok_or_else(|| ProviderError::Unknown("no action recorded for this pair".into()))?;
        env.decode_action(a).map_err(ProviderError::Validation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(traj: usize, step: usize, state: &str, action: Option<&str>, value: f64) -> Record {
        Record {
            traj,
            step,
            state: state.into(),
            action: action.map(Into::into),
            value,
        }
    }

    #[test]
    fn single_trajectory() {
        let recs = vec![
            rec(0, 0, "a", Some("x"), -2.0),
            rec(0, 1, "b", Some("y"), -1.0),
            rec(0, 2, "c", None, 0.0),
        ];
        let m = TabularModel::fit(&recs, 1);
        assert_eq!(m.subgoals("a", 4), vec![("b".to_string(), 1.0)]);
        assert_eq!(m.subgoals("c", 4), vec![("c".to_string(), 1.0)]);
        assert_eq!(m.value("c"), 0.0);
        assert_eq!(m.value("a"), -2.0);
        assert_eq!(m.policy("a", "b"), Some("x"));
        assert_eq!(m.value("zzz"), -4.0);
        assert!(m.subgoals("zzz", 4).is_empty());
        assert_eq!(m.policy("a", "zzz"), None);
    }

    #[test]
    fn shared_state_frequencies() {
        let mut recs = Vec::new();
        for t in 0..4 {
            let next = if t < 3 { "b" } else { "c" };
            recs.push(rec(t, 0, "a", Some(if t < 3 { "x" } else { "y" }), -1.0));
            recs.push(rec(t, 1, next, None, 0.0));
        }
        let m = TabularModel::fit(&recs, 2);
        assert_eq!(m.subgoals("a", 4), vec![("b".to_string(), 0.75), ("c".to_string(), 0.25)]);
        assert_eq!(m.subgoals("a", 1).len(), 1);
    }

    #[test]
    fn policy_ties_pick_lowest_token() {
        let recs = vec![
            rec(0, 0, "a", Some("y"), -1.0),
            rec(0, 1, "b", None, 0.0),
            rec(1, 0, "a", Some("x"), -1.0),
            rec(1, 1, "b", None, 0.0),
        ];
        let m = TabularModel::fit(&recs, 1);
        assert_eq!(m.policy("a", "b"), Some("x"));
    }

    #[test]
    fn record_parsing() {
        let r = Record::parse("3\t1\tabc\tU'\t-4").unwrap();
        assert_eq!(r, rec(3, 1, "abc", Some("U'"), -4.0));
        assert_eq!(Record::parse("3\t2\tabc\t-\t0").unwrap().action, None);
        assert!(Record::parse("3\t2\tabc").is_err());
    }
}
