//! Graph-size and provider-call accounting.

use crate::config::CountingPolicy;

/// Counters collected during one solve. All fields only ever grow.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SearchMetrics {
    pub seen_count: usize,
    pub subgoals_generated: usize,
    /// States stepped through or expanded by the low-level path search.
    pub policy_transition_nodes: usize,
    /// Proposals that entered the seen set but could not be connected.
    pub unreachable_proposals: usize,
    pub expansions: usize,
    pub generator_calls: usize,
    pub value_calls: usize,
    pub policy_calls: usize,
    /// Generator or policy queries that failed and were degraded in-band.
    pub provider_failures: usize,
    pub mcts_passes: usize,
    pub planner_calls: usize,
}

impl SearchMetrics {
    pub fn graph_size(&self, policy: CountingPolicy) -> usize {
        graph_size(self, policy)
    }
}

/// Search budget consumed so far under `policy`.
pub fn graph_size(metrics: &SearchMetrics, policy: CountingPolicy) -> usize {
    match policy {
        CountingPolicy::SubgoalsOnly => metrics.seen_count,
        CountingPolicy::SubgoalsPlusPolicyNodes => {
            metrics.seen_count + metrics.policy_transition_nodes
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_policies() {
        let m = SearchMetrics {
            seen_count: 10,
            policy_transition_nodes: 30,
            ..Default::default()
        };
        assert_eq!(graph_size(&m, CountingPolicy::SubgoalsOnly), 10);
        assert_eq!(graph_size(&m, CountingPolicy::SubgoalsPlusPolicyNodes), 40);
    }
}
