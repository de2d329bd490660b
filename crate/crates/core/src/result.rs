use crate::metrics::SearchMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchStatus {
    Solved,
    BudgetExhausted,
    FrontierEmpty,
    ActionLimit,
}

impl SearchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Solved => "solved",
            Self::BudgetExhausted => "budget-exhausted",
            Self::FrontierEmpty => "frontier-empty",
            Self::ActionLimit => "action-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<A> {
    pub status: SearchStatus,
    /// Solution path; empty unless `status` is `Solved`.
    pub actions: Vec<A>,
    /// Best unsolved attempt, where the planner keeps one (chain sampler, MCTS).
    pub partial_actions: Vec<A>,
    pub metrics: SearchMetrics,
}

impl<A> SearchResult<A> {
    pub fn solved(actions: Vec<A>, metrics: SearchMetrics) -> Self {
        Self {
            status: SearchStatus::Solved,
            actions,
            partial_actions: Vec::new(),
            metrics,
        }
    }

    pub fn unsolved(status: SearchStatus, metrics: SearchMetrics) -> Self {
        Self {
            status,
            actions: Vec::new(),
            partial_actions: Vec::new(),
            metrics,
        }
    }

    pub fn is_solved(&self) -> bool {
        self.status == SearchStatus::Solved
    }
}
