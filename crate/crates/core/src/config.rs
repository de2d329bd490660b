use crate::error::ConfigError;
use crate::scalar::Scalar;

/// Which nodes count toward the graph-size budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CountingPolicy {
    /// Only states added to the seen set (Sokoban convention).
    #[default]
    SubgoalsOnly,
    /// Seen states plus every state the low-level path search stepped through
    /// (Rubik and INT convention).
    SubgoalsPlusPolicyNodes,
}

impl CountingPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SubgoalsOnly => "subgoals-only",
            Self::SubgoalsPlusPolicyNodes => "subgoals-plus-policy-nodes",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "subgoals-only" => Some(Self::SubgoalsOnly),
            "subgoals-plus-policy-nodes" => Some(Self::SubgoalsPlusPolicyNodes),
            _ => None,
        }
    }
}

/// Hyperparameters of best-first subgoal search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig<F> {
    /// Steps ahead the generator is asked to look.
    pub k: usize,
    /// Graph-size budget (C1).
    pub c1_max_nodes: usize,
    /// Low-level step limit per subgoal (C2).
    pub c2_step_limit: usize,
    /// Candidates requested per expansion (C3).
    pub c3_num_subgoals: usize,
    /// Cumulative probability cutoff (C4).
    pub c4_target_prob: F,
    pub counting_policy: CountingPolicy,
    pub rng_seed: u64,
    /// Also stop on solved states passed through by the low-level path. Off by default.
    pub detect_intermediate_solved: bool,
}

impl<F: Scalar> SearchConfig<F> {
    pub fn new(k: usize, c1: usize, c2: usize, c3: usize, c4: F) -> Self {
        Self {
            k,
            c1_max_nodes: c1,
            c2_step_limit: c2,
            c3_num_subgoals: c3,
            c4_target_prob: c4,
            counting_policy: CountingPolicy::SubgoalsOnly,
            rng_seed: 0,
            detect_intermediate_solved: false,
        }
    }

    /// Defaults for Sokoban: k=4, C1=5000, C2=4, C3=4, C4=0.98.
    pub fn sokoban() -> Self {
        Self::new(4, 5000, 4, 4, F::lit(0.98))
    }

    /// Defaults for the Rubik's Cube: k=4, C1=1500, C2=7, C3=3, C4=1.
    pub fn rubik() -> Self {
        Self::new(4, 1500, 7, 3, F::one()).with_counting(CountingPolicy::SubgoalsPlusPolicyNodes)
    }

    /// Defaults for INT: k=3, C1=400, C2=4, C3=4, C4=1.
    pub fn int() -> Self {
        Self::new(3, 400, 4, 4, F::one()).with_counting(CountingPolicy::SubgoalsPlusPolicyNodes)
    }

    pub fn with_counting(mut self, policy: CountingPolicy) -> Self {
        self.counting_policy = policy;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k < 1 {
            return Err(ConfigError::new("k must be at least 1"));
        }
        if self.c1_max_nodes < 1 {
            return Err(ConfigError::new("C1 must be at least 1"));
        }
        if self.c2_step_limit < 1 {
            return Err(ConfigError::new("C2 must be at least 1"));
        }
        if self.c3_num_subgoals < 1 {
            return Err(ConfigError::new("C3 must be at least 1"));
        }
        let c4 = self.c4_target_prob;
        if !(c4 > F::zero() && c4 <= F::one()) {
            return Err(ConfigError::new("C4 must lie in (0, 1]"));
        }
        Ok(())
    }
}
