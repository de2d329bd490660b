//! Per-node edge statistics and the pure selection/backup rules.

use rand::Rng;

use crate::error::SearchError;
use crate::scalar::{cmp_nan_low, Scalar};

/// Visit count `n`, total child-value `w` and mean child-value `q` per outgoing edge.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeStats<F> {
    pub n: Vec<u64>,
    pub w: Vec<F>,
    pub q: Vec<F>,
}

impl<F: Scalar> NodeStats<F> {
    /// Initial statistics after expansion: `W = r + γ·V(child)`, `N = 1`, `Q = W`.
    pub fn from_expansion(rewards: &[F], child_values: &[F], gamma: F) -> Self {
        assert_eq!(rewards.len(), child_values.len());
        let w: Vec<F> = rewards
            .iter()
            .zip(child_values)
            .map(|(&r, &v)| r + gamma * v)
            .collect();
        Self {
            n: vec![1; w.len()],
            q: w.clone(),
            w,
        }
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn total_visits(&self) -> u64 {
        self.n.iter().sum()
    }

    /// Adds one backed-up quality to edge `i`.
    pub fn record(&mut self, i: usize, quality: F) {
        self.w[i] = self.w[i] + quality;
        self.n[i] += 1;
        self.q[i] = self.w[i] / F::from_u64(self.n[i]).expect("visit count fits");
    }
}

/// PUCT score of every edge: `Q + c_puct · prior · sqrt(ΣN) / (1 + N)`.
pub fn puct_scores<F: Scalar>(stats: &NodeStats<F>, priors: &[F], c_puct: F) -> Vec<F> {
    let sqrt_total = F::from_u64(stats.total_visits())
        .expect("visit count fits")
        .sqrt();
    (0..stats.len())
        .map(|i| {
            let u = sqrt_total / (F::one() + F::from_u64(stats.n[i]).expect("visit count fits"));
            stats.q[i] + c_puct * priors[i] * u
        })
        .collect()
}

/// Argmax of the PUCT score; ties go to the lowest index.
pub fn select_child<F: Scalar>(
    stats: &NodeStats<F>,
    priors: &[F],
    c_puct: F,
) -> Result<usize, SearchError> {
    select_child_among(stats, priors, c_puct, |_| true).ok_or(SearchError::NoChildren)
}

/// [`select_child`] restricted to edges accepted by `allowed`.
pub fn select_child_among<F: Scalar>(
    stats: &NodeStats<F>,
    priors: &[F],
    c_puct: F,
    allowed: impl Fn(usize) -> bool,
) -> Option<usize> {
    let scores = puct_scores(stats, priors, c_puct);
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if !allowed(i) {
            continue;
        }
        match best {
            Some(b) if cmp_nan_low(s, scores[b]).is_le() => {}
            _ => best = Some(i),
        }
    }
    best
}

/// One step of a backup path: node id, edge index, edge reward.
pub type PathStep<F> = (usize, usize, F);

/// Walks `path` backwards from the leaf: `quality ← r + γ·quality`, then updates `W`, `N`, `Q`.
pub fn backup<F: Scalar>(path: &[PathStep<F>], leaf_value: F, gamma: F, stats: &mut [NodeStats<F>]) {
    let mut quality = leaf_value;
    for &(node, edge, reward) in path.iter().rev() {
        quality = reward + gamma * quality;
        stats[node].record(edge, quality);
    }
}

/// Probabilities `softmax(log N / τ)` over the allowed edges (zero elsewhere).
pub fn visit_distribution<F: Scalar>(
    stats: &NodeStats<F>,
    tau: F,
    allowed: impl Fn(usize) -> bool,
) -> Vec<f64> {
    let tau = tau.as_f64();
    let logs: Vec<Option<f64>> = (0..stats.len())
        .map(|i| allowed(i).then(|| (stats.n[i] as f64).ln() / tau))
        .collect();
    let max = logs
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs
        .iter()
        .map(|l| l.map_or(0.0, |l| (l - max).exp()))
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Samples an edge from [`visit_distribution`], or takes the most visited one when
/// `argmax` is set (the zero-temperature limit, ties to the lowest index).
pub fn choose_child<F: Scalar, R: Rng + ?Sized>(
    stats: &NodeStats<F>,
    tau: F,
    argmax: bool,
    rng: &mut R,
    allowed: impl Fn(usize) -> bool,
) -> Result<usize, SearchError> {
    let candidates: Vec<usize> = (0..stats.len()).filter(|&i| allowed(i)).collect();
    if candidates.is_empty() {
        return Err(SearchError::NoChildren);
    }
    if argmax {
        let mut best = candidates[0];
        for &i in &candidates[1..] {
            if stats.n[i] > stats.n[best] {
                best = i;
            }
        }
        return Ok(best);
    }
    let probs = visit_distribution(stats, tau, &allowed);
    let mut r = rng.random::<f64>();
    for &i in &candidates {
        r -= probs[i];
        if r < 0.0 {
            return Ok(i);
        }
    }
    Ok(*candidates.last().expect("non-empty"))
}
