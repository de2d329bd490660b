use crate::provider::SubgoalProposal;
use crate::scalar::Scalar;

/// Keeps the sorted prefix whose mass before each admitted proposal is at most `c4`.
///
/// Proposal `i` is kept iff the cumulative probability of proposals `0..i` is `<= c4`.
pub fn prune_by_total_probability<S, F: Scalar>(
    proposals: Vec<SubgoalProposal<S, F>>,
    c4: F,
) -> Vec<SubgoalProposal<S, F>> {
    let mut total = F::zero();
    let mut kept = Vec::with_capacity(proposals.len());
    for p in proposals {
        if total > c4 {
            break;
        }
        total = total + p.prob;
        kept.push(p);
    }
    kept
}
