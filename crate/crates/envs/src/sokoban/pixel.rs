//! Pixelwise subgoal construction: a subgoal is built from the current board by
//! a chain of single-cell overwrites, each predicted as one class out of
//! `rows · cols · 7 + 1` (the last class closes the chain).

use std::collections::{HashMap, VecDeque};

use ksubs_core::{prune_by_total_probability, sort_proposals, ProviderError, Scalar, SubgoalProposal};

use super::board::{Cell, SokobanBoard, CHANNELS};

pub fn terminal_class(board: &SokobanBoard) -> usize {
    board.rows() * board.cols() * CHANNELS + 1
}

/// 1-based class for setting `(row, col)` to `channel`.
pub fn class_index(cols: usize, row: usize, col: usize, channel: usize) -> usize {
    (row * cols + col) * CHANNELS + channel + 1
}

/// `(row, col, channel)` for a non-terminal class.
pub fn decode_class(rows: usize, cols: usize, class: usize) -> Option<(usize, usize, usize)> {
    if class == 0 || class > rows * cols * CHANNELS {
        return None;
    }
    let idx = class - 1;
    let row = idx / (cols * CHANNELS);
    let col = (idx % (cols * CHANNELS)) / CHANNELS;
    Some((row, col, idx % CHANNELS))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChangeError {
    #[error("class {0} is the terminal class")]
    Terminal(usize),
    #[error("class {class} out of range 1..={max}")]
    OutOfRange { class: usize, max: usize },
}

/// Overwrites one cell with the decoded channel.
pub fn apply_change(board: &SokobanBoard, class: usize) -> Result<SokobanBoard, ChangeError> {
    let terminal = terminal_class(board);
    if class == terminal {
        return Err(ChangeError::Terminal(class));
    }
    let (row, col, channel) = decode_class(board.rows(), board.cols(), class).ok_or(ChangeError::OutOfRange {
        class,
        max: terminal - 1,
    })?;
    let mut out = board.clone();
    out.set(row, col, Cell::ALL[channel]);
    Ok(out)
}

/// Training pairs for the pixelwise generator: the inputs are `(state, running
/// modified state)` and the targets the class to emit next, ending with the
/// terminal class.
pub fn generate_inputs_and_targets(
    state: &SokobanBoard,
    subgoal: &SokobanBoard,
) -> (Vec<(SokobanBoard, SokobanBoard)>, Vec<usize>) {
    assert_eq!(
        (state.rows(), state.cols()),
        (subgoal.rows(), subgoal.cols()),
        "boards must have the same shape"
    );
    let mut modified = state.clone();
    let mut inputs = vec![(state.clone(), modified.clone())];
    let mut targets = Vec::new();
    for row in 0..state.rows() {
        for col in 0..state.cols() {
            for channel in 0..CHANNELS {
                let want = subgoal.get(row, col);
                if want.channel() == channel && modified.get(row, col).channel() != channel {
                    targets.push(class_index(state.cols(), row, col, channel));
                    modified.set(row, col, want);
                    inputs.push((state.clone(), modified.clone()));
                }
            }
        }
    }
    targets.push(terminal_class(state));
    (inputs, targets)
}

/// Distribution over modification classes for `(state, modified)`, sorted by
/// probability, descending.
pub trait ModificationProvider<F> {
    fn sorted_predictions(
        &mut self,
        state: &SokobanBoard,
        modified: &SokobanBoard,
    ) -> Result<Vec<(usize, F)>, ProviderError>;
}

impl<F, T> ModificationProvider<F> for T
where
    T: FnMut(&SokobanBoard, &SokobanBoard) -> Result<Vec<(usize, F)>, ProviderError>,
{
    fn sorted_predictions(
        &mut self,
        state: &SokobanBoard,
        modified: &SokobanBoard,
    ) -> Result<Vec<(usize, F)>, ProviderError> {
        self(state, modified)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelConfig<F> {
    /// Per-node cumulative mass after which further predictions are ignored.
    pub internal_cl: F,
    pub c4: F,
    /// Queue pops allowed per expansion.
    pub max_nodes: usize,
}

impl<F: Scalar> PixelConfig<F> {
    pub fn new(internal_cl: F, c4: F) -> Self {
        Self {
            internal_cl,
            c4,
            max_nodes: 10_000,
        }
    }
}

/// FIFO expansion of modified boards. Each node keeps predictions until their
/// summed mass reaches `internal_cl`; the terminal class turns the node into a
/// subgoal with the product of the probabilities along its chain.
pub fn expand_pixelwise<F, P>(
    state: &SokobanBoard,
    provider: &mut P,
    cfg: &PixelConfig<F>,
) -> Result<Vec<SubgoalProposal<SokobanBoard, F>>, ProviderError>
where
    F: Scalar,
    P: ModificationProvider<F> + ?Sized,
{
    let terminal = terminal_class(state);
    let mut subgoals: Vec<SubgoalProposal<SokobanBoard, F>> = Vec::new();
    let mut queue = VecDeque::from([(state.clone(), F::one())]);
    let mut pops = 0usize;
    while let Some((modified, parent_prob)) = queue.pop_front() {
        pops += 1;
        if pops > cfg.max_nodes {
            break;
        }
        let predictions = provider.sorted_predictions(state, &modified)?;
        let mut total = F::zero();
        for (class, p) in predictions {
            if total >= cfg.internal_cl {
                break;
            }
            if !(p >= F::zero() && p <= F::one()) {
                return Err(ProviderError::Validation(format!("probability {p} outside [0, 1]")));
            }
            total = total + p;
            if class == terminal {
                subgoals.push(SubgoalProposal::new(modified.clone(), parent_prob * p));
            } else {
                let next = apply_change(&modified, class).map_err(|e| ProviderError::Validation(e.to_string()))?;
                queue.push_back((next, parent_prob * p));
            }
        }
    }
    sort_proposals(&mut subgoals);
    Ok(prune_by_total_probability(subgoals, cfg.c4))
}

/// Replays the targets of one `(state, subgoal)` pair with probability 1.
#[derive(Debug, Clone)]
pub struct ScriptedModifications {
    next: HashMap<SokobanBoard, usize>,
}

impl ScriptedModifications {
    pub fn from_pair(state: &SokobanBoard, subgoal: &SokobanBoard) -> Self {
        let (inputs, targets) = generate_inputs_and_targets(state, subgoal);
        let next = inputs.into_iter().map(|(_, m)| m).zip(targets).collect();
        Self { next }
    }
}

impl<F: Scalar> ModificationProvider<F> for ScriptedModifications {
    fn sorted_predictions(
        &mut self,
        _state: &SokobanBoard,
        modified: &SokobanBoard,
    ) -> Result<Vec<(usize, F)>, ProviderError> {
        self.next
            .get(modified)
            .map(|&c| vec![(c, F::one())])
            .ok_or_else(|| ProviderError::Unknown("modified board not in script".into()))
    }
}
