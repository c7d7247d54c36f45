//! Positional indexing of the jammer's action histories.
//!
//! The tree-structured LPs index their variables and constraints by action
//! histories of the informed player: sequences over `A_j` of length `t - 1`
//! at stage `t`. Within each stage layer the histories are laid out
//! contiguously as base-`|A_j|` codes, so a history maps to `(stage, index)`
//! with `index ∈ [0, |A_j|^(t-1))`. Per-stage layers keep LP column blocks
//! stage-aligned, which is what the constraint assembly and the CSV dumps
//! lean on.
//!
//! Only the informed player's actions are indexed: both players' optimal
//! strategies are independent of the uninformed player's own history.

use crate::{Error, Result};

/// Base-`branching` positional code for action histories up to a fixed depth.
///
/// `(stage, index)` pairs are the public coordinates: stage `t` holds all
/// sequences of length `t - 1`, so the root (empty history) is `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryIndex {
    branching: usize,
    depth: usize,
}

impl HistoryIndex {
    /// `branching` = `|A_j|`; `depth` = the largest sequence length handled.
    pub fn new(branching: usize, depth: usize) -> Result<Self> {
        if branching == 0 {
            return Err(Error::History("branching must be positive".into()));
        }
        // Guard the positional arithmetic against overflow up front.
        let mut layer = 1usize;
        for _ in 0..depth {
            layer = layer
                .checked_mul(branching)
                .ok_or_else(|| Error::History(format!("{branching}^{depth} overflows")))?;
        }
        Ok(HistoryIndex { branching, depth })
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of histories in stage layer `t` (1-based): `branching^(t-1)`.
    pub fn layer_len(&self, stage: usize) -> usize {
        self.branching.pow((stage - 1) as u32)
    }

    /// Total node count over stage layers `1..=stages`.
    pub fn total_nodes(&self, stages: usize) -> usize {
        (1..=stages).map(|t| self.layer_len(t)).sum()
    }

    /// Map an action sequence to its `(stage, index)` coordinate.
    pub fn encode(&self, history: &[usize]) -> Result<(usize, usize)> {
        if history.len() > self.depth {
            return Err(Error::History(format!(
                "sequence of length {} exceeds depth {}",
                history.len(),
                self.depth
            )));
        }
        let mut index = 0usize;
        for &a in history {
            if a >= self.branching {
                return Err(Error::History(format!(
                    "action id {a} out of range (branching {})",
                    self.branching
                )));
            }
            index = index * self.branching + a;
        }
        Ok((history.len() + 1, index))
    }

    /// Invert [`encode`](Self::encode).
    pub fn decode(&self, stage: usize, index: usize) -> Vec<usize> {
        let len = stage - 1;
        let mut out = vec![0usize; len];
        let mut rem = index;
        for slot in out.iter_mut().rev() {
            *slot = rem % self.branching;
            rem /= self.branching;
        }
        out
    }

    /// Child coordinate reached by appending action `a`.
    pub fn child(&self, _stage: usize, index: usize, a: usize) -> usize {
        index * self.branching + a
    }

    /// All children of a node, as `(stage + 1, child_index)` pairs.
    pub fn children(&self, stage: usize, index: usize) -> Result<Vec<(usize, usize)>> {
        if stage > self.depth {
            return Err(Error::History(format!(
                "stage {stage} has no children below depth {}",
                self.depth
            )));
        }
        Ok((0..self.branching)
            .map(|a| (stage + 1, self.child(stage, index, a)))
            .collect())
    }

    /// Parent coordinate, or `None` at the root.
    pub fn parent(&self, stage: usize, index: usize) -> Option<(usize, usize)> {
        if stage <= 1 {
            None
        } else {
            Some((stage - 1, index / self.branching))
        }
    }
}
