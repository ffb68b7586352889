//! The truncated counterexample as an [`MdpModel`].
//!
//! State `0` is absorbing with cost 1. Branch `n` is a deterministic path
//! `(n,1) → … → (n,2N(n)) → 0` whose first half costs `1 - ε⁽ⁿ⁾` per step and
//! second half `1 + ε⁽ⁿ⁾`. Every state has the single action `go`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::real::Real;
use super::sequence::BranchSequence;
use crate::error::{Error, Result};
use crate::ext::ExtNonnegReal;
use crate::model::{Action, MdpModel, StateWindow, TransitionRow};

pub const ACTION_LABEL: &str = "go";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExampleState {
    Zero,
    Branch { n: u64, k: u64 },
}

impl fmt::Display for ExampleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleState::Zero => f.write_str("0"),
            ExampleState::Branch { n, k } => write!(f, "({n},{k})"),
        }
    }
}

impl FromStr for ExampleState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(ExampleState::Zero);
        }
        let bad = || Error::Parse(format!("{s:?} is neither 0 nor (n,k)"));
        let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (n, k) = inner.split_once(',').ok_or_else(bad)?;
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let k: u64 = k.trim().parse().map_err(|_| bad())?;
        if n == 0 || k == 0 {
            return Err(bad());
        }
        Ok(ExampleState::Branch { n, k })
    }
}

/// Maps between [`ExampleState`] and dense indices of the built model:
/// `0` first, then branch 1 in path order, then branch 2, and so on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateLayout {
    big_n: Vec<u64>,
    offsets: Vec<usize>,
}

impl StateLayout {
    pub fn new<R: Real>(seq: &BranchSequence<R>) -> Self {
        let big_n: Vec<u64> = seq.branches.iter().map(|b| b.big_n).collect();
        let mut offsets = Vec::with_capacity(big_n.len());
        let mut next = 1usize;
        for &n in &big_n {
            offsets.push(next);
            next += 2 * n as usize;
        }
        Self { big_n, offsets }
    }

    pub fn num_states(&self) -> usize {
        1 + self.big_n.iter().map(|&n| 2 * n as usize).sum::<usize>()
    }

    pub fn index(&self, state: ExampleState) -> Option<usize> {
        match state {
            ExampleState::Zero => Some(0),
            ExampleState::Branch { n, k } => {
                let i = usize::try_from(n).ok()?.checked_sub(1)?;
                let len = *self.big_n.get(i)?;
                (1..=2 * len).contains(&k).then(|| self.offsets[i] + (k - 1) as usize)
            }
        }
    }

    pub fn state(&self, index: usize) -> Option<ExampleState> {
        if index == 0 {
            return Some(ExampleState::Zero);
        }
        let i = self.offsets.partition_point(|&o| o <= index).checked_sub(1)?;
        let k = (index - self.offsets[i]) as u64 + 1;
        (k <= 2 * self.big_n[i]).then_some(ExampleState::Branch { n: i as u64 + 1, k })
    }

    pub fn states(&self) -> impl Iterator<Item = ExampleState> + '_ {
        std::iter::once(ExampleState::Zero).chain(
            self.big_n
                .iter()
                .enumerate()
                .flat_map(|(i, &len)| (1..=2 * len).map(move |k| ExampleState::Branch { n: i as u64 + 1, k })),
        )
    }
}

pub fn build_model<R: Real>(seq: &BranchSequence<R>) -> Result<MdpModel> {
    if seq.is_empty() {
        return Err(Error::InvalidParameter("cannot build a model from an empty sequence".into()));
    }
    let layout = StateLayout::new(seq);
    let mut labels = Vec::with_capacity(layout.num_states());
    let mut actions = Vec::with_capacity(layout.num_states());
    labels.push(ExampleState::Zero.to_string());
    actions.push(vec![Action::new(ACTION_LABEL, ExtNonnegReal::ONE, TransitionRow::deterministic(0))]);
    for b in &seq.branches {
        let eps = b.eps.to_f64();
        let start = labels.len();
        for k in 1..=2 * b.big_n {
            labels.push(ExampleState::Branch { n: b.n, k }.to_string());
            let cost = if k <= b.big_n { 1.0 - eps } else { 1.0 + eps };
            let next = if k == 2 * b.big_n { 0 } else { start + k as usize };
            actions.push(vec![Action::new(ACTION_LABEL, ExtNonnegReal::finite(cost), TransitionRow::deterministic(next))]);
        }
    }
    let description = format!("branches 1..={} of an infinite family", seq.len());
    Ok(MdpModel::from_parts(labels, actions, StateWindow::Truncated { description }))
}
