//! Countable-state MDP data model.
//!
//! States are stored densely and addressed by index; the string labels are
//! the external identifiers used in model files and reports. Each state owns a
//! nonempty, ordered list of actions, and "first action" always refers to that
//! declared order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Deref, DerefMut, Index};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtNonnegReal;

/// Absolute tolerance on the probability mass of a transition row.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Finite-support transition distribution `q(·|x,a)`.
///
/// Entries are kept in declared order; that order fixes the summation order of
/// every expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    entries: Vec<(usize, f64)>,
}

impl TransitionRow {
    pub fn new(entries: Vec<(usize, f64)>) -> Self {
        Self { entries }
    }

    /// Point mass on `state`.
    pub fn deterministic(state: usize) -> Self {
        Self { entries: vec![(state, 1.0)] }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|&(_, p)| p).sum()
    }

    /// Copy with probabilities divided by their sum. Never applied implicitly.
    pub fn renormalized(&self) -> Self {
        let total = self.total_mass();
        Self {
            entries: self.entries.iter().map(|&(s, p)| (s, p / total)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub label: String,
    pub cost: ExtNonnegReal,
    pub row: TransitionRow,
}

impl Action {
    pub fn new(label: impl Into<String>, cost: ExtNonnegReal, row: TransitionRow) -> Self {
        Self { label: label.into(), cost, row }
    }
}

/// Whether the stored states are the whole state space or a closed window of
/// a larger (possibly infinite) one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StateWindow {
    Complete,
    Truncated { description: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MdpModel {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    actions: Vec<Vec<Action>>,
    window: StateWindow,
}

impl MdpModel {
    /// Assembles a model without validating it; see [`validate_model`].
    ///
    /// Panics if labels are duplicated or `actions` does not have one entry per
    /// label, since those make the model unaddressable.
    pub fn from_parts(labels: Vec<String>, actions: Vec<Vec<Action>>, window: StateWindow) -> Self {
        assert_eq!(labels.len(), actions.len(), "one action list per state");
        let index: HashMap<String, usize> =
            labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        assert_eq!(index.len(), labels.len(), "state labels must be unique");
        Self { labels, index, actions, window }
    }

    /// Like [`MdpModel::from_parts`] but rejects models with a nonempty
    /// validation report.
    pub fn checked(labels: Vec<String>, actions: Vec<Vec<Action>>, window: StateWindow) -> Result<Self> {
        let model = Self::from_parts(labels, actions, window);
        let report = validate_model(&model);
        if report.is_empty() {
            Ok(model)
        } else {
            Err(Error::InvalidModel(report.to_string()))
        }
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, state: usize) -> &str {
        &self.labels[state]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownState(label.to_owned()))
    }

    pub fn actions(&self, state: usize) -> &[Action] {
        &self.actions[state]
    }

    pub fn action(&self, state: usize, action: usize) -> Result<&Action> {
        self.actions[state].get(action).ok_or_else(|| Error::InfeasibleAction {
            state: self.labels[state].clone(),
            action,
        })
    }

    pub fn window(&self) -> &StateWindow {
        &self.window
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self.window, StateWindow::Truncated { .. })
    }

    /// Number of deterministic stationary policies, saturating.
    pub fn policy_count(&self) -> u128 {
        self.actions
            .iter()
            .try_fold(1u128, |acc, a| acc.checked_mul(a.len() as u128))
            .unwrap_or(u128::MAX)
    }

    pub fn has_infinite_cost(&self) -> bool {
        self.actions.iter().flatten().any(|a| a.cost.is_infinite())
    }
}

/// A function from states to `[0, +∞]`, indexed like the model's states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueFn(pub Vec<ExtNonnegReal>);

impl ValueFn {
    pub fn zeros(n: usize) -> Self {
        Self(vec![ExtNonnegReal::ZERO; n])
    }

    pub fn constant(n: usize, value: ExtNonnegReal) -> Self {
        Self(vec![value; n])
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        values.iter().map(|&v| ExtNonnegReal::new(v)).collect::<Result<_>>().map(Self)
    }

    /// Pointwise `self ≤ other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.get()).collect()
    }
}

impl Deref for ValueFn {
    type Target = [ExtNonnegReal];

    fn deref(&self) -> &[ExtNonnegReal] {
        &self.0
    }
}

impl DerefMut for ValueFn {
    fn deref_mut(&mut self) -> &mut [ExtNonnegReal] {
        &mut self.0
    }
}

/// Deterministic stationary policy: one action index per state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationaryPolicy(pub Vec<usize>);

impl StationaryPolicy {
    /// The policy choosing the first declared action everywhere.
    pub fn first_actions(model: &MdpModel) -> Self {
        Self(vec![0; model.num_states()])
    }

    pub fn check_feasible(&self, model: &MdpModel) -> Result<()> {
        if self.0.len() != model.num_states() {
            return Err(Error::InvalidParameter(format!(
                "policy covers {} states, model has {}",
                self.0.len(),
                model.num_states()
            )));
        }
        for (x, &a) in self.0.iter().enumerate() {
            model.action(x, a)?;
        }
        Ok(())
    }

    /// Every deterministic stationary policy, in lexicographic order of the
    /// per-state action indices.
    pub fn enumerate(model: &MdpModel) -> impl Iterator<Item = StationaryPolicy> + '_ {
        let counts: Vec<usize> = (0..model.num_states()).map(|x| model.actions(x).len()).collect();
        let mut next = Some(vec![0usize; counts.len()]);
        std::iter::from_fn(move || {
            let current = next.take()?;
            let mut succ = current.clone();
            for i in (0..succ.len()).rev() {
                succ[i] += 1;
                if succ[i] < counts[i] {
                    next = Some(succ);
                    break;
                }
                succ[i] = 0;
            }
            Some(StationaryPolicy(current))
        })
    }
}

impl Index<usize> for StationaryPolicy {
    type Output = usize;

    fn index(&self, state: usize) -> &usize {
        &self.0[state]
    }
}

/// Non-stationary deterministic policy; `epochs[t]` is used at decision epoch `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkovPolicy {
    pub epochs: Vec<StationaryPolicy>,
}

impl MarkovPolicy {
    pub fn horizon(&self) -> usize {
        self.epochs.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    EmptyActionSet { state: String },
    RowMass { state: String, action: String, mass: f64 },
    NonPositiveProbability { state: String, action: String, destination: String, probability: f64 },
    DuplicateDestination { state: String, action: String, destination: String },
    DanglingDestination { state: String, action: String, destination: String },
    NegativeCost { state: String, action: String, cost: f64 },
    UnknownState { state: String },
    DuplicateState { state: String },
    MissingCost { state: String, action: String },
    MissingTransition { state: String, action: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyActionSet { state } => write!(f, "state {state}: empty action set"),
            Self::RowMass { state, action, mass } => {
                write!(f, "({state}, {action}): transition row sums to {mass}")
            }
            Self::NonPositiveProbability { state, action, destination, probability } => {
                write!(f, "({state}, {action}): probability {probability} to {destination}")
            }
            Self::DuplicateDestination { state, action, destination } => {
                write!(f, "({state}, {action}): destination {destination} listed twice")
            }
            Self::DanglingDestination { state, action, destination } => {
                write!(f, "({state}, {action}): destination {destination} is not a declared state")
            }
            Self::NegativeCost { state, action, cost } => {
                write!(f, "({state}, {action}): negative cost {cost}")
            }
            Self::UnknownState { state } => write!(f, "undeclared state {state}"),
            Self::DuplicateState { state } => write!(f, "state {state} declared twice"),
            Self::MissingCost { state, action } => write!(f, "({state}, {action}): no cost"),
            Self::MissingTransition { state, action } => {
                write!(f, "({state}, {action}): no transition row")
            }
        }
    }
}

/// Every violated model invariant; the model is acceptable iff this is empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_model(model: &MdpModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = model.num_states();
    for x in 0..n {
        let state = model.label(x);
        if model.actions(x).is_empty() {
            report.push(Violation::EmptyActionSet { state: state.to_owned() });
        }
        for action in model.actions(x) {
            check_row(
                &mut report,
                state,
                &action.label,
                action.row.entries(),
                |d| (d < n).then(|| model.label(d).to_owned()).ok_or_else(|| d.to_string()),
            );
        }
    }
    report
}

/// Shared row checks for built models and raw documents. `resolve` maps a
/// destination to its label, or reports the unresolvable name.
pub(crate) fn check_row<D: Copy + PartialEq>(
    report: &mut ValidationReport,
    state: &str,
    action: &str,
    entries: &[(D, f64)],
    resolve: impl Fn(D) -> std::result::Result<String, String>,
) {
    let mut seen: Vec<D> = Vec::with_capacity(entries.len());
    for &(dest, p) in entries {
        let name = match resolve(dest) {
            Ok(name) => name,
            Err(name) => {
                report.push(Violation::DanglingDestination {
                    state: state.to_owned(),
                    action: action.to_owned(),
                    destination: name,
                });
                continue;
            }
        };
        if !(p > 0.0 && p <= 1.0) {
            report.push(Violation::NonPositiveProbability {
                state: state.to_owned(),
                action: action.to_owned(),
                destination: name.clone(),
                probability: p,
            });
        }
        if seen.contains(&dest) {
            report.push(Violation::DuplicateDestination {
                state: state.to_owned(),
                action: action.to_owned(),
                destination: name,
            });
        }
        seen.push(dest);
    }
    let mass: f64 = entries.iter().map(|&(_, p)| p).sum();
    if !((mass - 1.0).abs() <= ROW_SUM_TOL) {
        report.push(Violation::RowMass { state: state.to_owned(), action: action.to_owned(), mass });
    }
}

/// `Σ p_i·w(z_i)` over the row in declared order, with `0·∞ = 0`.
pub fn expect_under(row: &TransitionRow, w: &[ExtNonnegReal]) -> Result<ExtNonnegReal> {
    let mut acc = ExtNonnegReal::ZERO;
    for &(z, p) in row.entries() {
        let value = *w.get(z).ok_or(Error::MissingValue { state: z })?;
        acc += value.scale(p);
    }
    Ok(acc)
}
