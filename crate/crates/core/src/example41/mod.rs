//! The counterexample family: a cost-1 absorbing state plus a sequence of
//! deterministic branches whose discount schedule `α⁽ⁿ⁾` is generated so that
//! `u_α(0)` stays bounded along `α⁽ⁿ⁾` yet is unbounded along `γ⁽ⁿ⁾`.
//!
//! Formulas are generic over [`real::Real`]; use [`real::Extended`] unless
//! comparing against double precision.

pub mod closed;
pub mod model;
pub mod params;
pub mod real;
pub mod sequence;
pub mod verify;

pub use closed::{closed_form_excess, closed_form_m, closed_form_v, ClosedForms, InfimumBound};
pub use model::{build_model, ExampleState, StateLayout};
pub use params::{derive_params, g, verify_lemma43, Lemma43Report, ParamTuple, DEFAULT_BRANCH_CAP};
pub use real::{Extended, Real};
pub use sequence::{generate_sequence, BranchParams, BranchSequence, Truncation};
pub use verify::{gap_table, verify_prop42, GapRow, Prop42Report, Prop42Tolerances};
