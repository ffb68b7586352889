//! Solvers and verification tools for Markov decision processes with
//! nonnegative, possibly infinite, one-step costs.

pub mod avgcost;
pub mod chain;
pub mod dp;
pub mod error;
pub mod example41;
pub mod ext;
pub mod io;
pub mod model;
mod parallel;
pub mod random;
pub mod selection;

pub use dp::{Discount, StopRule};
pub use error::{Error, Result};
pub use ext::ExtNonnegReal;
pub use model::{
    expect_under, validate_model, Action, MarkovPolicy, MdpModel, StateWindow, StationaryPolicy, TransitionRow,
    ValidationReport, ValueFn,
};
