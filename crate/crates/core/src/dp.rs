//! Bellman backups, finite-horizon backward induction, value iteration and
//! policy extraction for nonnegative costs.
//!
//! `η_w^α(x, a) = c(x, a) + α Σ_z q(z|x,a) w(z)`. Iterating the backup from
//! `w ≡ 0` produces the horizon values `v_{t,α}`, which increase pointwise to
//! the infinite-horizon value `v_α`. Ties between actions always go to the
//! first declared action.

use serde::{Deserialize, Serialize};

use crate::chain::InducedChain;
use crate::error::{Error, Result};
use crate::ext::ExtNonnegReal;
use crate::model::{expect_under, MarkovPolicy, MdpModel, StationaryPolicy, ValueFn};
use crate::parallel;
use crate::selection::argmin_first;

/// Iteration budget for tolerance-driven value iteration.
pub const MAX_ITERATIONS: usize = 100_000_000;

/// A discount factor in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Discount(f64);

impl Discount {
    pub const UNDISCOUNTED: Self = Self(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            Err(Error::DiscountOutOfRange(alpha))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Discount {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

/// `A(x)`-subsets of action indices, ascending.
pub type ArgminSets = Vec<Vec<usize>>;

pub fn eta(model: &MdpModel, w: &[ExtNonnegReal], alpha: Discount, x: usize, a: usize) -> Result<ExtNonnegReal> {
    let action = model.action(x, a)?;
    Ok(action.cost + expect_under(&action.row, w)?.scale(alpha.get()))
}

/// All `η_w^α(x, ·)` at one state, in declared action order.
pub fn etas_at(model: &MdpModel, w: &[ExtNonnegReal], alpha: Discount, x: usize) -> Vec<ExtNonnegReal> {
    model
        .actions(x)
        .iter()
        .map(|action| {
            let next = expect_under(&action.row, w).expect("value function covers every destination");
            action.cost + next.scale(alpha.get())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Backup {
    pub value: ValueFn,
    /// Exact minimisers; the whole action set where the value is `+∞`.
    pub argmin: ArgminSets,
}

fn exact_argmin(etas: &[ExtNonnegReal]) -> (ExtNonnegReal, Vec<usize>) {
    let (_, best) = argmin_first(etas.iter().copied()).expect("nonempty action set");
    let set = if best.is_infinite() {
        (0..etas.len()).collect()
    } else {
        (0..etas.len()).filter(|&a| etas[a] == best).collect()
    };
    (best, set)
}

/// Applies the Bellman operator once.
///
/// Panics if `w` does not cover the model's states.
pub fn bellman_backup(model: &MdpModel, w: &[ExtNonnegReal], alpha: Discount) -> Backup {
    assert_eq!(w.len(), model.num_states(), "value function must be total on the model's states");
    let per_state = parallel::map_indexed(model.num_states(), |x| exact_argmin(&etas_at(model, w, alpha, x)));
    let (value, argmin) = per_state.into_iter().unzip();
    Backup { value: ValueFn(value), argmin }
}

/// `min_a η_w^α(·, a)` without the argmin sets.
fn backup_values(model: &MdpModel, w: &[ExtNonnegReal], alpha: Discount) -> ValueFn {
    let a = alpha.get();
    ValueFn(parallel::map_indexed(model.num_states(), |x| {
        model
            .actions(x)
            .iter()
            .map(|action| {
                let next = expect_under(&action.row, w).expect("value function covers every destination");
                action.cost + next.scale(a)
            })
            .min()
            .expect("nonempty action set")
    }))
}

/// The iterates `v_{0,α} ≡ 0, v_{1,α}, v_{2,α}, …`.
pub struct ValueIterates<'a> {
    model: &'a MdpModel,
    alpha: Discount,
    current: Option<ValueFn>,
}

impl Iterator for ValueIterates<'_> {
    type Item = ValueFn;

    fn next(&mut self) -> Option<ValueFn> {
        let next = match &self.current {
            None => ValueFn::zeros(self.model.num_states()),
            Some(w) => bellman_backup(self.model, w, self.alpha).value,
        };
        self.current = Some(next.clone());
        Some(next)
    }
}

pub fn value_iterates(model: &MdpModel, alpha: Discount) -> ValueIterates<'_> {
    ValueIterates { model, alpha, current: None }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteHorizon {
    /// `values[t] = v_{t,α}` for `t = 0..=T`.
    pub values: Vec<ValueFn>,
    /// `argmin[t] = A_{t,α}`, the minimisers of the backup producing `values[t+1]`.
    pub argmin: Vec<ArgminSets>,
    pub policy: MarkovPolicy,
}

/// Backward induction over `horizon` epochs. Epoch `T-1-t` of the returned
/// policy acts on `A_{t,α}`, so the policy is `T`-horizon optimal.
pub fn finite_horizon(model: &MdpModel, alpha: Discount, horizon: usize) -> Result<FiniteHorizon> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let mut values = vec![ValueFn::zeros(model.num_states())];
    let mut argmin = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let backup = bellman_backup(model, &values[t], alpha);
        values.push(backup.value);
        argmin.push(backup.argmin);
    }
    let epochs = (0..horizon)
        .map(|epoch| StationaryPolicy(argmin[horizon - 1 - epoch].iter().map(|set| set[0]).collect()))
        .collect();
    Ok(FiniteHorizon { values, argmin, policy: MarkovPolicy { epochs } })
}

/// Expected `Σ_{t<T} α^t c` under a Markov policy, by backward recursion.
pub fn evaluate_markov_policy(model: &MdpModel, policy: &MarkovPolicy, alpha: Discount) -> Result<ValueFn> {
    let mut w = ValueFn::zeros(model.num_states());
    for decision in policy.epochs.iter().rev() {
        decision.check_feasible(model)?;
        let next = (0..model.num_states())
            .map(|x| eta(model, &w, alpha, x, decision[x]))
            .collect::<Result<Vec<_>>>()?;
        w = ValueFn(next);
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StopRule {
    /// Stop when the sup-norm change on finite-valued states is at most
    /// `ε(1-α)/(2α)`, which certifies `|v - v_α| ≤ ε` there. Needs `α < 1` and
    /// finite costs.
    SupNorm(f64),
    /// Exactly this many backups from `v ≡ 0`.
    FixedIterations(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfiniteHorizon {
    pub value: ValueFn,
    pub iterations: usize,
    /// `sup_x |v(x) - min_a η_v^α(x,a)|` over states where `v` is finite.
    pub residual: f64,
    /// Whether every iterate dominated its predecessor pointwise.
    pub monotone: bool,
}

pub fn infinite_horizon(model: &MdpModel, alpha: Discount, rule: StopRule) -> Result<InfiniteHorizon> {
    let a = alpha.get();
    let (threshold, budget) = match rule {
        StopRule::SupNorm(eps) => {
            if !(eps > 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance must be positive, got {eps}")));
            }
            if a >= 1.0 {
                return Err(Error::NoContraction("discount factor 1"));
            }
            if model.has_infinite_cost() {
                return Err(Error::NoContraction("unbounded (infinite) costs"));
            }
            let threshold = if a == 0.0 { f64::INFINITY } else { eps * (1.0 - a) / (2.0 * a) };
            (Some(threshold), MAX_ITERATIONS)
        }
        StopRule::FixedIterations(k) => (None, k),
    };

    let mut v = ValueFn::zeros(model.num_states());
    let mut monotone = true;
    let mut iterations = 0;
    let mut converged = threshold.is_none();
    while iterations < budget {
        let next = backup_values(model, &v, alpha);
        iterations += 1;
        monotone &= v.le(&next);
        let change = sup_change(&v, &next);
        v = next;
        if let Some(th) = threshold {
            if change <= th {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NotConverged { iterations });
    }
    let residual = residual(model, &v, alpha);
    Ok(InfiniteHorizon { value: v, iterations, residual, monotone })
}

/// Largest change over states whose new value is finite.
fn sup_change(old: &[ExtNonnegReal], new: &[ExtNonnegReal]) -> f64 {
    old.iter()
        .zip(new)
        .filter(|(_, n)| n.is_finite())
        .map(|(o, n)| (n.get() - o.get()).abs())
        .fold(0.0, f64::max)
}

/// `sup_x |v(x) - (Tv)(x)|` over finite-valued states.
pub fn residual(model: &MdpModel, v: &[ExtNonnegReal], alpha: Discount) -> f64 {
    let backed = backup_values(model, v, alpha);
    v.iter()
        .zip(backed.iter())
        .filter(|(x, _)| x.is_finite())
        .map(|(x, t)| if t.is_finite() { (x.get() - t.get()).abs() } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

/// Greedy stationary policy for a (near) fixed point `v`.
///
/// The argmin sets hold every action within `tol` of the minimum; the policy
/// takes the first exact minimiser. Fails if `v` is not a fixed point within
/// `tol`.
pub fn stationary_from_value(
    model: &MdpModel,
    v: &[ExtNonnegReal],
    alpha: Discount,
    tol: f64,
) -> Result<(StationaryPolicy, ArgminSets)> {
    assert_eq!(v.len(), model.num_states(), "value function must be total on the model's states");
    let mut policy = Vec::with_capacity(v.len());
    let mut sets = Vec::with_capacity(v.len());
    let mut worst: Option<(usize, f64)> = None;
    for x in 0..model.num_states() {
        let etas = etas_at(model, v, alpha, x);
        let (first, best) = argmin_first(etas.iter().copied()).expect("nonempty action set");
        if v[x].is_finite() {
            let r = if best.is_finite() { (v[x].get() - best.get()).abs() } else { f64::INFINITY };
            if worst.is_none_or(|(_, w)| r > w) {
                worst = Some((x, r));
            }
        }
        policy.push(first);
        sets.push(if best.is_infinite() {
            (0..etas.len()).collect()
        } else {
            (0..etas.len()).filter(|&a| etas[a].get() <= best.get() + tol).collect()
        });
    }
    if let Some((x, r)) = worst {
        if r > tol {
            return Err(Error::ResidualTooLarge { state: model.label(x).to_owned(), residual: r, tol });
        }
    }
    Ok((StationaryPolicy(policy), sets))
}

/// Expected total α-discounted cost of a stationary policy, exactly (see
/// [`InducedChain::discounted`]).
pub fn evaluate_policy(model: &MdpModel, policy: &StationaryPolicy, alpha: Discount) -> Result<ValueFn> {
    Ok(ValueFn(InducedChain::new(model, policy)?.discounted(alpha.get())))
}
