//! Closed-form discounted values and their state infimum.
//!
//! Only one policy exists, so `v_α` is a path sum. Writing `V = 1/(1-α)`,
//! for `k ≤ N`
//!
//! ```text
//! v_α(n,k) = V + ε [(1 - α^N) α^{N-k+1} - (1 - α^{N-k+1})] / (1 - α)
//! ```
//!
//! and for `k > N`, `v_α(n,k) = V + ε (1 - α^{2N-k+1}) / (1 - α)`. All
//! quantities are computed as offsets from `V` so nothing of size `V` is ever
//! subtracted.

use serde::{Deserialize, Serialize};

use super::model::{ExampleState, StateLayout};
use super::real::Real;
use super::sequence::{BranchParams, BranchSequence};
use crate::avgcost::{AnalyticPoint, AnalyticValues};
use crate::error::{Error, Result};
use crate::parallel::map_indexed;

/// `v_α(n,k) - v_α(0)`.
pub fn branch_excess<R: Real>(b: &BranchParams<R>, alpha: &R, k: u64) -> R {
    let one = R::one();
    let scale = b.eps.clone() / (one.clone() - alpha.clone());
    if k <= b.big_n {
        let tail = alpha.powu(b.big_n - k + 1);
        let rise = one.clone() - alpha.powu(b.big_n);
        scale * (rise * tail.clone() - (one - tail))
    } else {
        scale * (one - alpha.powu(2 * b.big_n - k + 1))
    }
}

/// `ε⁽ⁿ⁾ (1 - α^{N(n)})² / (1 - α) = v_α(0) - v_α(n,1)`.
pub fn sup_term<R: Real>(b: &BranchParams<R>, alpha: &R) -> R {
    let one = R::one();
    let rise = one.clone() - alpha.powu(b.big_n);
    b.eps.clone() * rise.clone() * rise / (one - alpha.clone())
}

fn check_alpha<R: Real>(alpha: &R) -> Result<()> {
    if *alpha >= R::zero() && *alpha < R::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha = {alpha:?} must lie in [0, 1)")))
    }
}

/// `v_α(state) - 1/(1-α)`; errors for states outside the generated branches.
pub fn closed_form_excess<R: Real>(seq: &BranchSequence<R>, alpha: &R, state: ExampleState) -> Result<R> {
    check_alpha(alpha)?;
    match state {
        ExampleState::Zero => Ok(R::zero()),
        ExampleState::Branch { n, k } => {
            let b = seq.branch(n).filter(|b| (1..=2 * b.big_n).contains(&k));
            let b = b.ok_or_else(|| Error::UnknownState(state.to_string()))?;
            Ok(branch_excess(b, alpha, k))
        }
    }
}

pub fn closed_form_v<R: Real>(seq: &BranchSequence<R>, alpha: &R, state: ExampleState) -> Result<R> {
    let base = R::one() / (R::one() - alpha.clone());
    Ok(base + closed_form_excess(seq, alpha, state)?)
}

/// The infimum `m_α = 1/(1-α) - S` where `S` is the sup of [`sup_term`]
/// over all branches, generated or not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfimumBound<R> {
    /// Sup over the generated branches; a lower bound on `S`.
    pub sup_generated: R,
    /// Branch attaining `sup_generated`.
    pub argmax: u64,
    /// Bound on every term beyond the generated branches.
    pub tail_bound: R,
    /// `m_α` from the generated branches alone, an upper bound on `m_α`.
    pub upper: R,
    /// Certified lower bound on `m_α`.
    pub lower: R,
    /// Set when `upper - lower` exceeds the requested tolerance.
    pub widened: bool,
}

impl<R: Real> InfimumBound<R> {
    pub fn width(&self) -> R {
        self.upper.clone() - self.lower.clone()
    }

    /// Upper bound on `S`, so on `u_α(0) = v_α(0) - m_α`.
    pub fn sup_upper(&self) -> R {
        R::max_of(self.sup_generated.clone(), self.tail_bound.clone())
    }
}

/// Branches past the last generated one have `ε⁽ʲ⁾ ≤ ε⁽ᴸ⁺¹⁾ = 1 - α⁽ᴸ⁺¹⁾`
/// (the `α⁽ʲ⁾` increase) and `ε⁽ʲ⁾ ≤ 2⁻ʲ`, and each term is at most
/// `ε⁽ʲ⁾/(1-α)`. When that bound is below the generated sup the infimum is
/// exact.
pub fn closed_form_m<R: Real>(seq: &BranchSequence<R>, alpha: &R, tail_tol: f64) -> Result<InfimumBound<R>> {
    check_alpha(alpha)?;
    let next = seq.next_eps().ok_or_else(|| Error::InvalidParameter("empty branch sequence".into()))?;
    let one = R::one();
    let base = one.clone() / (one.clone() - alpha.clone());
    let (argmax, sup_generated) = seq
        .branches
        .iter()
        .map(|b| (b.n, sup_term(b, alpha)))
        .fold(None::<(u64, R)>, |acc, (n, t)| match acc {
            Some((_, ref best)) if !(t > *best) => acc,
            _ => Some((n, t)),
        })
        .expect("nonempty sequence");
    let two_pow = R::from_f64(0.5f64.powi((seq.len() + 1).min(1000) as i32));
    let tail_bound = R::min_of(next, two_pow) / (one - alpha.clone());
    let upper = base.clone() - sup_generated.clone();
    let lower = base - R::max_of(sup_generated.clone(), tail_bound.clone());
    let widened = (upper.clone() - lower.clone()) > R::from_f64(tail_tol);
    Ok(InfimumBound { sup_generated, argmax, tail_bound, upper, lower, widened })
}

/// Closed-form values over the states of [`super::build_model`], for sweeps.
///
/// `m` is reported from the generated branches, so that `u = v - m ≥ 0` on
/// every materialized state; the certified width goes with it.
#[derive(Clone, Debug)]
pub struct ClosedForms<R> {
    seq: BranchSequence<R>,
    layout: StateLayout,
    tail_tol: f64,
}

impl<R: Real> ClosedForms<R> {
    pub fn new(seq: BranchSequence<R>, tail_tol: f64) -> Self {
        let layout = StateLayout::new(&seq);
        Self { seq, layout, tail_tol }
    }

    pub fn sequence(&self) -> &BranchSequence<R> {
        &self.seq
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }
}

impl<R: Real> AnalyticValues for ClosedForms<R> {
    fn num_states(&self) -> usize {
        self.layout.num_states()
    }

    fn at(&self, alpha: f64) -> Result<AnalyticPoint> {
        let a = R::from_f64(alpha);
        let m = closed_form_m(&self.seq, &a, self.tail_tol)?;
        let one = R::one();
        let base = one.clone() / (one - a.clone());
        let excess: Vec<R> = map_indexed(self.layout.num_states(), |i| {
            let s = self.layout.state(i).expect("index within layout");
            closed_form_excess(&self.seq, &a, s).expect("state within layout")
        });
        Ok(AnalyticPoint {
            v: excess.iter().map(|e| (base.clone() + e.clone()).to_f64()).collect(),
            u: excess.iter().map(|e| (e.clone() + m.sup_generated.clone()).to_f64()).collect(),
            m: m.upper.to_f64(),
            m_width: m.width().to_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example41::params::DEFAULT_BRANCH_CAP;
    use crate::example41::real::Extended;
    use crate::example41::sequence::generate_sequence;

    fn x(v: f64) -> Extended {
        Extended::from_f64(v)
    }

    fn seq(n: u64) -> BranchSequence<Extended> {
        generate_sequence(&x(0.5), n, DEFAULT_BRANCH_CAP).unwrap()
    }

    /// Direct path sum with the absorbing tail summed in closed form.
    fn path_sum(b: &BranchParams<Extended>, alpha: &Extended, k: u64) -> Extended {
        let mut total = x(0.0);
        let mut disc = x(1.0);
        for j in k..=2 * b.big_n {
            let c = if j <= b.big_n { x(1.0) - b.eps.clone() } else { x(1.0) + b.eps.clone() };
            total = total + disc.clone() * c;
            disc = disc * alpha.clone();
        }
        total + disc / (x(1.0) - alpha.clone())
    }

    #[test]
    fn state_zero() {
        let s = seq(1);
        assert_eq!(closed_form_v(&s, &x(0.5), ExampleState::Zero).unwrap(), x(2.0));
    }

    #[test]
    fn matches_path_sums() {
        let s = seq(2);
        for a in [0.0, 0.3, 0.5, 0.9, 0.99] {
            let a = x(a);
            for b in &s.branches {
                for k in 1..=2 * b.big_n {
                    let got = closed_form_v(&s, &a, ExampleState::Branch { n: b.n, k }).unwrap();
                    let want = path_sum(b, &a, k);
                    assert!(((got - want.clone()) / want).abs() < x(1e-32), "n={} k={k}", b.n);
                }
            }
        }
    }

    #[test]
    fn value_ordering_along_a_branch() {
        let s = seq(2);
        for a in [0.5, 0.9, 0.999] {
            let a = x(a);
            let v0 = closed_form_v(&s, &a, ExampleState::Zero).unwrap();
            for b in &s.branches {
                let first = closed_form_v(&s, &a, ExampleState::Branch { n: b.n, k: 1 }).unwrap();
                assert!(first < v0);
                for k in 1..=b.big_n {
                    let up = closed_form_v(&s, &a, ExampleState::Branch { n: b.n, k: b.big_n + k }).unwrap();
                    assert!(v0 < up);
                }
            }
        }
    }

    #[test]
    fn infimum_at_one_half() {
        let s = seq(3);
        let m = closed_form_m(&s, &x(0.5), 1e-15).unwrap();
        assert!(!m.widened);
        assert_eq!(m.argmax, 1);
        let want = Extended::parse("1.01556396484375").unwrap();
        assert!((m.upper.clone() - want).abs() < x(1e-30), "{m:?}");
        assert_eq!(m.upper, m.lower);
        for b in &s.branches {
            let v = closed_form_v(&s, &x(0.5), ExampleState::Branch { n: b.n, k: 1 }).unwrap();
            assert!(m.upper <= v);
        }
    }

    #[test]
    fn infimum_is_nondecreasing_in_alpha() {
        let s = seq(3);
        let grid: Vec<f64> = (1..40).map(|i| 1.0 - 0.5f64.powf(i as f64 / 3.0)).collect();
        // `upper` is the infimum over the materialized states, itself a model.
        let ms: Vec<Extended> = grid.iter().map(|&a| closed_form_m(&s, &x(a), 1.0).unwrap().upper).collect();
        assert!(ms.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn short_sequences_widen_near_one() {
        let s = seq(1);
        // One branch: past α⁽²⁾ the generated term collapses, the tail bound does not.
        let m = closed_form_m(&s, &x(0.999), 1e-15).unwrap();
        assert!(m.widened);
        assert!(m.lower < m.upper);
    }

    #[test]
    fn rejects_foreign_states_and_alphas() {
        let s = seq(1);
        assert!(closed_form_v(&s, &x(0.5), ExampleState::Branch { n: 2, k: 1 }).is_err());
        assert!(closed_form_v(&s, &x(0.5), ExampleState::Branch { n: 1, k: 15 }).is_err());
        assert!(closed_form_v(&s, &x(1.0), ExampleState::Zero).is_err());
    }

    #[test]
    fn analytic_point_is_consistent() {
        let cf = ClosedForms::new(seq(2), 1e-15);
        let p = cf.at(0.9).unwrap();
        assert_eq!(p.v.len(), cf.num_states());
        assert!(p.u.iter().all(|&u| u >= 0.0));
        let min_v = p.v.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min_v - p.m).abs() < 1e-12);
    }
}
