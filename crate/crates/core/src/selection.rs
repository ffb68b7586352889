//! Parametric minimisation `v(x) = min_{a ∈ A(x)} u(x, a)` over finite
//! feasible sets.
//!
//! Objectives take values in `ℝ ∪ {+∞}`. The minimum is attained on every
//! state; states where it is `+∞` fall outside `dom(v)` and get no optimal
//! selector. [`total_selector`] extends the selector to all states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;

/// First index attaining the minimum. `None` only for an empty input.
pub fn argmin_first<T: PartialOrd + Copy>(values: impl IntoIterator<Item = T>) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(v < b) => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParametricObjective {
    states: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl ParametricObjective {
    /// `values[x][a]` is `u(x, a)` for the `a`-th feasible action of state `x`.
    pub fn new(states: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if states.len() != values.len() {
            return Err(Error::InvalidParameter("one feasible list per state".into()));
        }
        for (s, row) in states.iter().zip(&values) {
            if row.is_empty() {
                return Err(Error::InvalidParameter(format!("state {s:?} has no feasible action")));
            }
            if row.iter().any(|u| u.is_nan() || *u == f64::NEG_INFINITY) {
                return Err(Error::NegativeInfinity { state: s.clone() });
            }
        }
        Ok(Self { states, values })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn values(&self, state: usize) -> &[f64] {
        &self.values[state]
    }

    pub fn is_real_valued(&self) -> bool {
        self.values.iter().flatten().all(|u| u.is_finite())
    }
}

/// Which extension rule produced the total selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverCase {
    /// Some states lie outside `dom(v)`; the fallback was used there.
    Fallback,
    /// `v` is finite everywhere.
    FiniteValue,
    /// The objective itself is real-valued.
    RealValued,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub v: Vec<f64>,
    pub in_domain: Vec<bool>,
    /// Optimal action on `dom(v)`, `None` elsewhere.
    pub selector: Vec<Option<usize>>,
    pub total: Option<Vec<usize>>,
    pub cover: Option<CoverCase>,
    states: Vec<String>,
    arity: Vec<usize>,
    real_valued: bool,
}

impl SelectionResult {
    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.in_domain.iter().enumerate().filter(|(_, &d)| d).map(|(x, _)| x)
    }

    pub fn domain_is_full(&self) -> bool {
        self.in_domain.iter().all(|&d| d)
    }
}

pub fn parametric_min(obj: &ParametricObjective) -> SelectionResult {
    let mins = parallel::map_indexed(obj.states.len(), |x| {
        argmin_first(obj.values[x].iter().copied()).expect("nonempty feasible set")
    });
    let v: Vec<f64> = mins.iter().map(|&(_, m)| m).collect();
    let in_domain: Vec<bool> = v.iter().map(|m| *m < f64::INFINITY).collect();
    let selector = mins
        .iter()
        .zip(&in_domain)
        .map(|(&(a, _), &d)| d.then_some(a))
        .collect();
    SelectionResult {
        v,
        in_domain,
        selector,
        total: None,
        cover: None,
        states: obj.states.clone(),
        arity: obj.values.iter().map(Vec::len).collect(),
        real_valued: obj.is_real_valued(),
    }
}

/// Extends `result.selector` to every state.
///
/// When `dom(v)` already covers the state space the fallback is never
/// called; otherwise `fallback(x)` must be feasible at each `x ∉ dom(v)`.
pub fn total_selector(
    mut result: SelectionResult,
    fallback: impl Fn(usize) -> usize,
) -> Result<SelectionResult> {
    let cover = if result.real_valued {
        CoverCase::RealValued
    } else if result.domain_is_full() {
        CoverCase::FiniteValue
    } else {
        CoverCase::Fallback
    };
    let mut total = Vec::with_capacity(result.selector.len());
    for (x, sel) in result.selector.iter().enumerate() {
        let a = match sel {
            Some(a) => *a,
            None => {
                let a = fallback(x);
                if a >= result.arity[x] {
                    return Err(Error::FallbackInfeasible { state: result.states[x].clone() });
                }
                a
            }
        };
        total.push(a);
    }
    result.total = Some(total);
    result.cover = Some(cover);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn singleton_feasible_sets() {
        let obj = ParametricObjective::new(names(3), vec![vec![2.0], vec![-1.5], vec![f64::INFINITY]]).unwrap();
        let r = parametric_min(&obj);
        assert_eq!(r.v[..2], [2.0, -1.5]);
        assert_eq!(r.selector, vec![Some(0), Some(0), None]);
    }

    #[test]
    fn infinite_states_leave_the_domain() {
        let inf = f64::INFINITY;
        let obj = ParametricObjective::new(names(2), vec![vec![3.0, 1.0], vec![inf, inf]]).unwrap();
        let r = parametric_min(&obj);
        assert_eq!(r.domain().collect::<Vec<_>>(), vec![0]);
        assert_eq!(r.selector, vec![Some(1), None]);

        let total = total_selector(r, |_| 0).unwrap();
        assert_eq!(total.total, Some(vec![1, 0]));
        assert_eq!(total.cover, Some(CoverCase::Fallback));
    }

    #[test]
    fn grid_minimiser_matches_exhaustive_scan() {
        let grid: Vec<f64> = (0..11).map(|i| -1.0 + 0.2 * i as f64).collect();
        let x = 0.37;
        let values: Vec<f64> = grid.iter().map(|a| (a - x) * (a - x)).collect();
        let obj = ParametricObjective::new(names(1), vec![values.clone()]).unwrap();
        let r = parametric_min(&obj);
        // Exhaustive scan: |a - 0.37| is smallest at a = 0.4 (distance 0.03).
        let best = (0..11).min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap()).unwrap();
        assert_eq!(r.selector[0], Some(best));
        assert!((grid[best] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn fallback_unused_when_domain_is_full() {
        let obj = ParametricObjective::new(names(2), vec![vec![1.0, f64::INFINITY], vec![0.0]]).unwrap();
        let r = total_selector(parametric_min(&obj), |_| panic!("fallback consulted")).unwrap();
        assert_eq!(r.cover, Some(CoverCase::FiniteValue));
        assert_eq!(r.total, Some(vec![0, 0]));
    }

    #[test]
    fn real_valued_objective_is_detected() {
        // Five states with pseudo-random finite values: case (iv), total = partial.
        let values: Vec<Vec<f64>> = (0..5)
            .map(|x| (0..4).map(|a| ((x * 7 + a * 13) % 11) as f64 - 3.0).collect())
            .collect();
        assert!(values.iter().flatten().all(|u| u.is_finite()));
        let obj = ParametricObjective::new(names(5), values).unwrap();
        let r = total_selector(parametric_min(&obj), |_| 0).unwrap();
        assert_eq!(r.cover, Some(CoverCase::RealValued));
        let partial: Vec<usize> = r.selector.iter().map(|s| s.unwrap()).collect();
        assert_eq!(r.total.unwrap(), partial);
    }

    #[test]
    fn infeasible_fallback_names_the_state() {
        let obj = ParametricObjective::new(names(2), vec![vec![1.0], vec![f64::INFINITY]]).unwrap();
        match total_selector(parametric_min(&obj), |_| 3) {
            Err(Error::FallbackInfeasible { state }) => assert_eq!(state, "s1"),
            other => panic!("expected error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_infinity() {
        assert!(ParametricObjective::new(names(1), vec![vec![f64::NEG_INFINITY]]).is_err());
        assert!(ParametricObjective::new(names(1), vec![vec![]]).is_err());
    }

    #[test]
    fn ties_go_to_first_declared() {
        assert_eq!(argmin_first([2.0, 1.0, 1.0, 3.0]), Some((1, 1.0)));
        assert_eq!(argmin_first::<f64>([]), None);
    }

    fn objective() -> impl Strategy<Value = Vec<Vec<f64>>> {
        let value = prop_oneof![8 => (-20i32..20).prop_map(|k| k as f64 * 0.5), 1 => Just(f64::INFINITY)];
        prop::collection::vec(prop::collection::vec(value, 1..6), 1..8)
    }

    proptest! {
        #[test]
        fn selector_is_optimal(values in objective()) {
            let obj = ParametricObjective::new(names(values.len()), values.clone()).unwrap();
            let r = parametric_min(&obj);
            for x in 0..values.len() {
                prop_assert_eq!(r.in_domain[x], r.v[x] < f64::INFINITY);
                if let Some(a) = r.selector[x] {
                    prop_assert_eq!(values[x][a], r.v[x]);
                    prop_assert!(values[x].iter().all(|&u| r.v[x] <= u));
                }
            }
        }

        #[test]
        fn shift_leaves_selector_unchanged(values in objective(), kappa in -10i32..10) {
            let kappa = kappa as f64 * 0.25;
            let shifted: Vec<Vec<f64>> = values.iter().map(|r| r.iter().map(|u| u + kappa).collect()).collect();
            let a = parametric_min(&ParametricObjective::new(names(values.len()), values).unwrap());
            let b = parametric_min(&ParametricObjective::new(names(shifted.len()), shifted).unwrap());
            prop_assert_eq!(&a.selector, &b.selector);
            for x in a.domain() {
                prop_assert_eq!(a.v[x] + kappa, b.v[x]);
            }
        }

        #[test]
        fn removing_unselected_action_is_harmless(values in objective(), pick in 0usize..64) {
            let obj = ParametricObjective::new(names(values.len()), values.clone()).unwrap();
            let r = parametric_min(&obj);
            let x = pick % values.len();
            let chosen = r.selector[x].unwrap_or(0);
            let Some(drop) = (0..values[x].len()).find(|&a| a != chosen) else { return Ok(()); };
            let mut reduced = values.clone();
            reduced[x].remove(drop);
            let r2 = parametric_min(&ParametricObjective::new(names(reduced.len()), reduced).unwrap());
            prop_assert_eq!(r2.v[x], r.v[x]);
            if let Some(a) = r.selector[x] {
                let shifted = if drop < a { a - 1 } else { a };
                prop_assert_eq!(r2.selector[x], Some(shifted));
            }
        }
    }
}
