//! The branch recursion: `α⁽¹⁾` is given, and branch `n` uses `M = n`, so
//! `ε⁽ⁿ⁾ = 1 - α⁽ⁿ⁾`, `γ⁽ⁿ⁾ = γ_{α⁽ⁿ⁾,n}`, `N(n) = n*_{α⁽ⁿ⁾,n}` and
//! `α⁽ⁿ⁺¹⁾ = δ_{α⁽ⁿ⁾,n}`.

use serde::{Deserialize, Serialize};

use super::params::derive_params;
use super::real::Real;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchParams<R> {
    pub n: u64,
    pub alpha: R,
    pub eps: R,
    pub gamma: R,
    pub big_n: u64,
    pub alpha_next: R,
}

impl<R: Real> BranchParams<R> {
    /// `1 - 2⁻ⁿ ≤ α⁽ⁿ⁾ < γ⁽ⁿ⁾ < α⁽ⁿ⁺¹⁾ < 1`, `ε⁽ⁿ⁾ = 1 - α⁽ⁿ⁾`, `N(n) ≥ 1`.
    pub fn invariants_hold(&self) -> bool {
        let one = R::one();
        let floor = one.clone() - R::from_f64(0.5f64.powi(self.n.min(1000) as i32));
        floor <= self.alpha
            && self.alpha < self.gamma
            && self.gamma < self.alpha_next
            && self.alpha_next < one
            && self.eps == R::one() - self.alpha.clone()
            && self.big_n >= 1
    }
}

/// Where generation stopped early: branch `n` would need `N(n) = n_star`
/// states per half, above the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub n: u64,
    pub n_star: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSequence<R> {
    pub branches: Vec<BranchParams<R>>,
    pub truncated: Option<Truncation>,
}

impl<R: Real> BranchSequence<R> {
    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn branch(&self, n: u64) -> Option<&BranchParams<R>> {
        usize::try_from(n).ok().and_then(|n| n.checked_sub(1)).and_then(|i| self.branches.get(i))
    }

    /// `ε` of the first branch not in the sequence, `1 - α⁽ᴸ⁺¹⁾`.
    pub fn next_eps(&self) -> Option<R> {
        self.branches.last().map(|b| R::one() - b.alpha_next.clone())
    }

    /// Keeps only the first `n` branches.
    pub fn prefix(&self, n: usize) -> Self {
        Self { branches: self.branches[..n.min(self.len())].to_vec(), truncated: None }
    }

    /// `{α⁽ⁿ⁾} ∪ {γ⁽ⁿ⁾}` in increasing order, rounded to double.
    pub fn adversarial_grid(&self) -> Vec<f64> {
        self.branches.iter().flat_map(|b| [b.alpha.to_f64(), b.gamma.to_f64()]).collect()
    }

    pub fn alpha_grid(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.alpha.to_f64()).collect()
    }

    pub fn gamma_grid(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.gamma.to_f64()).collect()
    }
}

/// Generates branches `1..=n_max`. A branch whose `N(n)` exceeds `cap` ends
/// the sequence; the result then records it in `truncated`.
pub fn generate_sequence<R: Real>(alpha1: &R, n_max: u64, cap: u64) -> Result<BranchSequence<R>> {
    if !(*alpha1 >= R::from_f64(0.5) && *alpha1 < R::one()) {
        return Err(Error::InvalidParameter(format!("alpha1 = {alpha1:?} must lie in [0.5, 1)")));
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter("need at least one branch".into()));
    }
    let mut branches = Vec::new();
    let mut alpha = alpha1.clone();
    for n in 1..=n_max {
        let p = match derive_params(&alpha, &R::from_u64(n), cap) {
            Ok(p) => p,
            Err(Error::BranchTooLong { n_star, .. }) => {
                return Ok(BranchSequence { branches, truncated: Some(Truncation { n, n_star }) });
            }
            Err(e) => return Err(e),
        };
        let next = p.delta.clone();
        branches.push(BranchParams { n, alpha, eps: p.eps, gamma: p.gamma, big_n: p.n_star, alpha_next: p.delta });
        alpha = next;
    }
    Ok(BranchSequence { branches, truncated: None })
}
