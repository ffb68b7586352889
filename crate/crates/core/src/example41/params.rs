//! The parameter maps `(β, M) ↦ (ε, γ, n*, δ)` and the bump function
//! `g_{β,M}(α) = ε (1 - α^{n*})² / (1 - α)`.
//!
//! `g` is at most 1 on `(0, β]` and on `[δ, 1)` but reaches `M` at `α = γ`.

use serde::{Deserialize, Serialize};

use super::real::Real;
use crate::error::{Error, Result};

/// Default cap on `n*`, i.e. on the length of one half-branch.
pub const DEFAULT_BRANCH_CAP: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamTuple<R> {
    pub eps: R,
    pub gamma: R,
    pub n_star: u64,
    pub delta: R,
}

pub fn derive_params<R: Real>(beta: &R, m: &R, cap: u64) -> Result<ParamTuple<R>> {
    let one = R::one();
    let two = R::from_f64(2.0);
    if !(*beta > R::zero() && *beta < one) {
        return Err(Error::InvalidParameter(format!("beta = {beta:?} must lie in (0, 1)")));
    }
    if !(*m > R::zero()) {
        return Err(Error::InvalidParameter(format!("M = {m:?} must be positive")));
    }
    let eps = one.clone() - beta.clone();
    let gamma = R::max_of(
        (beta.clone() + one.clone()) / two.clone(),
        one.clone() - eps.clone() / (R::from_f64(3.0) * m.clone()),
    );
    let target = R::min_of(R::from_f64(0.5), m.clone() * (one.clone() - gamma.clone()) / eps.clone());
    let quotient = target.ln() / gamma.ln() + R::from_f64(R::FLOOR_GUARD);
    let n_star = quotient
        .floor_u64()
        .and_then(|f| f.checked_add(1))
        .ok_or_else(|| Error::InvalidParameter(format!("log quotient {quotient:?} out of range")))?;
    if n_star > cap {
        return Err(Error::BranchTooLong { n_star, cap });
    }
    let n = R::from_u64(n_star);
    let base = one.clone() - one.clone() / (eps.clone() * n.clone());
    let midpoint = (gamma.clone() + one.clone()) / two;
    // A nonpositive base has no real n*-th root; small M with large ε can
    // produce it, and then only the midpoint candidate remains.
    let delta = if base > R::zero() {
        R::max_of(midpoint, base.powf(&(one / n)))
    } else {
        midpoint
    };
    Ok(ParamTuple { eps, gamma, n_star, delta })
}

impl<R: Real> ParamTuple<R> {
    pub fn g(&self, alpha: &R) -> R {
        let one = R::one();
        let rise = one.clone() - alpha.powu(self.n_star);
        self.eps.clone() * rise.clone() * rise / (one - alpha.clone())
    }

    /// `β < γ < δ < 1`, `n* ≥ 1` and `ε = 1 - β`.
    pub fn is_ordered(&self, beta: &R) -> bool {
        let one = R::one();
        *beta < self.gamma
            && self.gamma < self.delta
            && self.delta < one
            && self.n_star >= 1
            && self.eps == one - beta.clone()
    }
}

pub fn g<R: Real>(beta: &R, m: &R, alpha: &R, cap: u64) -> Result<R> {
    Ok(derive_params(beta, m, cap)?.g(alpha))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma43Report {
    pub beta: f64,
    pub m: f64,
    pub gamma: f64,
    pub delta: f64,
    pub n_star: u64,
    /// Largest sampled `g` on `(0, β]` and where it occurred.
    pub worst_low: (f64, f64),
    /// Largest sampled `g` on `[δ, 1)` and where it occurred.
    pub worst_high: (f64, f64),
    pub g_at_gamma: f64,
    pub low_ok: bool,
    pub high_ok: bool,
    pub peak_ok: bool,
}

impl Lemma43Report {
    pub fn passed(&self) -> bool {
        self.low_ok && self.high_ok && self.peak_ok
    }
}

/// Checks `g ≤ 1 + tol` on `samples` points of `(0, β]` (uniform, ending at
/// `β`) and of `[δ, 1)` (starting at `δ`, geometrically approaching 1 down
/// to a gap of `(1 - δ)·1e-8`), and `g(γ) ≥ M - tol`.
pub fn verify_lemma43<R: Real>(beta: &R, m: &R, samples: usize, tol: f64, cap: u64) -> Result<Lemma43Report> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample per interval".into()));
    }
    let p = derive_params(beta, m, cap)?;
    let one = R::one();
    let worst = |points: Vec<R>| {
        points
            .into_iter()
            .map(|a| (a.to_f64(), p.g(&a)))
            .fold(None::<(f64, R)>, |acc, (a, g)| match acc {
                Some((_, ref best)) if !(g > *best) => acc,
                _ => Some((a, g)),
            })
            .map(|(a, g)| (a, g.to_f64()))
            .expect("at least one sample")
    };
    let low: Vec<R> = (1..=samples)
        .map(|i| beta.clone() * R::from_u64(i as u64) / R::from_u64(samples as u64))
        .collect();
    let gap = one.clone() - p.delta.clone();
    let high: Vec<R> = (0..samples)
        .map(|i| {
            let frac = if samples == 1 { 0.0 } else { i as f64 / (samples - 1) as f64 };
            one.clone() - gap.clone() * R::from_f64(10f64.powf(-8.0 * frac))
        })
        .collect();
    let worst_low = worst(low);
    let worst_high = worst(high);
    let g_gamma = p.g(&p.gamma);
    let bound = R::from_f64(1.0 + tol);
    Ok(Lemma43Report {
        beta: beta.to_f64(),
        m: m.to_f64(),
        gamma: p.gamma.to_f64(),
        delta: p.delta.to_f64(),
        n_star: p.n_star,
        low_ok: R::from_f64(worst_low.1) <= bound,
        high_ok: R::from_f64(worst_high.1) <= bound,
        peak_ok: g_gamma >= m.clone() - R::from_f64(tol),
        worst_low,
        worst_high,
        g_at_gamma: g_gamma.to_f64(),
    })
}
