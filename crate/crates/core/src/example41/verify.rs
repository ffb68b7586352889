//! The separating verdict: along `γ⁽ⁿ⁾` the relative value at `0` grows at
//! least like `n`, while along `α⁽ⁿ⁾` it stays at most 1.

use serde::{Deserialize, Serialize};

use super::closed::{branch_excess, closed_form_m};
use super::params::derive_params;
use super::real::Real;
use super::sequence::{BranchSequence, Truncation};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: u64,
    pub alpha: f64,
    pub gamma: f64,
    /// Lower bound on `u_{γ⁽ⁿ⁾}(0)`.
    pub u_gamma: f64,
    /// Upper bound on `u_{α⁽ⁿ⁾}(0)`.
    pub u_alpha: f64,
    pub m_alpha: f64,
    /// Largest `|(1 - α⁽ⁿ⁾) m - 1|` over the certified interval for `m_{α⁽ⁿ⁾}`.
    pub abel_gap: f64,
    pub gamma_ok: bool,
    pub alpha_ok: bool,
    pub abel_ok: bool,
}

/// Worst `v_α(ñ,k̃) - v_α(0) - N(ñ)` over the sampled points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementCheck {
    pub checked: usize,
    pub worst_margin: f64,
    pub worst_alpha: f64,
    pub worst_state: String,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop42Report {
    pub tol: f64,
    pub rows: Vec<GapRow>,
    pub increments: IncrementCheck,
    /// `|u_{γ⁽¹⁾}(0) - g_{α⁽¹⁾,1}(γ⁽¹⁾)|`; the two are the same quantity.
    pub g_identity_error: f64,
    pub g_identity_ok: bool,
    pub truncated: Option<Truncation>,
}

impl Prop42Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.gamma_ok && r.alpha_ok && r.abel_ok) && self.increments.ok && self.g_identity_ok
    }
}

/// Tolerances for [`verify_prop42`]. The defaults are the values the
/// acceptance criteria use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop42Tolerances {
    pub gamma: f64,
    pub alpha: f64,
    pub increment: f64,
    pub identity: f64,
    pub tail: f64,
}

impl Default for Prop42Tolerances {
    fn default() -> Self {
        Self { gamma: 1e-6, alpha: 1e-9, increment: 1e-9, identity: 1e-12, tail: 1e-15 }
    }
}

pub fn gap_row<R: Real>(seq: &BranchSequence<R>, n: u64, tol: &Prop42Tolerances) -> Result<GapRow> {
    let b = seq.branch(n).ok_or_else(|| Error::InvalidParameter(format!("branch {n} not generated")))?;
    let one = R::one();
    let at_gamma = closed_form_m(seq, &b.gamma, tol.tail)?;
    let at_alpha = closed_form_m(seq, &b.alpha, tol.tail)?;
    let u_gamma = at_gamma.sup_generated.clone();
    let u_alpha = at_alpha.sup_upper();
    let scale = one.clone() - b.alpha.clone();
    let abel = |m: &R| (scale.clone() * m.clone() - one.clone()).abs();
    let abel_gap = R::max_of(abel(&at_alpha.lower), abel(&at_alpha.upper));
    let abel_bound = R::from_f64(0.5f64.powi(n.min(1000) as i32));
    Ok(GapRow {
        n,
        alpha: b.alpha.to_f64(),
        gamma: b.gamma.to_f64(),
        gamma_ok: u_gamma >= R::from_u64(n) - R::from_f64(tol.gamma),
        alpha_ok: u_alpha <= one.clone() + R::from_f64(tol.alpha),
        abel_ok: abel_gap <= abel_bound,
        u_gamma: u_gamma.to_f64(),
        u_alpha: u_alpha.to_f64(),
        m_alpha: at_alpha.upper.to_f64(),
        abel_gap: abel_gap.to_f64(),
    })
}

/// The gap table alone, for every generated branch.
pub fn gap_table<R: Real>(seq: &BranchSequence<R>, tol: &Prop42Tolerances) -> Result<Vec<GapRow>> {
    seq.branches.iter().map(|b| gap_row(seq, b.n, tol)).collect()
}

fn sample_ks(big_n: u64) -> Vec<u64> {
    let mut ks = vec![1, big_n / 2, big_n, big_n + 1, big_n + big_n / 2, 2 * big_n];
    ks.retain(|&k| k >= 1);
    ks.dedup();
    ks
}

pub fn verify_prop42<R: Real>(seq: &BranchSequence<R>, tol: &Prop42Tolerances) -> Result<Prop42Report> {
    if seq.len() < 2 {
        return Err(Error::InvalidParameter("need at least two branches".into()));
    }
    let rows = gap_table(seq, tol)?;

    let mut alphas: Vec<R> = seq.branches.iter().flat_map(|b| [b.alpha.clone(), b.gamma.clone()]).collect();
    alphas.extend([0.1, 0.5, 0.9, 0.99].map(R::from_f64));
    let mut increments =
        IncrementCheck { checked: 0, worst_margin: f64::NEG_INFINITY, worst_alpha: 0.0, worst_state: String::new(), ok: true };
    for a in &alphas {
        for b in &seq.branches {
            for k in sample_ks(b.big_n) {
                let margin = (branch_excess(b, a, k) - R::from_u64(b.big_n)).to_f64();
                increments.checked += 1;
                if margin > increments.worst_margin {
                    increments.worst_margin = margin;
                    increments.worst_alpha = a.to_f64();
                    increments.worst_state = format!("({},{k})", b.n);
                }
            }
        }
    }
    increments.ok = increments.worst_margin <= tol.increment;

    let first = &seq.branches[0];
    let g = derive_params(&first.alpha, &R::one(), u64::MAX)?.g(&first.gamma);
    let u = closed_form_m(seq, &first.gamma, tol.tail)?.sup_generated;
    let g_identity_error = (u - g).abs().to_f64();

    Ok(Prop42Report {
        tol: tol.gamma,
        rows,
        increments,
        g_identity_ok: g_identity_error <= tol.identity,
        g_identity_error,
        truncated: seq.truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example41::params::DEFAULT_BRANCH_CAP;
    use crate::example41::real::Extended;
    use crate::example41::sequence::generate_sequence;

    fn seq3() -> BranchSequence<Extended> {
        generate_sequence(&Extended::from_f64(0.5), 3, DEFAULT_BRANCH_CAP).unwrap()
    }

    #[test]
    fn gap_table_matches_reference() {
        // (n, u_γ(0), u_α(0), m_α) from tests/oracles/example41_mpmath.py.
        let want = [
            (1, 1.559169814066027653, 0.98443603515625, 1.01556396484375),
            (2, 2.668634376589845630, 0.997611035639009858, 20.31048831590469420),
            (3, 4.000450415312258812, 0.999899019836083404, 847.4127986374407618),
        ];
        let rows = gap_table(&seq3(), &Prop42Tolerances::default()).unwrap();
        for (row, (n, ug, ua, m)) in rows.iter().zip(want) {
            assert_eq!(row.n, n);
            assert!((row.u_gamma - ug).abs() < 1e-14, "{row:?}");
            assert!((row.u_alpha - ua).abs() < 1e-14, "{row:?}");
            assert!((row.m_alpha - m).abs() / m < 1e-14, "{row:?}");
        }
    }

    #[test]
    fn verdict_passes_for_three_branches() {
        let r = verify_prop42(&seq3(), &Prop42Tolerances::default()).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert!(r.g_identity_error < 1e-30);
        assert!(r.increments.checked > 0);
    }

    #[test]
    fn double_precision_rows_still_pass() {
        let d = generate_sequence(&0.5f64, 3, DEFAULT_BRANCH_CAP).unwrap();
        let rows = gap_table(&d, &Prop42Tolerances::default()).unwrap();
        assert!(rows.iter().all(|r| r.gamma_ok && r.alpha_ok));
    }

    #[test]
    fn needs_two_branches() {
        let s = generate_sequence(&Extended::from_f64(0.5), 1, DEFAULT_BRANCH_CAP).unwrap();
        assert!(verify_prop42(&s, &Prop42Tolerances::default()).is_err());
    }
}
