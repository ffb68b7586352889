//! Vanishing-discount analysis of average costs.
//!
//! A [`SweepTable`] holds `v_α`, `m_α = min_x v_α(x)` and `u_α = v_α - m_α`
//! on a finite grid of discount factors. Everything derived from it
//! (`U_β`, the limit `u`, the bounds `w̲ ≤ w̄`) is grid evidence: infima and
//! limits over `α ↑ 1` are replaced by their values on the grid.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::InducedChain;
use crate::dp::{eta, infinite_horizon, ArgminSets, Discount, StopRule};
use crate::error::{Error, Result};
use crate::ext::ExtNonnegReal;
use crate::model::{expect_under, MdpModel, StationaryPolicy, ValueFn};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_POLICY_CAP: u128 = 1 << 20;
/// Fraction of the grid, counted from the top, used for `w̲` and `w̄`.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
pub const GRID_EVIDENCE: &str = "grid evidence";

/// Strictly increasing discount factors in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscountGrid(Vec<f64>);

impl DiscountGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if let Some(bad) = points.iter().find(|a| !(0.0..1.0).contains(*a)) {
            return Err(Error::InvalidGrid(format!("{bad} is outside [0, 1)")));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!("not strictly increasing at {} ≥ {}", w[0], w[1])));
        }
        Ok(Self(points))
    }

    /// `1 - 2⁻ᵏ` for `k = 1..=levels`.
    pub fn geometric(levels: u32) -> Result<Self> {
        if !(1..=52).contains(&levels) {
            return Err(Error::InvalidGrid(format!("geometric grid needs 1..=52 levels, got {levels}")));
        }
        Self::new((1..=levels).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect())
    }

    /// Union with more points, sorted and deduplicated.
    pub fn union(&self, extra: &[f64]) -> Result<Self> {
        let mut all: Vec<f64> = self.0.iter().chain(extra).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        Self::new(all)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `geom:K` for [`DiscountGrid::geometric`], otherwise a comma-separated list.
impl FromStr for DiscountGrid {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(k) = spec.strip_prefix("geom:") {
            let k = k.trim().parse().map_err(|_| Error::InvalidGrid(format!("bad level count in {spec:?}")))?;
            return Self::geometric(k);
        }
        let points = spec
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::InvalidGrid(format!("bad grid point {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }
}

impl fmt::Display for DiscountGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Analytic `v_α`, `u_α` and `m_α` at one discount factor.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticPoint {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub m: f64,
    /// Certified width of the interval below `m` containing the true infimum.
    pub m_width: f64,
}

/// Models with known discounted values. The infimum may range over states
/// beyond the materialized ones, in which case the model supplies it with a
/// certificate.
pub trait AnalyticValues: Sync {
    fn num_states(&self) -> usize;
    fn at(&self, alpha: f64) -> Result<AnalyticPoint>;
}

#[derive(Clone, Copy)]
pub enum ValueSource<'a> {
    /// Value iteration to absolute accuracy `tol`.
    Dp { tol: f64 },
    ClosedForm(&'a dyn AnalyticValues),
}

impl fmt::Debug for ValueSource<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueSource::Dp { tol } => write!(f, "Dp {{ tol: {tol} }}"),
            ValueSource::ClosedForm(_) => f.write_str("ClosedForm"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub grid: Vec<f64>,
    pub labels: Vec<String>,
    pub v: Vec<ValueFn>,
    pub m: Vec<f64>,
    pub m_width: Vec<f64>,
    pub u: Vec<ValueFn>,
}

/// One output record `(α, state, v, m_α, u)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub state: String,
    pub v: ExtNonnegReal,
    pub m: f64,
    pub u: ExtNonnegReal,
}

impl SweepTable {
    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn records(&self) -> impl Iterator<Item = SweepRecord> + '_ {
        self.grid.iter().enumerate().flat_map(move |(i, &alpha)| {
            self.labels.iter().enumerate().map(move |(x, label)| SweepRecord {
                alpha,
                state: label.clone(),
                v: self.v[i][x],
                m: self.m[i],
                u: self.u[i][x],
            })
        })
    }

    /// `(1 - α) m_α` along the grid.
    pub fn scaled_m(&self) -> Vec<f64> {
        self.grid.iter().zip(&self.m).map(|(a, m)| (1.0 - a) * m).collect()
    }
}

fn dp_point(model: &MdpModel, alpha: f64, tol: f64) -> Result<(ValueFn, f64)> {
    let v = infinite_horizon(model, Discount::new(alpha)?, StopRule::SupNorm(tol))?.value;
    let m = v.iter().copied().min().expect("nonempty model");
    m.to_finite().map(|m| (v, m)).ok_or(Error::InfiniteOptimalValue(alpha))
}

/// Sweeps the grid, one independent solve per discount factor.
///
/// Truncated models need [`ValueSource::ClosedForm`]: over a window of a
/// larger state space the minimum of the computed values is not the
/// infimum, so the value source must certify it.
pub fn build_sweep(model: &MdpModel, grid: &DiscountGrid, source: ValueSource<'_>) -> Result<SweepTable> {
    let rows: Vec<(ValueFn, f64, f64, ValueFn)> = match source {
        ValueSource::Dp { tol } => {
            if model.is_truncated() {
                return Err(Error::MissingWitness);
            }
            let solved: Vec<Result<(ValueFn, f64)>> =
                grid.points().par_iter().map(|&a| dp_point(model, a, tol)).collect();
            solved
                .into_iter()
                .map(|r| {
                    let (v, m) = r?;
                    let u = ValueFn(v.iter().map(|x| relative(*x, m)).collect());
                    Ok((v, m, 0.0, u))
                })
                .collect::<Result<_>>()?
        }
        ValueSource::ClosedForm(values) => {
            if values.num_states() != model.num_states() {
                return Err(Error::InvalidParameter(format!(
                    "analytic values cover {} states, model has {}",
                    values.num_states(),
                    model.num_states()
                )));
            }
            let points: Vec<Result<AnalyticPoint>> = grid.points().par_iter().map(|&a| values.at(a)).collect();
            points
                .into_iter()
                .map(|p| {
                    let p = p?;
                    Ok((ValueFn::from_f64(&p.v)?, p.m, p.m_width, ValueFn::from_f64(&p.u.iter().map(|u| u.max(0.0)).collect::<Vec<_>>())?))
                })
                .collect::<Result<_>>()?
        }
    };
    let slack = match source {
        ValueSource::Dp { tol } => tol,
        ValueSource::ClosedForm(_) => 0.0,
    };
    for (i, w) in rows.windows(2).enumerate() {
        if w[1].1 < w[0].1 - slack {
            return Err(Error::Invariant(format!(
                "m decreased from {} to {} between α = {} and α = {}",
                w[0].1,
                w[1].1,
                grid.points()[i],
                grid.points()[i + 1]
            )));
        }
    }
    let mut table = SweepTable {
        grid: grid.points().to_vec(),
        labels: model.labels().to_vec(),
        v: Vec::with_capacity(rows.len()),
        m: Vec::with_capacity(rows.len()),
        m_width: Vec::with_capacity(rows.len()),
        u: Vec::with_capacity(rows.len()),
    };
    for (v, m, width, u) in rows {
        table.v.push(v);
        table.m.push(m);
        table.m_width.push(width);
        table.u.push(u);
    }
    Ok(table)
}

fn relative(v: ExtNonnegReal, m: f64) -> ExtNonnegReal {
    match v.to_finite() {
        Some(x) => ExtNonnegReal::finite((x - m).max(0.0)),
        None => ExtNonnegReal::INFINITY,
    }
}

/// `min { u_α(x) : α in the grid, α ≥ β }`, an upper bound on `U_β(x)`.
#[allow(non_snake_case)]
pub fn U_beta(table: &SweepTable, beta: f64, x: usize) -> Result<ExtNonnegReal> {
    if x >= table.num_states() {
        return Err(Error::MissingValue { state: x });
    }
    let start = table.grid.partition_point(|&a| a < beta);
    (start..table.grid.len()).map(|i| table.u[i][x]).min().ok_or(Error::NoGridPoint(beta))
}

/// Grid estimate of `u(x) = lim_{β↑1} U_β(x)`, with the whole trend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiminfEstimate {
    pub value: ExtNonnegReal,
    /// `U_β(x)` for `β` running through the grid; nondecreasing.
    pub trend: Vec<ExtNonnegReal>,
}

pub fn u_liminf(table: &SweepTable, x: usize) -> Result<LiminfEstimate> {
    if x >= table.num_states() {
        return Err(Error::MissingValue { state: x });
    }
    // Suffix minima give every U_β at once.
    let mut trend = vec![ExtNonnegReal::INFINITY; table.grid.len()];
    let mut run = ExtNonnegReal::INFINITY;
    for i in (0..table.grid.len()).rev() {
        run = run.min(table.u[i][x]);
        trend[i] = run;
    }
    let value = *trend.last().ok_or(Error::InvalidGrid("grid is empty".into()))?;
    Ok(LiminfEstimate { value, trend })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WBounds {
    pub lower: f64,
    pub upper: f64,
    /// First grid index of the tail window.
    pub tail_start: usize,
}

/// `min` and `max` of `(1 - α) m_α` over the top `tail_fraction` of the grid.
pub fn w_bounds(table: &SweepTable, tail_fraction: f64) -> Result<WBounds> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("tail fraction {tail_fraction} must lie in (0, 1]")));
    }
    let n = table.grid.len();
    if n == 0 {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    let keep = ((n as f64 * tail_fraction).ceil() as usize).clamp(1, n);
    let tail_start = n - keep;
    let scaled = table.scaled_m();
    let tail = &scaled[tail_start..];
    Ok(WBounds {
        lower: tail.iter().copied().fold(f64::INFINITY, f64::min),
        upper: tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        tail_start,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AverageMethod {
    /// Recurrent-class analysis of the induced chain.
    Exact,
    /// `(1/T)` times the expected cost of the first `T` steps.
    Horizon(usize),
}

/// Average cost of a stationary policy from every state.
pub fn average_costs_of_policy(
    model: &MdpModel,
    policy: &StationaryPolicy,
    method: AverageMethod,
) -> Result<Vec<ExtNonnegReal>> {
    match method {
        AverageMethod::Exact => Ok(InducedChain::new(model, policy)?.average_costs()),
        AverageMethod::Horizon(t) => {
            if t == 0 {
                return Err(Error::InvalidParameter("horizon must be positive".into()));
            }
            policy.check_feasible(model)?;
            let mut w = vec![ExtNonnegReal::ZERO; model.num_states()];
            for _ in 0..t {
                w = (0..model.num_states())
                    .map(|x| {
                        let a = &model.actions(x)[policy[x]];
                        Ok(a.cost + expect_under(&a.row, &w)?)
                    })
                    .collect::<Result<_>>()?;
            }
            Ok(w.into_iter().map(|s| s.scale(1.0 / t as f64)).collect())
        }
    }
}

pub fn average_cost_of_policy(
    model: &MdpModel,
    policy: &StationaryPolicy,
    x: usize,
    method: AverageMethod,
) -> Result<ExtNonnegReal> {
    if x >= model.num_states() {
        return Err(Error::MissingValue { state: x });
    }
    Ok(average_costs_of_policy(model, policy, method)?[x])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WStar {
    pub value: ExtNonnegReal,
    pub policy: StationaryPolicy,
    pub state: usize,
}

/// `min` over deterministic stationary policies and states of the exact
/// average cost.
pub fn w_star_bruteforce(model: &MdpModel, cap: u128) -> Result<WStar> {
    if model.is_truncated() {
        return Err(Error::MissingWitness);
    }
    let count = model.policy_count();
    if count > cap {
        return Err(Error::TooManyPolicies { count, cap });
    }
    let mut best: Option<WStar> = None;
    for policy in StationaryPolicy::enumerate(model) {
        let g = InducedChain::new(model, &policy)?.average_costs();
        let (state, value) = g.iter().copied().enumerate().min_by_key(|&(_, v)| v).expect("nonempty model");
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(WStar { value, policy, state });
        }
    }
    Ok(best.expect("at least one policy"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AciCheck {
    /// `w̄ + u(x) - min_a η_u^1(x,a)`.
    pub slack: Vec<f64>,
    /// `{a : η_u^1(x,a) ≤ w̄ + u(x) + tol}`.
    pub a_upper: ArgminSets,
    /// Actions within `tol` of `min_a η_u^1(x,a)`.
    pub a_min: ArgminSets,
    /// First action of `a_min` at every state.
    pub policy: StationaryPolicy,
    /// `a_min(x) ⊆ a_upper(x)` at every state with `slack(x) ≥ -tol`.
    pub inclusion_holds: bool,
}

impl AciCheck {
    pub fn worst_slack(&self) -> Option<(usize, f64)> {
        self.slack.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Checks `w̄ + u(x) ≥ min_a η_u^1(x,a)` state by state. Negative slack is
/// reported, not rejected.
pub fn aci_check(model: &MdpModel, u: &ValueFn, w_upper: f64, tol: f64) -> Result<AciCheck> {
    if u.len() != model.num_states() {
        return Err(Error::InvalidParameter(format!("u covers {} states, model has {}", u.len(), model.num_states())));
    }
    if let Some(x) = u.iter().position(|v| v.is_infinite()) {
        return Err(Error::InvalidParameter(format!("u is infinite at state {:?}", model.label(x))));
    }
    let mut check = AciCheck {
        slack: Vec::with_capacity(u.len()),
        a_upper: Vec::with_capacity(u.len()),
        a_min: Vec::with_capacity(u.len()),
        policy: StationaryPolicy(Vec::with_capacity(u.len())),
        inclusion_holds: true,
    };
    for x in 0..model.num_states() {
        let etas: Vec<f64> = (0..model.actions(x).len())
            .map(|a| eta(model, u, Discount::UNDISCOUNTED, x, a).map(ExtNonnegReal::get))
            .collect::<Result<_>>()?;
        let best = etas.iter().copied().fold(f64::INFINITY, f64::min);
        let level = w_upper + u[x].get();
        let slack = level - best;
        let a_upper: Vec<usize> = (0..etas.len()).filter(|&a| etas[a] <= level + tol).collect();
        let a_min: Vec<usize> = (0..etas.len()).filter(|&a| etas[a] <= best + tol).collect();
        if slack >= -tol && !a_min.iter().all(|a| a_upper.contains(a)) {
            check.inclusion_holds = false;
        }
        check.policy.0.push(a_min[0]);
        check.slack.push(slack);
        check.a_upper.push(a_upper);
        check.a_min.push(a_min);
    }
    Ok(check)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionDiagnostics {
    pub state: String,
    /// `max_α u_α(x)` over the grid stays below `threshold`.
    pub b_holds_on_grid: bool,
    pub threshold: f64,
    pub max_u: ExtNonnegReal,
    pub max_alpha: f64,
    /// [`u_liminf`] at `x`.
    pub bbar_estimate: ExtNonnegReal,
    pub min_alpha: f64,
    pub evidence: String,
}

pub fn assumption_diagnostics(table: &SweepTable, x: usize, threshold: f64) -> Result<AssumptionDiagnostics> {
    if x >= table.num_states() {
        return Err(Error::MissingValue { state: x });
    }
    let column: Vec<ExtNonnegReal> = table.u.iter().map(|u| u[x]).collect();
    let (imax, max_u) = column.iter().copied().enumerate().max_by_key(|&(i, v)| (v, std::cmp::Reverse(i))).ok_or(
        Error::InvalidGrid("grid is empty".into()),
    )?;
    let (imin, _) = column.iter().copied().enumerate().min_by_key(|&(_, v)| v).expect("nonempty grid");
    Ok(AssumptionDiagnostics {
        state: table.labels[x].clone(),
        b_holds_on_grid: max_u < ExtNonnegReal::finite(threshold),
        threshold,
        max_u,
        max_alpha: table.grid[imax],
        bbar_estimate: u_liminf(table, x)?.value,
        min_alpha: table.grid[imin],
        evidence: GRID_EVIDENCE.into(),
    })
}

/// Worst margin of `w̄ + ε* + u(x) ≥ min_a η_{U_α}^α(x,a)` at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbedInequality {
    pub alpha: f64,
    pub worst_margin: f64,
    pub worst_state: String,
    pub holds: bool,
}

/// The perturbed inequality at the grid points `alphas` (which must lie on
/// the table's grid), with `U_α` taken from the table.
pub fn perturbed_inequality(
    model: &MdpModel,
    table: &SweepTable,
    u: &ValueFn,
    w_upper: f64,
    eps_star: f64,
    alphas: &[f64],
    tol: f64,
) -> Result<Vec<PerturbedInequality>> {
    alphas
        .iter()
        .map(|&alpha| {
            let big_u = ValueFn(
                (0..table.num_states()).map(|z| U_beta(table, alpha, z)).collect::<Result<Vec<_>>>()?,
            );
            let d = Discount::new(alpha)?;
            let mut worst = (f64::INFINITY, 0usize);
            for x in 0..model.num_states() {
                let best = (0..model.actions(x).len())
                    .map(|a| eta(model, &big_u, d, x, a))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .min()
                    .expect("nonempty action set");
                let margin = w_upper + eps_star + u[x].get() - best.get();
                if margin < worst.0 {
                    worst = (margin, x);
                }
            }
            Ok(PerturbedInequality {
                alpha,
                worst_margin: worst.0,
                worst_state: model.label(worst.1).to_owned(),
                holds: worst.0 >= -tol,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub tol: f64,
    pub tail_fraction: f64,
    pub policy_cap: u128,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, tail_fraction: DEFAULT_TAIL_FRACTION, policy_cap: DEFAULT_POLICY_CAP }
    }
}

/// The whole pipeline's output for one model and grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvgCostReport {
    pub evidence: String,
    pub grid: Vec<f64>,
    pub labels: Vec<String>,
    pub w_lower: f64,
    pub w_upper: f64,
    /// Absent for truncated models and when there are too many policies.
    pub w_star: Option<ExtNonnegReal>,
    pub u: ValueFn,
    pub slack: Vec<f64>,
    pub a_upper: ArgminSets,
    pub a_min: ArgminSets,
    pub policy: StationaryPolicy,
    /// Exact average cost of `policy` from every state, for complete models.
    pub policy_average: Option<Vec<ExtNonnegReal>>,
    /// `0 ≤ w̲ ≤ w̄ ≤ w* + tol`, checked as far as `w*` is known.
    pub chain_holds: bool,
    pub inclusion_holds: bool,
}

pub fn avg_cost_report(model: &MdpModel, table: &SweepTable, opts: &ReportOptions) -> Result<AvgCostReport> {
    let w = w_bounds(table, opts.tail_fraction)?;
    let u = ValueFn((0..table.num_states()).map(|x| u_liminf(table, x).map(|e| e.value)).collect::<Result<_>>()?);
    let w_star = if model.is_truncated() {
        None
    } else {
        match w_star_bruteforce(model, opts.policy_cap) {
            Ok(ws) => Some(ws.value),
            Err(Error::TooManyPolicies { .. }) => None,
            Err(e) => return Err(e),
        }
    };
    let aci = aci_check(model, &u, w.upper, opts.tol)?;
    let policy_average = if model.is_truncated() {
        None
    } else {
        Some(average_costs_of_policy(model, &aci.policy, AverageMethod::Exact)?)
    };
    let mut chain_holds = 0.0 <= w.lower && w.lower <= w.upper;
    if let Some(ws) = w_star {
        chain_holds &= w.upper <= ws.get() + opts.tol;
    }
    Ok(AvgCostReport {
        evidence: GRID_EVIDENCE.into(),
        grid: table.grid.clone(),
        labels: table.labels.clone(),
        w_lower: w.lower,
        w_upper: w.upper,
        w_star,
        u,
        slack: aci.slack,
        a_upper: aci.a_upper,
        a_min: aci.a_min,
        policy: aci.policy,
        policy_average,
        chain_holds,
        inclusion_holds: aci.inclusion_holds,
    })
}
