use serde::Serialize;

use mdpkit::avgcost::{
    assumption_diagnostics, avg_cost_report, build_sweep, AssumptionDiagnostics, AvgCostReport, DiscountGrid,
    ReportOptions, ValueSource,
};
use mdpkit::dp::{bellman_backup, finite_horizon, infinite_horizon, stationary_from_value};
use mdpkit::example41::{
    build_model, derive_params, gap_table, verify_lemma43, verify_prop42, BranchSequence, ClosedForms, Extended,
    GapRow, Lemma43Report, Prop42Tolerances, Real, DEFAULT_BRANCH_CAP,
};
use mdpkit::{StationaryPolicy, StopRule};

use crate::args::Precision;
use crate::config::{example_sequence, load_model, ModelSource, RunConfig, SequenceConfig, Task};
use crate::error::CliError;
use crate::output::{cell, set, Sink};

/// Runs `$body` with `$r` bound to the scalar type selected by `--precision`.
macro_rules! with_real {
    ($precision:expr, $r:ident => $body:expr) => {
        match $precision {
            Precision::Double => {
                type $r = f64;
                $body
            }
            Precision::Extended => {
                type $r = Extended;
                $body
            }
        }
    };
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let sink = Sink::new(cfg.out.as_deref())?;
    match &cfg.task {
        Task::Solve { model, alpha, horizon } => {
            let model = load_model(model, cfg.precision)?;
            let rule = match horizon {
                Some(t) => StopRule::FixedIterations(*t),
                None => StopRule::SupNorm(cfg.tol),
            };
            let solved = infinite_horizon(&model, *alpha, rule)?;
            // A fixed budget stops short of the fixed point; its greedy sets come
            // from one more backup instead of a residual check.
            let (policy, sets) = match horizon {
                Some(_) => {
                    let sets = bellman_backup(&model, &solved.value, *alpha).argmin;
                    (StationaryPolicy(sets.iter().map(|s| s[0]).collect()), sets)
                }
                None => stationary_from_value(&model, &solved.value, *alpha, cfg.tol.max(solved.residual))?,
            };
            let rows: Vec<Vec<String>> = (0..model.num_states())
                .map(|x| {
                    vec![
                        model.label(x).to_owned(),
                        cell(solved.value[x]),
                        model.actions(x)[policy[x]].label.clone(),
                        set(&sets[x]),
                    ]
                })
                .collect();
            sink.table("values", &["state", "value", "action", "argmin"], &rows, true)?;
            sink.document(
                "solve",
                &SolveDoc {
                    alpha: alpha.get(),
                    rule,
                    iterations: solved.iterations,
                    residual: solved.residual,
                    monotone: solved.monotone,
                    policy: &policy.0,
                },
            )?;
            Ok(())
        }
        Task::Finite { model, alpha, horizon } => {
            let model = load_model(model, cfg.precision)?;
            let fh = finite_horizon(&model, *alpha, *horizon)?;
            let mut values = Vec::with_capacity((horizon + 1) * model.num_states());
            for (t, v) in fh.values.iter().enumerate() {
                for x in 0..model.num_states() {
                    let argmin = if t == 0 { String::new() } else { set(&fh.argmin[t - 1][x]) };
                    values.push(vec![cell(t), model.label(x).to_owned(), cell(v[x]), argmin]);
                }
            }
            sink.table("finite_values", &["t", "state", "value", "argmin"], &values, true)?;
            let mut policy = Vec::new();
            for (epoch, decision) in fh.policy.epochs.iter().enumerate() {
                for x in 0..model.num_states() {
                    policy.push(vec![cell(epoch), model.label(x).to_owned(), model.actions(x)[decision[x]].label.clone()]);
                }
            }
            sink.table("markov_policy", &["epoch", "state", "action"], &policy, false)?;
            Ok(())
        }
        Task::Avg { model: source, grid, divergence } => avg(cfg, &sink, source, grid.as_ref(), *divergence),
        Task::Params { beta, m, samples, branch_cap } => {
            with_real!(cfg.precision, R => params::<R>(cfg, &sink, *beta, *m, *samples, *branch_cap))
        }
        Task::Sequence(s) => with_real!(cfg.precision, R => sequence::<R>(&sink, s)),
        Task::Verify(s) => with_real!(cfg.precision, R => verify::<R>(&sink, s, true)),
        Task::GapTable(s) => with_real!(cfg.precision, R => verify::<R>(&sink, s, false)),
    }
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    alpha: f64,
    rule: StopRule,
    iterations: usize,
    residual: f64,
    monotone: bool,
    policy: &'a [usize],
}

#[derive(Serialize)]
struct AvgDoc {
    report: AvgCostReport,
    diagnostics: Vec<AssumptionDiagnostics>,
}

fn avg(
    cfg: &RunConfig,
    sink: &Sink,
    source: &ModelSource,
    grid: Option<&DiscountGrid>,
    divergence: f64,
) -> Result<(), CliError> {
    let (model, table) = match source {
        ModelSource::Example41 { branches } => with_real!(cfg.precision, R => {
            let seq = example_sequence::<R>(*branches, 0.5, DEFAULT_BRANCH_CAP)?;
            let model = build_model(&seq)?;
            let grid = match grid {
                Some(g) => g.clone(),
                None => DiscountGrid::new(seq.adversarial_grid())?,
            };
            let forms = ClosedForms::new(seq, 1e-15);
            let table = build_sweep(&model, &grid, ValueSource::ClosedForm(&forms))?;
            (model, table)
        }),
        other => {
            let model = load_model(other, cfg.precision)?;
            let grid = match grid {
                Some(g) => g.clone(),
                None => DiscountGrid::geometric(20)?,
            };
            let table = build_sweep(&model, &grid, ValueSource::Dp { tol: cfg.tol })?;
            (model, table)
        }
    };
    let rows: Vec<Vec<String>> = table
        .records()
        .map(|r| vec![cell(r.alpha), r.state, cell(r.v), cell(r.m), cell(r.u)])
        .collect();
    sink.table("sweep", &["alpha", "state", "v", "m", "u"], &rows, true)?;
    let opts = ReportOptions { tol: cfg.tol, ..ReportOptions::default() };
    let report = avg_cost_report(&model, &table, &opts)?;
    let diagnostics = (0..model.num_states())
        .map(|x| assumption_diagnostics(&table, x, divergence))
        .collect::<Result<Vec<_>, _>>()?;
    eprintln!(
        "w_lower = {}, w_upper = {}, w_star = {}",
        report.w_lower,
        report.w_upper,
        report.w_star.map_or("unknown".to_owned(), |w| w.to_string())
    );
    sink.document("avg_report", &AvgDoc { report, diagnostics })
}

fn params<R: Real>(cfg: &RunConfig, sink: &Sink, beta: f64, m: f64, samples: usize, cap: u64) -> Result<(), CliError> {
    let (b, mm) = (R::from_f64(beta), R::from_f64(m));
    let p = derive_params(&b, &mm, cap)?;
    let row = vec![
        cell(beta),
        cell(m),
        cell(p.eps.to_f64()),
        cell(p.gamma.to_f64()),
        cell(p.n_star),
        cell(p.delta.to_f64()),
        cell(p.is_ordered(&b)),
    ];
    sink.table("params", &["beta", "m", "eps", "gamma", "n_star", "delta", "ordered"], &[row], true)?;
    let report: Lemma43Report = verify_lemma43(&b, &mm, samples, cfg.tol, cap)?;
    sink.document("bump_bounds", &report)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "bump bounds fail at beta = {beta}, M = {m} (low {}, high {}, peak {})",
            report.low_ok, report.high_ok, report.peak_ok
        )))
    }
}

fn generated<R: Real>(s: &SequenceConfig) -> Result<BranchSequence<R>, CliError> {
    example_sequence::<R>(s.branches, s.alpha1, s.branch_cap)
}

#[derive(Serialize)]
struct BranchDoc {
    n: u64,
    alpha: f64,
    eps: f64,
    gamma: f64,
    big_n: u64,
    alpha_next: f64,
    invariants_hold: bool,
}

fn sequence<R: Real>(sink: &Sink, s: &SequenceConfig) -> Result<(), CliError> {
    let seq = generated::<R>(s)?;
    let docs: Vec<BranchDoc> = seq
        .branches
        .iter()
        .map(|b| BranchDoc {
            n: b.n,
            alpha: b.alpha.to_f64(),
            eps: b.eps.to_f64(),
            gamma: b.gamma.to_f64(),
            big_n: b.big_n,
            alpha_next: b.alpha_next.to_f64(),
            invariants_hold: b.invariants_hold(),
        })
        .collect();
    let rows: Vec<Vec<String>> = docs
        .iter()
        .map(|b| vec![cell(b.n), cell(b.alpha), cell(b.eps), cell(b.gamma), cell(b.big_n), cell(b.alpha_next)])
        .collect();
    sink.table("branches", &["n", "alpha", "eps", "gamma", "N", "alpha_next"], &rows, true)?;
    sink.document("sequence", &serde_json::json!({ "branches": docs, "truncated": seq.truncated }))?;
    match docs.iter().find(|b| !b.invariants_hold) {
        Some(b) => Err(CliError::Verification(format!("branch {} violates the ordering invariants", b.n))),
        None => Ok(()),
    }
}

fn gap_rows(rows: &[GapRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                cell(r.n),
                cell(r.alpha),
                cell(r.gamma),
                cell(r.u_gamma),
                cell(r.u_alpha),
                cell(r.m_alpha),
                cell(r.abel_gap),
                cell(r.gamma_ok),
                cell(r.alpha_ok),
                cell(r.abel_ok),
            ]
        })
        .collect()
}

const GAP_HEADER: [&str; 10] =
    ["n", "alpha", "gamma", "u_gamma_lower", "u_alpha_upper", "m_alpha", "abel_gap", "gamma_ok", "alpha_ok", "abel_ok"];

fn verify<R: Real>(sink: &Sink, s: &SequenceConfig, full: bool) -> Result<(), CliError> {
    let seq = generated::<R>(s)?;
    let tol = Prop42Tolerances::default();
    if !full || seq.len() < 2 {
        if full {
            eprintln!("warning: with one branch only the gap table is checked");
        }
        let rows = gap_table(&seq, &tol)?;
        sink.table("gap_table", &GAP_HEADER, &gap_rows(&rows), true)?;
        return match rows.iter().find(|r| !(r.gamma_ok && r.alpha_ok && r.abel_ok)) {
            Some(r) => Err(CliError::Verification(format!("gap row n = {} fails", r.n))),
            None => Ok(()),
        };
    }
    let report = verify_prop42(&seq, &tol)?;
    sink.table("gap_table", &GAP_HEADER, &gap_rows(&report.rows), true)?;
    sink.document("verdict", &serde_json::json!({ "passed": report.passed(), "report": report }))?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Verification("the gap table or the increment checks fail; see verdict.json".into()))
    }
}
