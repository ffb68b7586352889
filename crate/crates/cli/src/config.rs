use std::fs;
use std::path::PathBuf;

use mdpkit::avgcost::DiscountGrid;
use mdpkit::example41::{build_model, generate_sequence, BranchSequence, Extended, Real, DEFAULT_BRANCH_CAP};
use mdpkit::io::model_from_json;
use mdpkit::random::RandomModelSpec;
use mdpkit::{Discount, MdpModel};

use crate::args::{Builtin, Cli, Command, ExampleCommand, ModelArgs, Precision, SequenceArgs};
use crate::error::CliError;

/// Where the model comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSource {
    File(PathBuf),
    Example41 { branches: u64 },
    Random { seed: u64, states: usize, actions: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceConfig {
    pub branches: u64,
    pub alpha1: f64,
    pub branch_cap: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Solve { model: ModelSource, alpha: Discount, horizon: Option<usize> },
    Finite { model: ModelSource, alpha: Discount, horizon: usize },
    Avg { model: ModelSource, grid: Option<DiscountGrid>, divergence: f64 },
    Params { beta: f64, m: f64, samples: usize, branch_cap: u64 },
    Sequence(SequenceConfig),
    Verify(SequenceConfig),
    GapTable(SequenceConfig),
}

/// A validated command line.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub tol: f64,
    pub precision: Precision,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

fn input(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{field}: {msg}"))
}

fn discount(field: &str, alpha: f64) -> Result<Discount, CliError> {
    Discount::new(alpha).map_err(|e| input(field, e))
}

fn model_source(m: &ModelArgs) -> Result<ModelSource, CliError> {
    match (&m.model, m.builtin) {
        (Some(path), _) => Ok(ModelSource::File(path.clone())),
        (None, Some(Builtin::Example41)) => {
            if m.branches == 0 {
                return Err(input("--branches", "must be at least 1"));
            }
            Ok(ModelSource::Example41 { branches: m.branches })
        }
        (None, Some(Builtin::Random)) => {
            if m.states == 0 || m.actions == 0 {
                return Err(input("--states/--actions", "must be at least 1"));
            }
            Ok(ModelSource::Random { seed: m.seed, states: m.states, actions: m.actions })
        }
        (None, None) => Err(input("--model", "either --model or --builtin is required")),
    }
}

fn sequence(s: &SequenceArgs) -> Result<SequenceConfig, CliError> {
    if s.branches == 0 {
        return Err(input("--branches", "must be at least 1"));
    }
    if !(0.5..1.0).contains(&s.alpha1) {
        return Err(input("--alpha1", format!("{} is outside [0.5, 1)", s.alpha1)));
    }
    Ok(SequenceConfig { branches: s.branches, alpha1: s.alpha1, branch_cap: s.branch_cap })
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let c = cli.common;
        if !(c.tol > 0.0 && c.tol.is_finite()) {
            return Err(input("--tol", format!("{} is not a positive tolerance", c.tol)));
        }
        if c.threads == Some(0) {
            return Err(input("--threads", "must be at least 1"));
        }
        let task = match cli.command {
            Command::Solve { model, alpha, horizon } => {
                if horizon == Some(0) {
                    return Err(input("--horizon", "must be at least 1"));
                }
                Task::Solve { model: model_source(&model)?, alpha: discount("--alpha", alpha)?, horizon }
            }
            Command::Finite { model, alpha, horizon } => {
                if horizon == 0 {
                    return Err(input("--horizon", "must be at least 1"));
                }
                Task::Finite { model: model_source(&model)?, alpha: discount("--alpha", alpha)?, horizon }
            }
            Command::Avg { model, alpha_grid, divergence } => {
                let grid = alpha_grid
                    .map(|g| g.parse::<DiscountGrid>().map_err(|e| input("--alpha-grid", e)))
                    .transpose()?;
                Task::Avg { model: model_source(&model)?, grid, divergence }
            }
            Command::Example41 { which } => match which {
                ExampleCommand::Params { beta, m, samples, branch_cap } => {
                    if !(0.5..1.0).contains(&beta) {
                        return Err(input("--beta", format!("{beta} is outside [0.5, 1)")));
                    }
                    if !(m > 0.0 && m.is_finite()) {
                        return Err(input("--m", format!("{m} is not positive")));
                    }
                    if samples == 0 {
                        return Err(input("--samples", "must be at least 1"));
                    }
                    Task::Params { beta, m, samples, branch_cap }
                }
                ExampleCommand::Sequence(s) => Task::Sequence(sequence(&s)?),
                ExampleCommand::Verify(s) => Task::Verify(sequence(&s)?),
                ExampleCommand::GapTable(s) => Task::GapTable(sequence(&s)?),
            },
        };
        Ok(RunConfig { task, tol: c.tol, precision: c.precision, threads: c.threads, out: c.out })
    }
}

pub fn example_sequence<R: Real>(branches: u64, alpha1: f64, cap: u64) -> Result<BranchSequence<R>, CliError> {
    let seq = generate_sequence(&R::from_f64(alpha1), branches, cap)?;
    if let Some(t) = seq.truncated {
        eprintln!(
            "warning: branch {} needs N = {} states per half, above the cap {cap}; keeping {} branches",
            t.n,
            t.n_star,
            seq.len()
        );
    }
    Ok(seq)
}

pub fn load_model(source: &ModelSource, precision: Precision) -> Result<MdpModel, CliError> {
    match source {
        ModelSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| input("--model", format!("{}: {e}", path.display())))?;
            model_from_json(&text).map_err(|e| input(&format!("--model {}", path.display()), e))
        }
        ModelSource::Example41 { branches } => {
            let model = match precision {
                Precision::Double => build_model(&example_sequence::<f64>(*branches, 0.5, DEFAULT_BRANCH_CAP)?),
                Precision::Extended => build_model(&example_sequence::<Extended>(*branches, 0.5, DEFAULT_BRANCH_CAP)?),
            };
            Ok(model?)
        }
        ModelSource::Random { seed, states, actions } => Ok(RandomModelSpec::new(*states, *actions).generate(*seed)),
    }
}

#[cfg(test)]
mod tests {
    use clap::Parser;

    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        RunConfig::from_cli(Cli::try_parse_from(std::iter::once("mdpkit").chain(args.iter().copied())).unwrap())
    }

    fn field(args: &[&str]) -> String {
        match parse(args) {
            Err(CliError::Input(msg)) => msg,
            other => panic!("expected an input error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_values_by_flag() {
        assert!(field(&["--tol", "0", "solve", "--builtin", "random", "--alpha", "0.5"]).starts_with("--tol"));
        assert!(field(&["solve", "--builtin", "random", "--alpha", "-0.1"]).starts_with("--alpha"));
        assert!(field(&["avg", "--builtin", "random", "--alpha-grid", "0.5,1.0"]).starts_with("--alpha-grid"));
        assert!(field(&["example41", "sequence", "--branches", "0"]).starts_with("--branches"));
        assert!(field(&["example41", "params", "--beta", "0.4"]).starts_with("--beta"));
    }

    #[test]
    fn builds_tasks() {
        let cfg = parse(&["avg", "--builtin", "example41", "--branches", "3", "--alpha-grid", "geom:4"]).unwrap();
        match cfg.task {
            Task::Avg { model: ModelSource::Example41 { branches: 3 }, grid: Some(g), .. } => assert_eq!(g.len(), 4),
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.precision, Precision::Extended);
        let cfg = parse(&["solve", "--model", "m.json", "--alpha", "0.9", "--horizon", "5"]).unwrap();
        assert!(matches!(cfg.task, Task::Solve { model: ModelSource::File(_), horizon: Some(5), .. }));
    }
}
