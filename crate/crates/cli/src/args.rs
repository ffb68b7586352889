use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mdpkit", version, about = "Solve and analyse Markov decision processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Directory for CSV tables and JSON verdicts. Without it the main
    /// table goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Absolute tolerance for stopping rules and set membership.
    #[arg(long, global = true, default_value_t = 1e-9, allow_negative_numbers = true)]
    pub tol: f64,

    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Precision::Extended)]
    pub precision: Precision,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Double,
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Example41,
    Random,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model document (JSON).
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub model: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,

    /// Branches of the built-in counterexample.
    #[arg(long, default_value_t = 2)]
    pub branches: u64,

    /// Seed of the built-in random model.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 4)]
    pub states: usize,

    #[arg(long, default_value_t = 2)]
    pub actions: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infinite-horizon discounted values and a greedy stationary policy.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Run exactly this many backups instead of stopping on tolerance.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Backward induction: per-epoch values and a Markov policy.
    Finite {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long)]
        horizon: usize,
    },
    /// Discount sweep and average-cost report.
    Avg {
        #[command(flatten)]
        model: ModelArgs,
        /// `geom:K` or a comma-separated list. Defaults to `geom:20`, or to the
        /// adversarial schedule for the built-in counterexample.
        #[arg(long)]
        alpha_grid: Option<String>,
        /// Level above which `max_α u_α(x)` counts as divergence evidence.
        #[arg(long, default_value_t = 1e3)]
        divergence: f64,
    },
    /// The counterexample family.
    Example41 {
        #[command(subcommand)]
        which: ExampleCommand,
    },
}

#[derive(Debug, Args)]
pub struct SequenceArgs {
    #[arg(long, default_value_t = 3)]
    pub branches: u64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha1: f64,
    /// Largest admissible half-branch length.
    #[arg(long, default_value_t = mdpkit::example41::DEFAULT_BRANCH_CAP)]
    pub branch_cap: u64,
}

#[derive(Debug, Subcommand)]
pub enum ExampleCommand {
    /// Parameter tuple for one `(β, M)` and the bump-function bounds.
    Params {
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        m: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = mdpkit::example41::DEFAULT_BRANCH_CAP)]
        branch_cap: u64,
    },
    /// Branch table of the generated schedule.
    Sequence(SequenceArgs),
    /// Gap table plus the full verdict document.
    Verify(SequenceArgs),
    /// Gap table only.
    GapTable(SequenceArgs),
}
