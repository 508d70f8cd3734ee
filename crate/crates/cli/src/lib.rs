//! `pam` command-line front end.
//!
//! Exit codes: 0 success, 1 computation failure, 2 usage error.

pub mod commands;
pub mod config;
pub mod svg;
pub mod validate;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pam", version, about = "Moments and Lyapunov exponents of the lattice parabolic Anderson model")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments E[∏ Z(t,nᵢ)] by one or more routes.
    Moment(MomentArgs),
    /// Exponent tables and the intermittency chain.
    Lyapunov(LyapunovArgs),
    /// Normalised exponent curves as CSV and SVG.
    Figure2(Figure2Args),
    /// Run a validation suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteName {
    Quadrature,
    Ode,
    Mc,
    Partition,
    Pinned,
}

impl RouteName {
    pub fn name(&self) -> &'static str {
        match self {
            RouteName::Quadrature => "quadrature",
            RouteName::Ode => "ode",
            RouteName::Mc => "mc",
            RouteName::Partition => "partition",
            RouteName::Pinned => "pinned",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MomentArgs {
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long)]
    pub t: f64,
    /// Comma-separated sites, e.g. `2,1,0`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub n: Vec<i64>,
    #[arg(long, value_delimiter = ',', default_value = "quadrature")]
    pub route: Vec<RouteName>,
    /// Requested relative accuracy of the deterministic routes.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 20_000)]
    pub replicas: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Onesided,
    Symmetric,
    She,
}

#[derive(Debug, Clone, Args)]
pub struct LyapunovArgs {
    #[arg(long, value_enum, default_value = "onesided")]
    pub model: ModelName,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    /// Append the intermittency chain with its margins.
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Figure2Args {
    #[arg(long, default_value_t = 0.05)]
    pub nu_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub nu_max: f64,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    #[arg(long, env = "PAM_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Quick,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteName,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<usize>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run(args: Vec<String>) -> i32 {
    let args = match config::expand(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Moment(a) => commands::cmd_moment(&a, &mut stdout),
        Command::Lyapunov(a) => commands::cmd_lyapunov(&a, &mut stdout),
        Command::Figure2(a) => commands::cmd_figure2(&a, &mut stdout),
        Command::Validate(a) => commands::cmd_validate(&a, &mut stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
