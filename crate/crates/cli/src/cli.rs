use std::path::PathBuf;

use bicomp::ingest::{BinScale, ColumnSpec, LoadOptions};
use bicomp::{HeadFamily, OptimizerConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Fit, simulate and evaluate bivariate composite claim-severity models.
#[derive(Debug, Parser)]
#[command(name = "bicomp", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one or all composite models to paired claims.
    Fit(FitArgs),
    /// Draw pairs from a bivariate model and write them as CSV.
    Simulate(SimulateArgs),
    /// Goodness-of-fit diagnostics of fixed parameters on data.
    Eval(EvalArgs),
    /// Descriptive statistics of both claim columns.
    Summary(SummaryArgs),
    /// Histogram counts of both claim columns.
    Histogram(HistogramArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Linear,
    Log,
}

impl From<Scale> for BinScale {
    fn from(s: Scale) -> Self {
        match s {
            Scale::Linear => BinScale::Linear,
            Scale::Log => BinScale::Log,
        }
    }
}

/// A single family or every supported family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilySelection {
    One(HeadFamily),
    All,
}

impl FamilySelection {
    pub fn families(self) -> Vec<HeadFamily> {
        match self {
            FamilySelection::One(f) => vec![f],
            FamilySelection::All => HeadFamily::ALL.to_vec(),
        }
    }
}

impl std::str::FromStr for FamilySelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(FamilySelection::All);
        }
        s.parse::<HeadFamily>()
            .map(FamilySelection::One)
            .map_err(|_| format!("unknown family `{s}` (expected wiw, pariw, ibiw or all)"))
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file of paired claims.
    #[arg(long)]
    pub input: PathBuf,
    /// The two claim columns, by header name or zero-based index.
    #[arg(long, default_value = "0,1")]
    pub cols: ColumnSpec,
    /// The file has no header row.
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Fields use a decimal comma.
    #[arg(long)]
    pub decimal_comma: bool,
    /// Fail on the first invalid row instead of skipping it.
    #[arg(long)]
    pub strict: bool,
}

impl InputArgs {
    pub fn load_options(&self) -> Result<LoadOptions, String> {
        let delimiter = u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| {
                format!(
                    "delimiter `{}` is not a single ASCII character",
                    self.delimiter
                )
            })?;
        Ok(LoadOptions {
            columns: self.cols.clone(),
            has_header: !self.no_header,
            delimiter,
            decimal_comma: self.decimal_comma,
            strict: self.strict,
        })
    }
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    /// Seed for restart jitter; recorded in every report.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = OptimizerConfig::default().restarts)]
    pub restarts: usize,
    /// Objective tolerance of the simplex search.
    #[arg(long, default_value_t = OptimizerConfig::default().tolerance)]
    pub tol: f64,
    /// Iteration cap per restart.
    #[arg(long, default_value_t = OptimizerConfig::default().max_iterations)]
    pub max_iter: usize,
    /// Smallest sample accepted for a marginal fit.
    #[arg(long, default_value_t = OptimizerConfig::default().min_observations)]
    pub min_obs: usize,
}

impl OptimizerArgs {
    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_iterations: self.max_iter,
            tolerance: self.tol,
            restarts: self.restarts,
            seed: self.seed,
            min_observations: self.min_obs,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// wiw, pariw, ibiw or all.
    #[arg(long, default_value = "all")]
    pub family: FamilySelection,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// Also maximize the full joint likelihood from the two-stage estimates.
    #[arg(long)]
    pub joint_refine: bool,
    /// Exit with an estimation error if any search fails to converge.
    #[arg(long)]
    pub strict_convergence: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model parameters (JSON), or a fit report whose best model is used.
    #[arg(long)]
    pub params: PathBuf,
    /// Number of pairs.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Model parameters (JSON), or a fit report.
    #[arg(long)]
    pub params: PathBuf,
    /// With a fit report, the family to evaluate (default: best ranked).
    #[arg(long)]
    pub model: Option<HeadFamily>,
    /// Histogram bins of the density overlay.
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Points of the fitted density grid.
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = Scale::Log)]
    pub scale: Scale,
    #[command(flatten)]
    pub output: OutputArgs,
}
