//! Command-line surface: argument structs and value enums.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grpdesc::cv::Metric;
use grpdesc::{Loss, PenaltyFamily};

#[derive(Debug, Parser)]
#[command(
    name = "grpdesc",
    version,
    about = "Group-penalized regression paths by group descent",
    disable_help_subcommand = true
)]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a regularization path and write it as a reusable artifact.
    Fit(FitArgs),
    /// Select a penalty level by k-fold cross-validation.
    Cv(CvArgs),
    /// Predict new rows from a stored path artifact.
    Predict(PredictArgs),
    /// Run a replicated benchmark study and report summary metrics.
    Simulate(SimulateArgs),
    /// Compare the solver against a brute-force oracle on small instances.
    #[command(hide = true)]
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Delimited table with a header row holding the response and predictors.
    #[arg(long)]
    pub data: PathBuf,

    /// Two-column file mapping predictor names to group names.
    #[arg(long)]
    pub groups: PathBuf,

    /// Name of the response column.
    #[arg(long, default_value = "y")]
    pub response: String,

    /// Model for the response.
    #[arg(long, value_enum, default_value_t = LossArg::Linear)]
    pub loss: LossArg,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Penalty family.
    #[arg(long, value_enum, default_value_t = FamilyArg::Grlasso)]
    pub family: FamilyArg,

    /// Concavity parameter for grmcp (> 1) or grscad (> 2).
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Number of penalty levels on the grid.
    #[arg(long = "nlambda", default_value_t = 100)]
    pub n_lambda: usize,

    /// Smallest penalty as a fraction of the largest (default 1e-4, or 0.05
    /// when predictors outnumber rows).
    #[arg(long = "min-ratio")]
    pub min_ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Directory for path.json, coefficients.tsv, and path_summary.tsv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,

    /// Also write an SVG of the coefficient paths.
    #[arg(long)]
    pub plots: bool,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Number of cross-validation folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    /// Seed for the fold assignment.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Held-out error metric (default: rpe for linear, misclass for logistic).
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,

    /// Directory for cv.tsv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,

    /// Also write an SVG of the cross-validation curve.
    #[arg(long)]
    pub plots: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// path.json written by the fit subcommand.
    #[arg(long)]
    pub model: PathBuf,

    /// Delimited table of new rows; extra columns are ignored.
    #[arg(long)]
    pub data: PathBuf,

    /// Predict at the stored penalty level nearest this value.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Predict at this grid index instead of a penalty value.
    #[arg(long)]
    pub index: Option<usize>,

    /// Directory for predictions.tsv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Benchmark scenario.
    #[arg(long, value_enum)]
    pub kind: KindArg,

    /// Signal magnitude for the basic and snp scenarios.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,

    /// Number of independent replicates.
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,

    /// Folds used to select the penalty level within each replicate.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    /// Base seed; replicate r uses seed + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Number of penalty levels on each replicate's grid.
    #[arg(long = "nlambda", default_value_t = 100)]
    pub n_lambda: usize,

    /// Override the number of rows per replicate.
    #[arg(long)]
    pub n: Option<usize>,

    /// Override the number of groups (basic) or variables (other scenarios).
    #[arg(long = "n-groups")]
    pub n_groups: Option<usize>,

    /// Directory for the summary table.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    /// Seed for the random check instances.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Linear,
    Logistic,
}

impl From<LossArg> for Loss {
    fn from(value: LossArg) -> Loss {
        match value {
            LossArg::Linear => Loss::Linear,
            LossArg::Logistic => Loss::Logistic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Grlasso,
    Grmcp,
    Grscad,
}

impl From<FamilyArg> for PenaltyFamily {
    fn from(value: FamilyArg) -> PenaltyFamily {
        match value {
            FamilyArg::Grlasso => PenaltyFamily::GroupLasso,
            FamilyArg::Grmcp => PenaltyFamily::GroupMcp,
            FamilyArg::Grscad => PenaltyFamily::GroupScad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Rpe,
    Misclass,
    Deviance,
}

impl From<MetricArg> for Metric {
    fn from(value: MetricArg) -> Metric {
        match value {
            MetricArg::Rpe => Metric::RootPredictionError,
            MetricArg::Misclass => Metric::Misclassification,
            MetricArg::Deviance => Metric::Deviance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Basic,
    Semiparametric,
    Snp,
}
