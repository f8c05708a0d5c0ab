use std::path::PathBuf;

use ascal::asc::FitConfig;
use ascal::data::InputFormat;
use ascal::{BinScheme, CalibratorConfig, CalibratorKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Calibrate cosine-similarity verification scores into probabilistic
/// confidences.
#[derive(Debug, Parser)]
#[command(name = "ascal", version, about, long_about = None)]
pub struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a calibrator and write it to a model file.
    Calibrate(CalibrateArgs),
    /// Evaluate accuracy, confidence and ECE, optionally through a model.
    Evaluate(EvaluateArgs),
    /// Stratified k-fold protocol: fit on k-1 folds, evaluate on the rest.
    Kfold(KfoldArgs),
    /// Write a synthetic two-Gaussian score dataset.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => InputFormat::Csv,
            FormatArg::Jsonl => InputFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CalibratorArg {
    Asc,
    Histogram,
    Isotonic,
}

impl From<CalibratorArg> for CalibratorKind {
    fn from(c: CalibratorArg) -> Self {
        match c {
            CalibratorArg::Asc => CalibratorKind::Asc,
            CalibratorArg::Histogram => CalibratorKind::Histogram,
            CalibratorArg::Isotonic => CalibratorKind::Isotonic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    EqualWidth,
    EqualFrequency,
}

impl From<SchemeArg> for BinScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::EqualWidth => BinScheme::EqualWidth,
            SchemeArg::EqualFrequency => BinScheme::EqualFrequency,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TauMode {
    /// Use the value given with --tau.
    Fixed,
    /// Smallest threshold meeting --far-target.
    FarTarget,
    /// Threshold maximising accuracy on the fitting data.
    BestAccuracy,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Dataset file (scored pairs, or embedding pairs with --embeddings).
    #[arg(long)]
    pub input: PathBuf,

    /// Input format; inferred from the extension when omitted
    /// (.jsonl/.json/.ndjson are JSONL, anything else CSV).
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Rows hold embedding pairs to be scored by cosine similarity.
    #[arg(long)]
    pub embeddings: bool,
}

impl InputArgs {
    pub fn format(&self) -> InputFormat {
        self.format
            .map(Into::into)
            .unwrap_or_else(|| InputFormat::from_path(&self.input))
    }
}

/// Threshold selection. Precedence when --tau-mode is omitted:
/// --tau, then --far-target, then best accuracy.
#[derive(Debug, Clone, Args)]
pub struct TauArgs {
    /// Fixed decision threshold in (-1, 1).
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,

    /// How to pick the threshold.
    #[arg(long, value_enum)]
    pub tau_mode: Option<TauMode>,

    /// Target false accept rate in (0, 1) for --tau-mode far-target.
    #[arg(long)]
    pub far_target: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CalibratorArgs {
    /// Calibrator family.
    #[arg(long, value_enum, default_value = "asc")]
    pub calibrator: CalibratorArg,

    /// Similarity bins for the histogram calibrator.
    #[arg(long, default_value_t = ascal::baselines::DEFAULT_HISTOGRAM_BINS)]
    pub hist_bins: usize,

    /// Maximum optimizer iterations for ASC.
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,

    /// Initial step scale for the ASC optimizer.
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
}

impl CalibratorArgs {
    pub fn config(&self) -> CalibratorConfig {
        CalibratorConfig {
            kind: self.calibrator.into(),
            asc: FitConfig {
                learning_rate: self.learning_rate,
                max_iterations: self.max_iter,
                ..FitConfig::default()
            },
            histogram_bins: self.hist_bins,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EceArgs {
    /// Number of confidence bins for ECE.
    #[arg(long, default_value_t = ascal::metrics::DEFAULT_ECE_BINS)]
    pub bins: usize,

    /// Confidence bin partition.
    #[arg(long, value_enum, default_value = "equal-width")]
    pub scheme: SchemeArg,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tau: TauArgs,
    #[command(flatten)]
    pub calibrator: CalibratorArgs,
    #[command(flatten)]
    pub ece: EceArgs,

    /// Where to write the fitted model.
    #[arg(long)]
    pub model_out: PathBuf,

    /// Optional JSON summary of the fit.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tau: TauArgs,
    #[command(flatten)]
    pub ece: EceArgs,

    /// Fitted model; without one only the raw scores are evaluated.
    #[arg(long)]
    pub model_in: Option<PathBuf>,

    /// JSON report destination; stdout when omitted.
    #[arg(long)]
    pub report_out: Option<PathBuf>,

    /// Optional SVG reliability diagram.
    #[arg(long)]
    pub diagram_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KfoldArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tau: TauArgs,
    #[command(flatten)]
    pub calibrator: CalibratorArgs,
    #[command(flatten)]
    pub ece: EceArgs,

    /// Number of folds; ignored when the input carries fold ids.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    /// Seed for the stratified fold shuffle.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// JSON report destination; stdout when omitted.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 5000)]
    pub n_pos: usize,
    #[arg(long, default_value_t = 5000)]
    pub n_neg: usize,
    #[arg(long, default_value_t = 0.45, allow_hyphen_values = true)]
    pub pos_mean: f64,
    #[arg(long, default_value_t = 0.08)]
    pub pos_sd: f64,
    #[arg(long, default_value_t = 0.25, allow_hyphen_values = true)]
    pub neg_mean: f64,
    #[arg(long, default_value_t = 0.08)]
    pub neg_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output dataset path.
    #[arg(long)]
    pub output: PathBuf,

    /// Output format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}
