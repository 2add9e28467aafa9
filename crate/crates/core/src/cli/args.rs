use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "mbss",
    version,
    about = "Model-based semi-supervised classification of API-call traces",
    long_about = "Extracts binary API-call features from trace logs, fits Gaussian \
mixtures to labeled and unlabeled samples by conditional EM with BIC covariance \
selection, classifies new samples, and runs cross-validation and detection-rate \
evaluations. Every output is accompanied by a <output>.manifest.json run record."
)]
pub struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// TOML file with defaults for any tuning flag; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a directory of trace logs into a dataset CSV, one row per log.
    Extract(ExtractArgs),
    /// Fit every candidate covariance family and save the BIC-selected model.
    Fit(FitArgs),
    /// Label dataset rows by maximum posterior under a saved model.
    Classify(ClassifyArgs),
    /// Cross-validation or out-of-sample detection-rate evaluation.
    Evaluate(EvaluateArgs),
    /// Write a seeded synthetic two-class dataset.
    Synth(SynthArgs),
}

/// Flags shared by commands that fit mixtures.
#[derive(Debug, Clone, Default, Args)]
pub struct FitFlags {
    /// Candidate families: `all` or a comma list such as `EII,VVI,VVV`.
    #[arg(long, value_name = "LIST")]
    pub families: Option<String>,
    /// Convergence tolerance on the complete log-likelihood (> 0) [default: 1e-5].
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// CEM iteration cap [default: 1000].
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Relative diagonal loading of covariance estimates [default: 1e-6].
    #[arg(long)]
    pub regularization: Option<f64>,
    /// Stopping rule [default: aitken].
    #[arg(long, value_enum)]
    pub stopping: Option<StoppingArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoppingArg {
    Aitken,
    Delta,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory of trace logs; every regular, non-hidden file is one sample.
    #[arg(long, value_name = "DIR")]
    pub logs: PathBuf,
    /// API list, one `class.method` per line [default: bundled 160-entry list].
    #[arg(long, value_name = "FILE")]
    pub vocabulary: Option<PathBuf>,
    /// CSV `sample_id,label` naming labeled logs by file stem; others are unlabeled.
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Number of classes [default: 2].
    #[arg(long)]
    pub classes: Option<usize>,
    /// Dataset CSV to write.
    #[arg(long, short, value_name = "FILE")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// Model file (JSON) to write.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Selection report CSV [default: <model stem>.selection.csv].
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Also write the selected fit's per-iteration log-likelihoods.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    /// Also write predictions for the unlabeled rows.
    #[arg(long, value_name = "FILE")]
    pub predictions: Option<PathBuf>,
    /// Number of classes [default: largest label + 1].
    #[arg(long)]
    pub classes: Option<usize>,
    /// Recorded in the manifest; fitting itself is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Class whose posterior is written as `score` [default: 1].
    #[arg(long)]
    pub positive_class: Option<usize>,
    #[command(flatten)]
    pub fit: FitFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RowSelection {
    Unlabeled,
    All,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Model file written by `fit`.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Dataset CSV.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// Predictions CSV `sample_id,predicted_label,score`.
    #[arg(long, short, value_name = "FILE")]
    pub output: PathBuf,
    /// Rows to classify; `all` writes labeled rows first.
    #[arg(long, value_enum, default_value = "unlabeled")]
    pub rows: RowSelection,
    /// Class whose posterior is written as `score` [default: 1].
    #[arg(long)]
    pub positive_class: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    /// Stratified k-fold cross-validation on the labeled rows.
    Cv,
    /// Detection-rate sweep on an all-positive out-of-sample set.
    Oos,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// In-sample dataset CSV.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub protocol: Protocol,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Seed for fold assignment and Monte Carlo subsampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma list from `mbss`, `lda`, `knn` [default: mbss,lda,knn].
    #[arg(long, value_name = "LIST")]
    pub classifiers: Option<String>,
    /// Neighbours for kNN [default: 3].
    #[arg(long)]
    pub knn_k: Option<usize>,
    /// Folds for `cv` [default: 10].
    #[arg(long)]
    pub folds: Option<usize>,
    /// Out-of-sample dataset CSV for `oos`; every row is taken as positive.
    #[arg(long, value_name = "FILE")]
    pub oos_data: Option<PathBuf>,
    /// Subsample fractions in (0, 1] [default: 0.001,0.01,0.2,0.5,0.9,1].
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub fractions: Option<Vec<f64>>,
    /// Replicates per fraction [default: 50,30,20,10,5,1].
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub replicates: Option<Vec<usize>>,
    /// Extra predictions to compare, as NAME=FILE (repeatable).
    #[arg(long = "external-predictions", value_name = "NAME=FILE")]
    pub external: Vec<String>,
    /// Also export a PCA scatter with this many components.
    #[arg(long, value_name = "N")]
    pub pca: Option<usize>,
    /// Number of classes [default: largest label + 1].
    #[arg(long)]
    pub classes: Option<usize>,
    /// Positive (malicious) class [default: 1].
    #[arg(long)]
    pub positive_class: Option<usize>,
    #[command(flatten)]
    pub fit: FitFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    /// Identity covariances.
    Spherical,
    /// Shared equicorrelated covariance with correlation `--rho`.
    Correlated,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Dataset CSV to write.
    #[arg(long, short, value_name = "FILE")]
    pub output: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 5)]
    pub dim: usize,
    /// Distance between the class means along the first axis, in σ.
    #[arg(long, default_value_t = 6.0)]
    pub separation: f64,
    #[arg(long, value_enum, default_value = "spherical")]
    pub shape: Shape,
    #[arg(long, default_value_t = 0.8)]
    pub rho: f64,
    /// Total number of samples.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Fraction of samples that keep their label.
    #[arg(long, default_value_t = 0.5)]
    pub label_fraction: f64,
    /// Write features as `x > THRESHOLD` bits.
    #[arg(long, value_name = "THRESHOLD")]
    pub binarize: Option<f64>,
    /// CSV `sample_id,label` with the hidden labels of unlabeled rows.
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,
    /// Also write an all-class-1 out-of-sample set.
    #[arg(long, value_name = "FILE")]
    pub oos_output: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub oos_n: usize,
    /// Shift of the out-of-sample class-1 mean along the second axis, in σ.
    #[arg(long, default_value_t = 0.0)]
    pub oos_shift: f64,
}
