use std::path::PathBuf;
use std::str::FromStr;

use btcp::train::BaselineMode;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "btcp",
    version,
    about = "Train and evaluate balanced TCP uncertainty estimators"
)]
pub struct Cli {
    /// Log verbosity: -v for per-epoch progress, -vv for debug output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the three training stages for one or more seeds.
    Train(TrainArgs),
    /// Seed-averaged metrics, one row per method.
    Compare(CompareArgs),
    /// Histogram of the final test uncertainties of a report.
    Hist(HistArgs),
    /// Average uncertainty of a checkpoint on in-distribution and OOD data.
    Ood(OodArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    Blobs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointMode {
    /// After every epoch of every stage, plus the final state.
    #[default]
    All,
    /// Final state only.
    Final,
    None,
}

/// Seeds as a comma-separated list (`0,3,7`) or a half-open range (`0..5`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

impl FromStr for SeedList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let seeds: Vec<u64> = if let Some((lo, hi)) = s.split_once("..") {
            let lo: u64 = lo
                .trim()
                .parse()
                .map_err(|e| format!("bad range start: {e}"))?;
            let hi: u64 = hi
                .trim()
                .parse()
                .map_err(|e| format!("bad range end: {e}"))?;
            (lo..hi).collect()
        } else {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u64>()
                        .map_err(|e| format!("bad seed {t:?}: {e}"))
                })
                .collect::<Result<_, _>>()?
        };
        if seeds.is_empty() {
            return Err("seed list is empty".into());
        }
        Ok(SeedList(seeds))
    }
}

/// Hidden-layer widths as a comma-separated list; `none` for no hidden layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Widths(pub Vec<usize>);

impl FromStr for Widths {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("none") {
            return Ok(Widths(Vec::new()));
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| format!("bad width {t:?}: {e}"))
            })
            .collect::<Result<_, _>>()
            .map(Widths)
    }
}

fn parse_baseline(s: &str) -> Result<BaselineMode, String> {
    s.parse().map_err(|e: btcp::Error| e.to_string())
}

/// Experiment settings shared by flags and config files. A config file line
/// `key = value` is read exactly like the flag `--key=value`.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Settings {
    /// Generate synthetic data instead of reading IDX files.
    #[arg(long, value_enum, help_heading = "Data")]
    pub synth: Option<SynthKind>,
    /// IDX dataset under the data directory (e.g. `mnist`, `fashion-mnist`).
    #[arg(long, help_heading = "Data")]
    pub dataset: Option<String>,
    /// Dataset cache directory [env: BTCP_DATA_DIR, default: ./data].
    #[arg(long, help_heading = "Data")]
    pub data_dir: Option<PathBuf>,
    #[arg(long, help_heading = "Data")]
    pub idx_images: Option<PathBuf>,
    #[arg(long, help_heading = "Data")]
    pub idx_labels: Option<PathBuf>,
    #[arg(long, help_heading = "Data")]
    pub idx_test_images: Option<PathBuf>,
    #[arg(long, help_heading = "Data")]
    pub idx_test_labels: Option<PathBuf>,
    /// Use only the first N training samples.
    #[arg(long, help_heading = "Data")]
    pub limit: Option<usize>,
    /// Use only the first N test samples.
    #[arg(long, help_heading = "Data")]
    pub test_limit: Option<usize>,
    #[arg(long, help_heading = "Synthetic blobs")]
    pub blob_classes: Option<usize>,
    #[arg(long, help_heading = "Synthetic blobs")]
    pub blob_dim: Option<usize>,
    #[arg(long, help_heading = "Synthetic blobs")]
    pub blob_per_class: Option<usize>,
    #[arg(long, help_heading = "Synthetic blobs")]
    pub blob_test_per_class: Option<usize>,
    #[arg(long, help_heading = "Synthetic blobs")]
    pub blob_spread: Option<f64>,
    /// Seed of the synthetic data, independent of the training seeds.
    #[arg(long, help_heading = "Synthetic blobs")]
    pub data_seed: Option<u64>,

    #[arg(long, help_heading = "Training")]
    pub seed: Option<u64>,
    #[arg(long, help_heading = "Training")]
    pub seeds: Option<SeedList>,
    /// btcp, tcp_mse or ohem.
    #[arg(long, value_parser = parse_baseline, help_heading = "Training")]
    pub baseline: Option<BaselineMode>,
    #[arg(long, help_heading = "Training")]
    pub tau: Option<f64>,
    /// Half-width of the density window.
    #[arg(long, help_heading = "Training")]
    pub epsilon: Option<f64>,
    /// Fixed focusing exponent instead of the variance rule.
    #[arg(long, help_heading = "Training")]
    pub gamma: Option<f64>,
    #[arg(long, help_heading = "Training")]
    pub gamma_min: Option<f64>,
    #[arg(long, help_heading = "Training")]
    pub gamma_max: Option<f64>,
    /// Weight of the uncertainty loss during fine-tuning.
    #[arg(long, help_heading = "Training")]
    pub lambda: Option<f64>,
    #[arg(long, help_heading = "Training")]
    pub lr: Option<f64>,
    #[arg(long, help_heading = "Training")]
    pub lr_finetune: Option<f64>,
    #[arg(long, help_heading = "Training")]
    pub momentum: Option<f64>,
    #[arg(long, help_heading = "Training")]
    pub weight_decay: Option<f64>,
    #[arg(long, help_heading = "Training")]
    pub ohem_keep: Option<f64>,
    #[arg(long, help_heading = "Training")]
    pub epochs_cls: Option<usize>,
    #[arg(long, help_heading = "Training")]
    pub epochs_est: Option<usize>,
    #[arg(long, help_heading = "Training")]
    pub epochs_ft: Option<usize>,
    #[arg(long, help_heading = "Training")]
    pub batch: Option<usize>,
    /// Encoder hidden widths, e.g. `64,32`.
    #[arg(long, help_heading = "Training")]
    pub encoder: Option<Widths>,
    /// Uncertainty-head hidden widths, or `none`.
    #[arg(long, help_heading = "Training")]
    pub uncertainty_hidden: Option<Widths>,
    /// Histogram bins stored in reports.
    #[arg(long, help_heading = "Training")]
    pub bins: Option<usize>,
}

macro_rules! prefer {
    ($hi:ident, $lo:ident; $($field:ident),* $(,)?) => {
        Settings { $($field: $hi.$field.or($lo.$field)),* }
    };
}

impl Settings {
    /// Field-wise `self` where set, otherwise `lower`.
    pub fn or(self, lower: Settings) -> Settings {
        let hi = self;
        let lo = lower;
        prefer!(hi, lo;
            synth, dataset, data_dir, idx_images, idx_labels, idx_test_images, idx_test_labels,
            limit, test_limit, blob_classes, blob_dim, blob_per_class, blob_test_per_class,
            blob_spread, data_seed, seed, seeds, baseline, tau, epsilon, gamma, gamma_min,
            gamma_max, lambda, lr, lr_finetune, momentum, weight_decay, ohem_keep, epochs_cls,
            epochs_est, epochs_ft, batch, encoder, uncertainty_hidden, bins,
        )
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Flat `key = value` settings file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Re-run exactly what an earlier manifest describes.
    #[arg(long, conflicts_with = "config")]
    pub manifest: Option<PathBuf>,
    /// Output directory (defaults to the manifest's when re-running).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub checkpoints: Option<CheckpointMode>,
    /// Run seeds concurrently. Each seed writes to its own directory.
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Report files, or directories searched for `report.json`.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Columns to show (comma-separated); all by default.
    #[arg(long, value_delimiter = ',')]
    pub metric: Vec<String>,
    /// Also write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HistArgs {
    /// A report file or a directory containing `report.json`.
    pub report: PathBuf,
    #[arg(long, default_value_t = btcp::metrics::DEFAULT_BINS)]
    pub bins: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OodArgs {
    /// Checkpoint file holding the trained network.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// OOD test split from the data directory.
    #[arg(long, help_heading = "OOD data")]
    pub ood_dataset: Option<String>,
    /// OOD images in IDX format; labels are not needed.
    #[arg(long, help_heading = "OOD data")]
    pub ood_idx_images: Option<PathBuf>,
    /// OOD set: the in-distribution blobs shifted by this offset.
    #[arg(long, help_heading = "OOD data")]
    pub ood_synth_shift: Option<f64>,
    #[arg(long, help_heading = "OOD data")]
    pub ood_limit: Option<usize>,
    /// Directory for `ood.json` and `ood.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// In-distribution data (its test split is used) and `--tau`.
    #[command(flatten)]
    pub settings: Settings,
}
