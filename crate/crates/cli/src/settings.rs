//! Config files and the resolution of settings into a run description.

use std::path::{Path, PathBuf};

use btcp::data::{BlobSpec, DATA_DIR_ENV};
use btcp::losses::GammaMode;
use btcp::report::DatasetDescriptor;
use btcp::train::TrainConfig;
use clap::Parser;

use crate::args::{Settings, SynthKind};
use crate::error::{usage, CliError};

pub const DEFAULT_BLOB_CLASSES: usize = 3;
pub const DEFAULT_BLOB_DIM: usize = 2;
pub const DEFAULT_BLOB_PER_CLASS: usize = 500;
pub const DEFAULT_BLOB_TEST_PER_CLASS: usize = 1000;
pub const DEFAULT_BLOB_SPREAD: f64 = 0.5;

#[derive(Parser)]
#[command(
    no_binary_name = true,
    disable_help_flag = true,
    disable_version_flag = true
)]
struct FileSettings {
    #[command(flatten)]
    settings: Settings,
}

/// Parses a flat `key = value` file. Blank lines and lines starting with `#`
/// are skipped; keys are flag names without the leading dashes, with `_`
/// accepted in place of `-`.
pub fn parse_config_text(text: &str, origin: &str) -> Result<Settings, CliError> {
    let mut argv = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!(
                "{origin}:{}: expected `key = value`, found {line:?}",
                n + 1
            )));
        };
        let value = value.trim().trim_matches('"');
        argv.push(format!("--{}={value}", key.trim().replace('_', "-")));
    }
    FileSettings::try_parse_from(argv)
        .map(|f| f.settings)
        .map_err(|e| usage(format!("{origin}: {}", e.render().to_string().trim_end())))
}

pub fn parse_config_file(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("--config {}: {e}", path.display())))?;
    parse_config_text(&text, &path.display().to_string())
}

/// Flags over the optional config file.
pub fn merged(flags: &Settings, config: Option<&Path>) -> Result<Settings, CliError> {
    let file = config
        .map(parse_config_file)
        .transpose()?
        .unwrap_or_default();
    Ok(flags.clone().or(file))
}

pub fn data_dir(s: &Settings) -> PathBuf {
    s.data_dir
        .clone()
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"))
}

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

fn existing(path: Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    let path = path.ok_or_else(|| usage(format!("missing {flag}")))?;
    if !path.is_file() {
        return Err(usage(format!("{flag}: no such file {}", path.display())));
    }
    Ok(path)
}

pub fn dataset(s: &Settings) -> Result<DatasetDescriptor, CliError> {
    let idx_given = s.dataset.is_some()
        || s.idx_images.is_some()
        || s.idx_labels.is_some()
        || s.idx_test_images.is_some()
        || s.idx_test_labels.is_some();
    match s.synth {
        Some(SynthKind::Blobs) => {
            if idx_given {
                return Err(usage(
                    "--synth cannot be combined with --dataset or --idx-* paths",
                ));
            }
            Ok(DatasetDescriptor::Blobs {
                spec: BlobSpec {
                    class_count: s.blob_classes.unwrap_or(DEFAULT_BLOB_CLASSES),
                    per_class: s.blob_per_class.unwrap_or(DEFAULT_BLOB_PER_CLASS),
                    dim: s.blob_dim.unwrap_or(DEFAULT_BLOB_DIM),
                    spread: s.blob_spread.unwrap_or(DEFAULT_BLOB_SPREAD),
                    shift: 0.0,
                },
                test_per_class: s.blob_test_per_class.unwrap_or(DEFAULT_BLOB_TEST_PER_CLASS),
                data_seed: s.data_seed.unwrap_or(0),
            })
        }
        None if idx_given => {
            let (base, flag) = match &s.dataset {
                Some(name) => (Some(data_dir(s).join(name)), "--dataset"),
                None => (None, ""),
            };
            let pick =
                |explicit: &Option<PathBuf>, file: &str, own: &'static str| match (explicit, &base)
                {
                    (Some(p), _) => existing(Some(p.clone()), own),
                    (None, Some(dir)) => existing(Some(dir.join(file)), flag),
                    (None, None) => existing(None, own),
                };
            Ok(DatasetDescriptor::Idx {
                train_images: pick(&s.idx_images, TRAIN_IMAGES, "--idx-images")?,
                train_labels: pick(&s.idx_labels, TRAIN_LABELS, "--idx-labels")?,
                test_images: pick(&s.idx_test_images, TEST_IMAGES, "--idx-test-images")?,
                test_labels: pick(&s.idx_test_labels, TEST_LABELS, "--idx-test-labels")?,
                train_limit: s.limit,
                test_limit: s.test_limit,
            })
        }
        None => Err(usage(
            "no data source: pass --synth blobs, --dataset NAME or --idx-images/--idx-labels",
        )),
    }
}

pub fn seeds(s: &Settings) -> Result<Vec<u64>, CliError> {
    match (&s.seed, &s.seeds) {
        (Some(_), Some(_)) => Err(usage("--seed and --seeds are mutually exclusive")),
        (_, Some(list)) => Ok(list.0.clone()),
        (seed, None) => Ok(vec![seed.unwrap_or(0)]),
    }
}

/// Defaults overridden by every set field; validated.
pub fn train_config(s: &Settings) -> Result<TrainConfig, CliError> {
    let mut cfg = TrainConfig::default();
    macro_rules! set {
        ($($src:ident => $($dst:ident).+),* $(,)?) => {
            $(if let Some(v) = s.$src.clone() { cfg.$($dst).+ = v; })*
        };
    }
    set!(
        baseline => baseline,
        tau => tau,
        epsilon => dfl.epsilon,
        gamma_min => dfl.gamma_clamp.lo,
        gamma_max => dfl.gamma_clamp.hi,
        lambda => lambda_joint,
        lr => lr,
        lr_finetune => lr_finetune,
        momentum => momentum,
        weight_decay => weight_decay,
        ohem_keep => ohem_keep_fraction,
        epochs_cls => epochs_classifier,
        epochs_est => epochs_estimator,
        epochs_ft => epochs_finetune,
        batch => batch_size,
        bins => histogram_bins,
    );
    if let Some(g) = s.gamma {
        cfg.dfl.gamma = GammaMode::Fixed(g);
    }
    if let Some(w) = &s.encoder {
        cfg.encoder_widths = w.0.clone();
    }
    if let Some(w) = &s.uncertainty_hidden {
        cfg.uncertainty_hidden = w.0.clone();
    }
    cfg.seed = seeds(s)?[0];
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}
