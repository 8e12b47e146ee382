use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use btcp::data::{load_idx, synth_blobs, BlobSpec, LabeledDataset, Split};
use btcp::report::DatasetDescriptor;
use btcp::train::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::args::CheckpointMode;

pub const MANIFEST_FORMAT: &str = "btcp-manifest";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce a `train` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub tool_version: String,
    pub command: String,
    /// Seconds since the Unix epoch; the only field that differs between
    /// otherwise identical runs.
    pub created_unix: u64,
    /// Resolved configuration; `seed` is replaced per run.
    pub config: TrainConfig,
    pub dataset: DatasetDescriptor,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub checkpoints: CheckpointMode,
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn new(
        config: TrainConfig,
        dataset: DatasetDescriptor,
        seeds: Vec<u64>,
        out_dir: PathBuf,
        checkpoints: CheckpointMode,
    ) -> Self {
        Self {
            format: MANIFEST_FORMAT.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: "train".to_string(),
            created_unix: now_unix(),
            config,
            dataset,
            seeds,
            out_dir,
            checkpoints,
        }
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let manifest: Self = serde_json::from_str(&text)?;
        anyhow::ensure!(
            manifest.format == MANIFEST_FORMAT,
            "{} is not a run manifest (format {:?})",
            path.display(),
            manifest.format
        );
        anyhow::ensure!(!manifest.seeds.is_empty(), "manifest lists no seeds");
        Ok(manifest)
    }

    pub fn seed_dir(&self, seed: u64) -> PathBuf {
        self.out_dir.join(format!("seed-{seed}"))
    }
}

/// Regenerates or reloads the train and test splits a descriptor names.
pub fn load_dataset(desc: &DatasetDescriptor) -> btcp::Result<(LabeledDataset, LabeledDataset)> {
    match desc {
        DatasetDescriptor::Blobs {
            spec,
            test_per_class,
            data_seed,
        } => {
            let train = synth_blobs(spec, *data_seed, Split::Train)?;
            let test_spec = BlobSpec {
                per_class: *test_per_class,
                ..spec.clone()
            };
            let test = synth_blobs(&test_spec, *data_seed, Split::Test)?;
            Ok((train, test))
        }
        DatasetDescriptor::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
            train_limit,
            test_limit,
        } => Ok((
            load_idx(train_images, train_labels, *train_limit, Split::Train)?,
            load_idx(test_images, test_labels, *test_limit, Split::Test)?,
        )),
    }
}
