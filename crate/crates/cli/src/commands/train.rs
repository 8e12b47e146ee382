use btcp::report::{histogram_rows, write_csv, ExperimentReport};
use btcp::train::{run_many, RunOptions, TrainConfig};
use log::info;

use crate::args::{CheckpointMode, Settings, TrainArgs};
use crate::error::{usage, CliError};
use crate::manifest::{load_dataset, now_unix, RunManifest, MANIFEST_FILE};
use crate::settings;

use super::REPORT_FILE;

pub fn train(args: &TrainArgs) -> Result<Vec<ExperimentReport>, CliError> {
    let manifest = match &args.manifest {
        Some(path) => {
            if args.settings != Settings::default() || args.checkpoints.is_some() {
                return Err(usage(
                    "--manifest cannot be combined with experiment settings",
                ));
            }
            let mut m = RunManifest::load(path)
                .map_err(|e| usage(format!("--manifest {}: {e:#}", path.display())))?;
            if let Some(out) = &args.out {
                m.out_dir = out.clone();
            }
            m.created_unix = now_unix();
            m
        }
        None => {
            let s = settings::merged(&args.settings, args.config.as_deref())?;
            let out = args.out.clone().ok_or_else(|| usage("missing --out"))?;
            RunManifest::new(
                settings::train_config(&s)?,
                settings::dataset(&s)?,
                settings::seeds(&s)?,
                out,
                args.checkpoints.unwrap_or_default(),
            )
        }
    };
    execute(&manifest, args.parallel)
}

/// Writes the manifest, trains every seed and writes per-seed artifacts:
/// `report.json`, `epochs.csv`, `metrics.csv`, `histogram.csv` and
/// `checkpoints/`.
pub fn execute(manifest: &RunManifest, parallel: bool) -> Result<Vec<ExperimentReport>, CliError> {
    std::fs::create_dir_all(&manifest.out_dir)?;
    manifest.save(&manifest.out_dir.join(MANIFEST_FILE))?;
    let (train, test) = load_dataset(&manifest.dataset)?;
    info!(
        "data: {} train / {} test samples, {} features",
        train.len(),
        test.len(),
        train.dim()
    );

    let runs: Vec<(TrainConfig, RunOptions)> = manifest
        .seeds
        .iter()
        .map(|&seed| {
            let cfg = TrainConfig {
                seed,
                ..manifest.config.clone()
            };
            let opts = RunOptions {
                checkpoint_dir: (manifest.checkpoints != CheckpointMode::None)
                    .then(|| manifest.seed_dir(seed).join("checkpoints")),
                epoch_checkpoints: manifest.checkpoints == CheckpointMode::All,
                objective: None,
            };
            (cfg, opts)
        })
        .collect();
    let outcomes = run_many(&train, &test, &runs, parallel)?;

    let mut reports = Vec::with_capacity(outcomes.len());
    for (outcome, &seed) in outcomes.into_iter().zip(&manifest.seeds) {
        let mut report = outcome.report;
        report.dataset = Some(manifest.dataset.clone());
        let dir = manifest.seed_dir(seed);
        std::fs::create_dir_all(&dir)?;
        report.save_json(&dir.join(REPORT_FILE))?;
        report.write_epochs_csv(&dir.join("epochs.csv"))?;
        report.write_metrics_csv(&dir.join("metrics.csv"))?;
        write_csv(
            &dir.join("histogram.csv"),
            &histogram_rows(&report.histogram),
        )?;
        let f = &report.final_metrics;
        match f.failure {
            Some(m) => println!(
                "seed {seed}: accuracy {:.4}  bacc {:.4}  auroc {:.4}  fpr {:.4}  fnr {:.4}  au {:.4}",
                f.test_accuracy, m.bacc, m.auroc, m.fpr, m.fnr, f.uncertainty_mean
            ),
            None => println!(
                "seed {seed}: accuracy {:.4}  au {:.4}  (failure metrics undefined)",
                f.test_accuracy, f.uncertainty_mean
            ),
        }
        reports.push(report);
    }
    println!("wrote {}", manifest.out_dir.display());
    Ok(reports)
}
