use btcp::data::{load_idx_unlabeled, make_ood_pair, synth_blobs, BlobSpec, Split};
use btcp::nn::Checkpoint;
use btcp::report::{write_csv, DatasetDescriptor};
use btcp::train::{evaluate_ood, OodReport};

use crate::args::OodArgs;
use crate::error::{usage, CliError};
use crate::manifest::load_dataset;
use crate::settings::{self, TEST_IMAGES};

pub fn ood(args: &OodArgs) -> Result<OodReport, CliError> {
    let s = settings::merged(&args.settings, args.config.as_deref())?;
    let tau = s.tau.unwrap_or(btcp::metrics::DEFAULT_TAU);
    if !(0.0..=1.0).contains(&tau) {
        return Err(usage(format!("--tau {tau} outside [0, 1]")));
    }
    let chosen = [
        args.ood_dataset.is_some(),
        args.ood_idx_images.is_some(),
        args.ood_synth_shift.is_some(),
    ];
    if chosen.iter().filter(|&&c| c).count() != 1 {
        return Err(usage(
            "pass exactly one of --ood-dataset, --ood-idx-images or --ood-synth-shift",
        ));
    }
    if !args.checkpoint.is_file() {
        return Err(usage(format!(
            "--checkpoint: no such file {}",
            args.checkpoint.display()
        )));
    }
    let desc = settings::dataset(&s)?;
    let ood_path = match (&args.ood_dataset, &args.ood_idx_images) {
        (Some(name), _) => Some((
            settings::data_dir(&s).join(name).join(TEST_IMAGES),
            "--ood-dataset",
        )),
        (None, Some(p)) => Some((p.clone(), "--ood-idx-images")),
        (None, None) => None,
    };
    if let Some((p, flag)) = &ood_path {
        if !p.is_file() {
            return Err(usage(format!("{flag}: no such file {}", p.display())));
        }
    }

    let net = Checkpoint::load(&args.checkpoint)?.network;
    let (_, in_ds) = load_dataset(&desc)?;
    let ood_ds = match (ood_path, args.ood_synth_shift) {
        (Some((p, _)), _) => load_idx_unlabeled(&p, args.ood_limit, Split::Test)?,
        (None, Some(shift)) => {
            let DatasetDescriptor::Blobs {
                spec,
                test_per_class,
                data_seed,
            } = &desc
            else {
                return Err(usage(
                    "--ood-synth-shift needs --synth blobs in-distribution data",
                ));
            };
            let shifted = BlobSpec {
                per_class: *test_per_class,
                shift,
                ..spec.clone()
            };
            let ds = synth_blobs(&shifted, *data_seed, Split::Test)?;
            match args.ood_limit {
                Some(n) => ds.truncate(n),
                None => ds,
            }
        }
        (None, None) => unreachable!("one OOD source is required above"),
    };
    let pair = make_ood_pair(in_ds, ood_ds)?;
    let report = evaluate_ood(&net, &pair, tau)?;
    println!(
        "acc {:.4}  au_in {:.4}  au_ood {:.4}  (n_in {}, n_ood {}, tau {})",
        report.acc, report.au_in, report.au_ood, report.n_in, report.n_ood, report.tau
    );
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        std::fs::write(out.join("ood.json"), serde_json::to_string_pretty(&report)?)?;
        write_csv(&out.join("ood.csv"), &[report])?;
    }
    Ok(report)
}
