//! End-to-end acceptance checks. Runs every criterion in order, prints one
//! `PASS`/`FAIL` line for each and exits non-zero when any fails.
//!
//! The image criteria read `$BTCP_DATA_DIR` (default `<repo>/data`), as
//! produced by `scripts/fetch-data.sh`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use btcp::data::{synth_blobs, BlobSpec, Split};
use btcp::losses::{
    auto_gamma, focal_loss_with_grad, ohem_regression_loss, EstimatorObjective, GammaClamp,
    UncertaintyPopulation,
};
use btcp::metrics::{auroc, bacc, confusion, fnr, fpr, UncertaintySample};
use btcp::nn::{
    cross_entropy_loss, finite_diff_check, softmax, Activation, BlockSet, BtcpNetwork, DenseLayer,
    Matrix, OutputGrads, Stack, XorShift64Star,
};
use btcp::report::ExperimentReport;
use btcp::train::{run_btcp, BaselineMode, RunOptions, TrainConfig};
use serde_json::Value;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data_dir() -> PathBuf {
    std::env::var_os("BTCP_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| repo().join("data"))
}

fn btcp_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_btcp"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!(
            "btcp {} exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

// ---------------------------------------------------------------- gradients

fn random_stack(rng: &mut XorShift64Star, dims: &[usize], last: Activation) -> Stack {
    let acts = [Activation::Identity, Activation::Relu, Activation::Sigmoid];
    let layers = dims
        .windows(2)
        .enumerate()
        .map(|(i, d)| {
            let act = if i + 2 == dims.len() {
                last
            } else {
                acts[rng.below(3)]
            };
            let w = (0..d[0] * d[1]).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let b = (0..d[1]).map(|_| rng.uniform(-0.5, 0.5)).collect();
            DenseLayer::new(Matrix::new(d[1], d[0], w).unwrap(), b, act).unwrap()
        })
        .collect();
    Stack::new(layers).unwrap()
}

fn random_network(rng: &mut XorShift64Star) -> BtcpNetwork {
    let input = 2 + rng.below(4);
    let hidden = 2 + rng.below(4);
    let feat = 2 + rng.below(4);
    let classes = 2 + rng.below(3);
    let encoder_last = [Activation::Relu, Activation::Sigmoid, Activation::Identity][rng.below(3)];
    BtcpNetwork::new(
        random_stack(rng, &[input, hidden, feat], encoder_last),
        random_stack(rng, &[feat, 3, classes], Activation::Identity),
        random_stack(rng, &[feat, 3, 1], Activation::Sigmoid),
    )
    .unwrap()
}

type LogitLoss = fn(&[f64], usize, f64) -> (f64, Vec<f64>);

fn ce_logits(z: &[f64], y: usize, _: f64) -> (f64, Vec<f64>) {
    cross_entropy_loss(&softmax(z), y).unwrap()
}

fn focal_logits(z: &[f64], y: usize, gamma: f64) -> (f64, Vec<f64>) {
    focal_loss_with_grad(&softmax(z), y, gamma).unwrap()
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let mut rng = XorShift64Star::new(0x5eed);
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    let mut failures = Vec::new();
    for trial in 0..100 {
        let net = random_network(&mut rng);
        let n = 1 + rng.below(5);
        let x = Matrix::new(
            n,
            net.input_dim(),
            (0..n * net.input_dim())
                .map(|_| rng.uniform(-1.0, 1.0))
                .collect(),
        )
        .unwrap();
        let labels: Vec<usize> = (0..n).map(|_| rng.below(net.class_count())).collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let dens: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let gamma = rng.uniform(0.0, 4.0);
        let keep = rng.uniform(0.2, 1.0);

        let logit_loss = |f: LogitLoss| {
            let (x, labels) = (&x, &labels);
            move |net: &BtcpNetwork| {
                let pass = net.forward(x)?;
                let k = pass.logits.cols();
                let mut loss = 0.0;
                let mut g = Vec::with_capacity(n * k);
                for (r, &y) in labels.iter().enumerate() {
                    let (l, d) = f(pass.logits.row(r), y, gamma);
                    loss += l / n as f64;
                    g.extend(d.into_iter().map(|v| v / n as f64));
                }
                let grads = net.backward(
                    &pass.cache,
                    &OutputGrads {
                        logits: Some(Matrix::new(n, k, g)?),
                        uncertainty: None,
                    },
                    BlockSet::CLASSIFIER_STAGE,
                )?;
                Ok((loss, grads))
            }
        };
        let head_loss = |obj: EstimatorObjective| {
            let (x, targets, dens) = (&x, &targets, &dens);
            move |net: &BtcpNetwork| {
                let pass = net.forward(x)?;
                let (loss, du) = obj.batch_loss(&pass.uncertainty, targets, dens, gamma)?;
                let grads = net.backward(
                    &pass.cache,
                    &OutputGrads {
                        logits: None,
                        uncertainty: Some(du),
                    },
                    BlockSet::ALL,
                )?;
                Ok((loss, grads))
            }
        };
        let reports = [
            (
                "CE",
                finite_diff_check(&net, logit_loss(ce_logits), 1e-5, 1e-4),
            ),
            (
                "FL",
                finite_diff_check(&net, logit_loss(focal_logits), 1e-5, 1e-4),
            ),
            (
                "DFL",
                finite_diff_check(
                    &net,
                    head_loss(EstimatorObjective::Dfl {
                        zero_density: false,
                    }),
                    1e-5,
                    1e-4,
                ),
            ),
            (
                "OHEM",
                finite_diff_check(
                    &net,
                    head_loss(EstimatorObjective::Ohem {
                        keep_fraction: keep,
                    }),
                    1e-5,
                    1e-4,
                ),
            ),
        ];
        for (name, report) in reports {
            let report = match report {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("trial {trial} {name}: {e}"));
                    continue;
                }
            };
            checks += report.blocks.len();
            worst = worst.max(report.worst());
            if !report.passed() {
                failures.push(format!("trial {trial} {name}: {:?}", report.failing()));
            }
        }
    }
    // The OHEM selection itself is a hard mask; check its loss against a direct
    // mean over the kept entries as well.
    let (l, mask) = ohem_regression_loss(&[0.4, 0.1, 0.9, 0.3], 0.5).unwrap();
    if (l - 0.65).abs() > 1e-15 || mask != [true, false, true, false] {
        failures.push(format!("ohem selection: loss {l}, mask {mask:?}"));
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && worst < 1e-4 && elapsed < Duration::from_secs(30);
    let mut detail = format!(
        "100 random networks x (CE, FL, DFL, OHEM), {checks} parameter tensors, max relative error {worst:.2e} (< 1e-4), {}",
        secs(elapsed)
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; failures: {}", failures.join("; ")));
    }
    outcome(pass, detail)
}

// -------------------------------------------------------------------- gamma

fn gamma_formula() -> Outcome {
    let n = 1000usize;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let pop = UncertaintyPopulation::new(grid, 0.05).unwrap();
    let g = auto_gamma(&pop, GammaClamp::default()).unwrap();
    let nf = n as f64;
    let expected = nf * nf / (nf * nf - 1.0);
    let grid_err = (g - expected).abs();

    let mut rng = XorShift64Star::new(7);
    let mut within = 0;
    for _ in 0..100 {
        let scores: Vec<f64> = (0..10_000).map(|_| rng.next_f64()).collect();
        let pop = UncertaintyPopulation::new(scores, 0.05).unwrap();
        if (auto_gamma(&pop, GammaClamp::default()).unwrap() - 1.0).abs() < 0.05 {
            within += 1;
        }
    }
    outcome(
        grid_err < 1e-9 && within >= 95,
        format!("grid N=1000: |γ − N²/(N²−1)| = {grid_err:.1e} (< 1e-9); uniform n=10⁴: {within}/100 within 0.05 of 1 (≥ 95)"),
    )
}

// ------------------------------------------------------------ DFL degeneracy

fn dfl_degeneracy() -> Outcome {
    let spec = BlobSpec {
        class_count: 3,
        per_class: 500,
        dim: 2,
        spread: 0.5,
        shift: 0.0,
    };
    let train = synth_blobs(&spec, 11, Split::Train).unwrap();
    let test = synth_blobs(
        &BlobSpec {
            per_class: 1000,
            ..spec
        },
        11,
        Split::Test,
    )
    .unwrap();
    let cfg = TrainConfig {
        baseline: BaselineMode::TcpMse,
        ..blob_config()
    };
    let zeroed = run_btcp(&train, &test, &cfg, &RunOptions::default()).unwrap();
    let mse_opts = RunOptions {
        objective: Some(EstimatorObjective::Mse),
        ..RunOptions::default()
    };
    let mse = run_btcp(&train, &test, &cfg, &mse_opts).unwrap();
    let a: Vec<f64> = zeroed
        .report
        .epochs
        .iter()
        .flat_map(|e| e.batch_losses.clone())
        .collect();
    let b: Vec<f64> = mse
        .report
        .epochs
        .iter()
        .flat_map(|e| e.batch_losses.clone())
        .collect();
    let worst = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    outcome(
        a.len() == b.len() && !a.is_empty() && worst <= 1e-12,
        format!(
            "{} batch losses over all stages, max |Δ| = {worst:.1e} (≤ 1e-12)",
            a.len()
        ),
    )
}

fn blob_config() -> TrainConfig {
    TrainConfig {
        lr: 0.05,
        lr_finetune: 0.005,
        epochs_classifier: 10,
        epochs_estimator: 100,
        epochs_finetune: 2,
        encoder_widths: vec![32, 16],
        uncertainty_hidden: vec![16],
        dfl: btcp::losses::DflConfig {
            epsilon: 0.2,
            ..Default::default()
        },
        ..TrainConfig::default()
    }
}

// -------------------------------------------------------------------- AUROC

fn auroc_oracle() -> Outcome {
    let mut rng = XorShift64Star::new(99);
    let mut mismatches = 0;
    for trial in 0..200 {
        let n = 2 + rng.below(499);
        let levels = if trial % 2 == 0 { 20 } else { 1_000_000 };
        let mut s: Vec<UncertaintySample> = (0..n)
            .map(|_| {
                UncertaintySample::new(
                    rng.below(levels + 1) as f64 / levels as f64,
                    rng.next_f64() < 0.6,
                )
                .unwrap()
            })
            .collect();
        s[0].correct = true;
        s[1].correct = false;
        let mut doubled = 0u64;
        let mut pairs = 0u64;
        for bad in s.iter().filter(|x| !x.correct) {
            for good in s.iter().filter(|x| x.correct) {
                pairs += 1;
                doubled += match bad.u.partial_cmp(&good.u).unwrap() {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
            }
        }
        if auroc(&s).unwrap() != doubled as f64 / (2 * pairs) as f64 {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("200 instances (n ≤ 500, half with heavy ties), {mismatches} mismatches against pair counting"))
}

// ---------------------------------------------------------- four-sample fixture

fn table_fixture() -> Outcome {
    let s: Vec<UncertaintySample> = [(0.2, true), (0.2, false), (0.8, true), (0.8, false)]
        .iter()
        .map(|&(u, c)| UncertaintySample::new(u, c).unwrap())
        .collect();
    let c = confusion(&s, 0.5).unwrap();
    let cells = (c.tp, c.fp, c.fn_, c.tn);
    let (b, p, n) = (bacc(&c).unwrap(), fpr(&c).unwrap(), fnr(&c).unwrap());
    outcome(
        cells == (1, 1, 1, 1) && b == 0.5 && p == 0.5 && n == 0.5,
        format!("cells {cells:?}, BACC {b}, FPR {p}, FNR {n}"),
    )
}

// ------------------------------------------------------- experiment sweeps

struct Sweep {
    dir: PathBuf,
    reports: Vec<ExperimentReport>,
    elapsed: Duration,
}

fn sweep(
    root: &Path,
    name: &str,
    config: &str,
    baseline: &str,
    extra: &[&str],
) -> Result<Sweep, String> {
    let dir = root.join(name);
    let start = Instant::now();
    let conf = repo().join("configs").join(config);
    let mut args = vec![
        "train",
        "--config",
        conf.to_str().unwrap(),
        "--baseline",
        baseline,
        "--out",
        dir.to_str().unwrap(),
        "--parallel",
    ];
    args.extend_from_slice(extra);
    btcp_cli(&args)?;
    let elapsed = start.elapsed();
    let mut reports = Vec::new();
    for seed in 0..5 {
        let path = dir.join(format!("seed-{seed}/report.json"));
        reports.push(
            ExperimentReport::load_json(&path).map_err(|e| format!("{}: {e}", path.display()))?,
        );
    }
    Ok(Sweep {
        dir,
        reports,
        elapsed,
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_fpr(s: &Sweep) -> Option<f64> {
    let v: Option<Vec<f64>> = s
        .reports
        .iter()
        .map(|r| r.final_metrics.failure.map(|f| f.fpr))
        .collect();
    v.map(|v| mean(v.into_iter()))
}

fn blob_claim(btcp: &Sweep, mse: &Sweep) -> Outcome {
    let stat = |s: &Sweep, f: fn(&ExperimentReport) -> f64| mean(s.reports.iter().map(f));
    let (bm, bs) = (
        stat(btcp, |r| r.final_metrics.uncertainty_mean),
        stat(btcp, |r| r.final_metrics.uncertainty_std),
    );
    let (mm, ms) = (
        stat(mse, |r| r.final_metrics.uncertainty_mean),
        stat(mse, |r| r.final_metrics.uncertainty_std),
    );
    let accs: Vec<f64> = btcp
        .reports
        .iter()
        .chain(&mse.reports)
        .map(|r| r.final_metrics.test_accuracy)
        .collect();
    let band = accs.iter().all(|&a| a > 0.6 && a < 0.95);
    let elapsed = btcp.elapsed + mse.elapsed;
    outcome(
        bm > mm && bs > ms && band && elapsed < Duration::from_secs(300),
        format!(
            "5-seed mean of test uncertainty mean {bm:.4} vs {mm:.4}, std {bs:.4} vs {ms:.4} (BTCP vs tcp_mse); accuracy {:.3}..{:.3} in (0.6, 0.95); {}",
            accs.iter().cloned().fold(f64::INFINITY, f64::min),
            accs.iter().cloned().fold(0.0, f64::max),
            secs(elapsed)
        ),
    )
}

fn fpr_claim(blobs: (&Sweep, &Sweep), mnist: Result<(&Sweep, &Sweep), &String>) -> Outcome {
    let (Some(b_btcp), Some(b_mse)) = (mean_fpr(blobs.0), mean_fpr(blobs.1)) else {
        return outcome(false, "a blob run had no misclassifications, FPR undefined");
    };
    let (mb, mm) = match mnist {
        Ok(pair) => pair,
        Err(e) => {
            return outcome(
                false,
                format!("blobs FPR {b_btcp:.4} vs {b_mse:.4}; MNIST unavailable: {e}"),
            )
        }
    };
    let (Some(m_btcp), Some(m_mse)) = (mean_fpr(mb), mean_fpr(mm)) else {
        return outcome(
            false,
            "an MNIST run had no misclassifications, FPR undefined",
        );
    };
    let min_acc = mb
        .reports
        .iter()
        .chain(&mm.reports)
        .map(|r| r.final_metrics.test_accuracy)
        .fold(1.0, f64::min);
    let elapsed = blobs.0.elapsed + blobs.1.elapsed + mb.elapsed + mm.elapsed;
    outcome(
        b_btcp < b_mse && m_btcp < m_mse && min_acc > 0.90 && elapsed < Duration::from_secs(900),
        format!(
            "5-seed mean FPR(τ=0.5) BTCP vs tcp_mse: blobs {b_btcp:.4} vs {b_mse:.4}, MNIST {m_btcp:.4} vs {m_mse:.4}; lowest MNIST accuracy {min_acc:.4} (> 0.90); {}",
            secs(elapsed)
        ),
    )
}

fn ood_eval(s: &Sweep) -> Result<Vec<(f64, f64)>, String> {
    let data = data_dir();
    (0..5)
        .map(|seed| {
            let out = s.dir.join(format!("seed-{seed}/ood"));
            let ck = s.dir.join(format!("seed-{seed}/checkpoints/final.json"));
            btcp_cli(&[
                "ood",
                "--checkpoint",
                ck.to_str().unwrap(),
                "--data-dir",
                data.to_str().unwrap(),
                "--dataset",
                "mnist",
                "--ood-dataset",
                "fashion-mnist",
                "--ood-limit",
                "2000",
                "--out",
                out.to_str().unwrap(),
            ])?;
            let v: Value = serde_json::from_str(
                &std::fs::read_to_string(out.join("ood.json")).map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            Ok((v["au_in"].as_f64().unwrap(), v["au_ood"].as_f64().unwrap()))
        })
        .collect()
}

fn ood_claim(mnist: Result<(&Sweep, &Sweep), &String>) -> Outcome {
    let (b, m) = match mnist {
        Ok(pair) => pair,
        Err(e) => return outcome(false, format!("MNIST unavailable: {e}")),
    };
    let start = Instant::now();
    let (btcp, mse) = match (ood_eval(b), ood_eval(m)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e),
    };
    let elapsed = b.elapsed + m.elapsed + start.elapsed();
    let b_in = mean(btcp.iter().map(|p| p.0));
    let b_ood = mean(btcp.iter().map(|p| p.1));
    let m_ood = mean(mse.iter().map(|p| p.1));
    outcome(
        b_ood > m_ood && b_ood > b_in && elapsed < Duration::from_secs(900),
        format!(
            "MNIST in / Fashion-MNIST out, 5-seed mean AU(ood) BTCP {b_ood:.4} vs tcp_mse {m_ood:.4}; BTCP AU(ood) {b_ood:.4} > AU(in) {b_in:.4}; {}",
            secs(elapsed)
        ),
    )
}

fn determinism(root: &Path, original: &Sweep) -> Outcome {
    let rerun = root.join("rerun");
    let manifest = original.dir.join("manifest.json");
    if let Err(e) = btcp_cli(&[
        "train",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        rerun.to_str().unwrap(),
    ]) {
        return outcome(false, e);
    }
    let mut differing = Vec::new();
    for seed in 0..5 {
        let rel = format!("seed-{seed}/epochs.csv");
        if std::fs::read(original.dir.join(&rel)).ok() != std::fs::read(rerun.join(&rel)).ok() {
            differing.push(rel);
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "manifest of the 5-seed parallel blob sweep re-run sequentially: {} of 5 epochs.csv byte-identical",
            5 - differing.len()
        ),
    )
}

fn histogram_contract(sweeps: &[&Sweep]) -> Outcome {
    let mut checked = 0;
    let mut problems = Vec::new();
    for s in sweeps {
        for (seed, r) in s.reports.iter().enumerate() {
            let path = s.dir.join(format!("seed-{seed}/report.json"));
            match btcp_cli(&["hist", path.to_str().unwrap()]) {
                Ok(text) => {
                    let mut rd = csv::Reader::from_reader(text.as_bytes());
                    let counts: Vec<usize> = rd
                        .records()
                        .map(|rec| rec.unwrap()[2].parse().unwrap())
                        .collect();
                    if counts.len() != 50 || counts.iter().sum::<usize>() != r.test_size {
                        problems.push(format!(
                            "{}: {} bins, sum {}",
                            path.display(),
                            counts.len(),
                            counts.iter().sum::<usize>()
                        ));
                    }
                    checked += 1;
                }
                Err(e) => problems.push(e),
            }
        }
    }
    outcome(
        problems.is_empty() && checked > 0,
        if problems.is_empty() {
            format!("{checked} reports: 50 bins each, counts sum to the test-set size")
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    let root = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(&str, Outcome)> = vec![
        ("gradient correctness", gradients()),
        ("gamma formula", gamma_formula()),
        ("DFL degeneracy", dfl_degeneracy()),
        ("AUROC oracle equivalence", auroc_oracle()),
        ("metric definitions (4-sample fixture)", table_fixture()),
    ];

    let blobs = sweep(
        root.path(),
        "blobs-btcp",
        "blobs.conf",
        "btcp",
        &["--checkpoints", "none"],
    )
    .and_then(|b| {
        Ok((
            b,
            sweep(
                root.path(),
                "blobs-mse",
                "blobs.conf",
                "tcp_mse",
                &["--checkpoints", "none"],
            )?,
        ))
    });
    let data = data_dir();
    let mnist_extra = [
        "--checkpoints",
        "final",
        "--data-dir",
        data.to_str().unwrap(),
    ];
    let mnist = if data.join("mnist").is_dir() && data.join("fashion-mnist").is_dir() {
        sweep(
            root.path(),
            "mnist-btcp",
            "mnist.conf",
            "btcp",
            &mnist_extra,
        )
        .and_then(|b| {
            Ok((
                b,
                sweep(
                    root.path(),
                    "mnist-mse",
                    "mnist.conf",
                    "tcp_mse",
                    &mnist_extra,
                )?,
            ))
        })
    } else {
        Err(format!(
            "{} lacks mnist/ and fashion-mnist/ (run scripts/fetch-data.sh)",
            data.display()
        ))
    };
    let mnist_ref = mnist.as_ref().map(|(a, b)| (a, b));

    match &blobs {
        Ok((b, m)) => {
            results.push((
                "distributional-imbalance claim (blobs mean/std)",
                blob_claim(b, m),
            ));
            results.push((
                "failure-prediction claim (FPR, blobs + MNIST)",
                fpr_claim((b, m), mnist_ref),
            ));
        }
        Err(e) => {
            results.push((
                "distributional-imbalance claim (blobs mean/std)",
                outcome(false, e.clone()),
            ));
            results.push((
                "failure-prediction claim (FPR, blobs + MNIST)",
                outcome(false, e.clone()),
            ));
        }
    }
    results.push(("OOD claim (MNIST vs Fashion-MNIST)", ood_claim(mnist_ref)));
    match &blobs {
        Ok((b, _)) => results.push(("determinism (manifest re-run)", determinism(root.path(), b))),
        Err(e) => results.push(("determinism (manifest re-run)", outcome(false, e.clone()))),
    }
    let mut produced: Vec<&Sweep> = Vec::new();
    if let Ok((a, b)) = &blobs {
        produced.extend([a, b]);
    }
    if let Ok((a, b)) = &mnist {
        produced.extend([a, b]);
    }
    results.push(("histogram contract", histogram_contract(&produced)));

    println!();
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "{} [{:>2}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!(
        "\nacceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
