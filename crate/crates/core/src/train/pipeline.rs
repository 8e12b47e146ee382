use std::path::PathBuf;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::losses::{tcp_score, EstimatorObjective, UncertaintyPopulation};
use crate::metrics::{
    distribution_stats, failure_report, histogram, FailureReport, UncertaintySample,
};
use crate::nn::{
    cross_entropy_loss, softmax, BlockSet, BtcpNetwork, Checkpoint, Matrix, NetworkGrads,
    OutputGrads, SgdConfig, SgdState, XorShift64Star,
};
use crate::report::{ExperimentReport, FinalMetrics, REPORT_SCHEMA_VERSION};

/// Rows per forward call when evaluating or snapshotting a whole dataset.
pub const EVAL_BATCH: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Classifier,
    Estimator,
    Finetune,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Classifier => "classifier",
            Stage::Estimator => "estimator",
            Stage::Finetune => "finetune",
        }
    }
}

/// Snapshot taken after one epoch of one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub stage: Stage,
    /// 1-based within the stage.
    pub epoch: usize,
    /// Mean of the batch losses.
    pub train_loss: f64,
    pub batch_losses: Vec<f64>,
    /// Exponent used this epoch (estimator and fine-tuning stages).
    pub gamma: Option<f64>,
    pub test_accuracy: f64,
    /// Failure-prediction metrics on the test split; absent during the
    /// classifier stage and when the test split has no errors (or no
    /// correct predictions).
    pub metrics: Option<FailureReport>,
    pub uncertainty_mean: Option<f64>,
    pub uncertainty_std: Option<f64>,
}

/// Predictions and uncertainty of a network on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub uncertainties: Vec<f64>,
    pub correct: Vec<bool>,
    pub failure: Option<FailureReport>,
    pub uncertainty_mean: f64,
    pub uncertainty_std: f64,
}

fn row_chunks(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n)
        .step_by(EVAL_BATCH)
        .map(move |start| (start..(start + EVAL_BATCH).min(n)).collect())
}

pub fn evaluate(net: &BtcpNetwork, ds: &LabeledDataset, tau: f64) -> Result<Evaluation> {
    if ds.is_empty() {
        return Err(Error::Contract("evaluation on an empty dataset".into()));
    }
    let mut uncertainties = Vec::with_capacity(ds.len());
    let mut correct = Vec::with_capacity(ds.len());
    for rows in row_chunks(ds.len()) {
        let pass = net.forward(&ds.features.select_rows(&rows))?;
        for (r, &i) in rows.iter().enumerate() {
            let predicted = softmax(pass.logits.row(r)).argmax();
            correct.push(predicted == ds.labels[i]);
        }
        uncertainties.extend_from_slice(&pass.uncertainty);
    }
    let samples: Vec<UncertaintySample> = uncertainties
        .iter()
        .zip(&correct)
        .map(|(&u, &c)| UncertaintySample::new(u, c))
        .collect::<Result<_>>()?;
    let failure = match failure_report(&samples, tau) {
        Ok(r) => Some(r),
        Err(Error::UndefinedMetric { .. }) => None,
        Err(e) => return Err(e),
    };
    let (uncertainty_mean, uncertainty_std) = distribution_stats(&uncertainties)?;
    let accuracy = correct.iter().filter(|&&c| c).count() as f64 / ds.len() as f64;
    Ok(Evaluation {
        accuracy,
        uncertainties,
        correct,
        failure,
        uncertainty_mean,
        uncertainty_std,
    })
}

/// TCP targets of a whole dataset under the current classifier, with their
/// density factors and the epoch's exponent. Fixed for the whole epoch.
#[derive(Debug, Clone)]
struct TargetSnapshot {
    targets: Vec<f64>,
    densities: Vec<f64>,
    gamma: f64,
}

/// Drives the three training stages on one network.
pub struct Pipeline {
    cfg: TrainConfig,
    objective: EstimatorObjective,
    net: BtcpNetwork,
    rng: XorShift64Star,
    checkpoint_dir: Option<PathBuf>,
    optimizer: Option<SgdState>,
}

impl Pipeline {
    /// Seeds the generator from `cfg.seed` and initializes a fresh network.
    pub fn new(cfg: TrainConfig, input_dim: usize, class_count: usize) -> Result<Self> {
        cfg.validate()?;
        let mut rng = XorShift64Star::new(cfg.seed);
        let net = BtcpNetwork::init(&cfg.network_spec(input_dim, class_count), &mut rng)?;
        Ok(Self::with_network(cfg, net, rng))
    }

    pub fn with_network(cfg: TrainConfig, net: BtcpNetwork, rng: XorShift64Star) -> Self {
        Self {
            objective: cfg.objective(),
            cfg,
            net,
            rng,
            checkpoint_dir: None,
            optimizer: None,
        }
    }

    /// Overrides the uncertainty objective derived from the baseline mode.
    pub fn with_objective(mut self, objective: EstimatorObjective) -> Self {
        self.objective = objective;
        self
    }

    /// Writes a checkpoint into `dir` after every epoch of every stage.
    pub fn with_checkpoints(mut self, dir: PathBuf) -> Self {
        self.checkpoint_dir = Some(dir);
        self
    }

    pub fn network(&self) -> &BtcpNetwork {
        &self.net
    }

    pub fn into_network(self) -> BtcpNetwork {
        self.net
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    fn check_input(&self, ds: &LabeledDataset) -> Result<()> {
        if ds.dim() != self.net.input_dim() {
            return Err(Error::Dimension {
                context: "dataset width vs network input",
                expected: self.net.input_dim(),
                actual: ds.dim(),
            });
        }
        if ds.len() < 2 {
            return Err(Error::Contract(
                "training needs at least two samples".into(),
            ));
        }
        if ds.class_count > self.net.class_count() {
            return Err(Error::Contract(format!(
                "dataset has {} classes, network {}",
                ds.class_count,
                self.net.class_count()
            )));
        }
        Ok(())
    }

    fn shuffled_batches(&mut self, n: usize) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = (0..n).collect();
        self.rng.shuffle(&mut order);
        order
            .chunks(self.cfg.batch_size)
            .map(<[usize]>::to_vec)
            .collect()
    }

    fn record(
        &self,
        stage: Stage,
        epoch: usize,
        batch_losses: Vec<f64>,
        gamma: Option<f64>,
        test: &LabeledDataset,
    ) -> Result<EpochRecord> {
        let eval = evaluate(&self.net, test, self.cfg.tau)?;
        let with_uncertainty = stage != Stage::Classifier;
        let train_loss = batch_losses.iter().sum::<f64>() / batch_losses.len().max(1) as f64;
        let record = EpochRecord {
            stage,
            epoch,
            train_loss,
            batch_losses,
            gamma,
            test_accuracy: eval.accuracy,
            metrics: if with_uncertainty { eval.failure } else { None },
            uncertainty_mean: with_uncertainty.then_some(eval.uncertainty_mean),
            uncertainty_std: with_uncertainty.then_some(eval.uncertainty_std),
        };
        info!(
            "{} epoch {}: loss {:.6}, test acc {:.4}{}",
            stage.as_str(),
            epoch,
            record.train_loss,
            record.test_accuracy,
            record
                .metrics
                .map(|m| format!(", fpr {:.4}, auroc {:.4}", m.fpr, m.auroc))
                .unwrap_or_default()
        );
        Ok(record)
    }

    fn checkpoint(&self, stage: Stage, epoch: usize, opt: &SgdState) -> Result<()> {
        if let Some(dir) = &self.checkpoint_dir {
            std::fs::create_dir_all(dir)?;
            let ck = Checkpoint::new(
                stage.as_str(),
                epoch,
                self.net.clone(),
                Some(opt.clone()),
                self.rng.state(),
            );
            ck.save(&dir.join(format!("{}-{epoch:03}.json", stage.as_str())))?;
        }
        Ok(())
    }

    fn snapshot(&self, logits: &Matrix, labels: &[usize]) -> Result<TargetSnapshot> {
        let targets = (0..labels.len())
            .map(|i| tcp_score(&softmax(logits.row(i)), labels[i]))
            .collect::<Result<Vec<f64>>>()?;
        let pop = UncertaintyPopulation::new(targets.clone(), self.cfg.dfl.epsilon)?;
        if pop.variance() < crate::losses::ZERO_VARIANCE {
            warn!("TCP targets have zero variance; using the clamped gamma");
        }
        let gamma = self.cfg.dfl.resolve_gamma(&pop)?;
        let densities = targets
            .iter()
            .map(|&u| pop.density(u))
            .collect::<Result<Vec<f64>>>()?;
        Ok(TargetSnapshot {
            targets,
            densities,
            gamma,
        })
    }

    fn full_logits(&self, ds: &LabeledDataset) -> Result<Matrix> {
        let mut data = Vec::with_capacity(ds.len() * self.net.class_count());
        for rows in row_chunks(ds.len()) {
            let pass = self.net.forward(&ds.features.select_rows(&rows))?;
            data.extend_from_slice(pass.logits.as_slice());
        }
        Matrix::new(ds.len(), self.net.class_count(), data)
    }

    /// Stage 1: cross-entropy on the classifier head and encoder.
    pub fn train_classifier(
        &mut self,
        train: &LabeledDataset,
        test: &LabeledDataset,
    ) -> Result<Vec<EpochRecord>> {
        self.check_input(train)?;
        let mut opt = SgdState::new(self.cfg.sgd(), &self.net)?;
        let mut records = Vec::new();
        for epoch in 1..=self.cfg.epochs_classifier {
            let batches = self.shuffled_batches(train.len());
            let mut losses = Vec::with_capacity(batches.len());
            for (b, idx) in batches.iter().enumerate() {
                let pass = self.net.forward(&train.features.select_rows(idx))?;
                let (loss, d_logits) = batch_cross_entropy(&pass.logits, idx, &train.labels)?;
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss {
                        stage: Stage::Classifier.as_str(),
                        epoch,
                        batch: b,
                    });
                }
                let grads = self.net.backward(
                    &pass.cache,
                    &OutputGrads {
                        logits: Some(d_logits),
                        uncertainty: None,
                    },
                    BlockSet::CLASSIFIER_STAGE,
                )?;
                opt.step(&mut self.net, &grads)?;
                losses.push(loss);
            }
            records.push(self.record(Stage::Classifier, epoch, losses, None, test)?);
            self.checkpoint(Stage::Classifier, epoch, &opt)?;
        }
        self.optimizer = Some(opt);
        Ok(records)
    }

    /// Stage 2: regress the uncertainty head onto TCP targets. Encoder and
    /// classifier are frozen, so encoder features are computed once.
    pub fn train_estimator(
        &mut self,
        train: &LabeledDataset,
        test: &LabeledDataset,
    ) -> Result<Vec<EpochRecord>> {
        self.check_input(train)?;
        let mut opt = SgdState::new(self.cfg.sgd(), &self.net)?;
        let mut records = Vec::new();
        if self.cfg.epochs_estimator == 0 {
            self.optimizer = Some(opt);
            return Ok(records);
        }
        let mut features = Vec::new();
        for rows in row_chunks(train.len()) {
            let cache = self
                .net
                .encoder()
                .forward(train.features.select_rows(&rows))?;
            features.extend_from_slice(cache.output().as_slice());
        }
        let feat_dim = self.net.encoder().out_dim().expect("validated");
        let features = Matrix::new(train.len(), feat_dim, features)?;

        for epoch in 1..=self.cfg.epochs_estimator {
            let logits = self
                .net
                .classifier()
                .forward(features.clone())?
                .into_output();
            let snap = self.snapshot(&logits, &train.labels)?;
            let batches = self.shuffled_batches(train.len());
            let mut losses = Vec::with_capacity(batches.len());
            for (b, idx) in batches.iter().enumerate() {
                let head = self.net.uncertainty_head();
                let cache = head.forward(features.select_rows(idx))?;
                let u_hat = cache.output().as_slice();
                let (loss, grad) = self.estimator_loss(u_hat, idx, &snap)?;
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss {
                        stage: Stage::Estimator.as_str(),
                        epoch,
                        batch: b,
                    });
                }
                let (g, _) = head.backward(&cache, Matrix::new(idx.len(), 1, grad)?, false)?;
                let grads = NetworkGrads {
                    uncertainty: Some(g),
                    ..NetworkGrads::default()
                };
                opt.step(&mut self.net, &grads)?;
                losses.push(loss);
            }
            records.push(self.record(Stage::Estimator, epoch, losses, Some(snap.gamma), test)?);
            self.checkpoint(Stage::Estimator, epoch, &opt)?;
        }
        self.optimizer = Some(opt);
        Ok(records)
    }

    /// Stage 3: joint loss `CE + λ·L_u` over every block at the fine-tuning
    /// learning rate. Targets are refreshed at the start of each epoch.
    pub fn finetune(
        &mut self,
        train: &LabeledDataset,
        test: &LabeledDataset,
    ) -> Result<Vec<EpochRecord>> {
        self.check_input(train)?;
        let mut opt = SgdState::new(self.cfg.sgd_finetune(), &self.net)?;
        let lambda = self.cfg.lambda_joint;
        let blocks = BlockSet {
            uncertainty: lambda > 0.0,
            ..BlockSet::ALL
        };
        let mut records = Vec::new();
        for epoch in 1..=self.cfg.epochs_finetune {
            let logits = self.full_logits(train)?;
            let snap = self.snapshot(&logits, &train.labels)?;
            let batches = self.shuffled_batches(train.len());
            let mut losses = Vec::with_capacity(batches.len());
            for (b, idx) in batches.iter().enumerate() {
                let pass = self.net.forward(&train.features.select_rows(idx))?;
                let (ce, d_logits) = batch_cross_entropy(&pass.logits, idx, &train.labels)?;
                let (d_u, loss) = if lambda > 0.0 {
                    let (lu, g) = self.estimator_loss(&pass.uncertainty, idx, &snap)?;
                    (
                        Some(g.into_iter().map(|v| lambda * v).collect()),
                        ce + lambda * lu,
                    )
                } else {
                    (None, ce)
                };
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss {
                        stage: Stage::Finetune.as_str(),
                        epoch,
                        batch: b,
                    });
                }
                let grads = self.net.backward(
                    &pass.cache,
                    &OutputGrads {
                        logits: Some(d_logits),
                        uncertainty: d_u,
                    },
                    blocks,
                )?;
                opt.step(&mut self.net, &grads)?;
                losses.push(loss);
            }
            records.push(self.record(Stage::Finetune, epoch, losses, Some(snap.gamma), test)?);
            self.checkpoint(Stage::Finetune, epoch, &opt)?;
        }
        self.optimizer = Some(opt);
        Ok(records)
    }

    fn estimator_loss(
        &self,
        u_hat: &[f64],
        idx: &[usize],
        snap: &TargetSnapshot,
    ) -> Result<(f64, Vec<f64>)> {
        let targets: Vec<f64> = idx.iter().map(|&i| snap.targets[i]).collect();
        let densities: Vec<f64> = idx.iter().map(|&i| snap.densities[i]).collect();
        self.objective
            .batch_loss(u_hat, &targets, &densities, snap.gamma)
    }

    /// Final checkpoint of the current state.
    pub fn final_checkpoint(&self) -> Checkpoint {
        Checkpoint::new(
            "final",
            0,
            self.net.clone(),
            self.optimizer.clone(),
            self.rng.state(),
        )
    }

    pub fn sgd_config(&self) -> SgdConfig {
        self.cfg.sgd()
    }
}

/// Mean cross-entropy over a batch and its gradient w.r.t. the logits (with
/// the `1/n` factor).
fn batch_cross_entropy(logits: &Matrix, idx: &[usize], labels: &[usize]) -> Result<(f64, Matrix)> {
    let n = idx.len();
    let classes = logits.cols();
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(n * classes);
    for (r, &i) in idx.iter().enumerate() {
        let (loss, g) = cross_entropy_loss(&softmax(logits.row(r)), labels[i])?;
        total += loss;
        grad.extend(g.into_iter().map(|v| v / n as f64));
    }
    Ok((total / n as f64, Matrix::new(n, classes, grad)?))
}

/// Result of [`run_btcp`]: the report and the trained network.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ExperimentReport,
    pub network: BtcpNetwork,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Receives `final.json` after the run.
    pub checkpoint_dir: Option<PathBuf>,
    /// Also checkpoint after every epoch of every stage.
    pub epoch_checkpoints: bool,
    pub objective: Option<EstimatorObjective>,
}

/// All three stages followed by a final evaluation on `test`.
pub fn run_btcp(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &TrainConfig,
    options: &RunOptions,
) -> Result<RunOutcome> {
    if test.dim() != train.dim() {
        return Err(Error::Dimension {
            context: "test width vs train width",
            expected: train.dim(),
            actual: test.dim(),
        });
    }
    let classes = train.class_count.max(test.class_count);
    let mut pipeline = Pipeline::new(cfg.clone(), train.dim(), classes)?;
    if let Some(obj) = options.objective {
        pipeline = pipeline.with_objective(obj);
    }
    if let (Some(dir), true) = (&options.checkpoint_dir, options.epoch_checkpoints) {
        pipeline = pipeline.with_checkpoints(dir.clone());
    }
    let mut epochs = pipeline.train_classifier(train, test)?;
    epochs.extend(pipeline.train_estimator(train, test)?);
    epochs.extend(pipeline.finetune(train, test)?);

    let eval = evaluate(pipeline.network(), test, cfg.tau)?;
    let gamma = epochs.iter().rev().find_map(|e| e.gamma);
    let hist = histogram(&eval.uncertainties, cfg.histogram_bins)?;
    if let Some(dir) = &options.checkpoint_dir {
        std::fs::create_dir_all(dir)?;
        pipeline.final_checkpoint().save(&dir.join("final.json"))?;
    }
    let report = ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        objective: pipeline.objective,
        dataset: None,
        train_size: train.len(),
        test_size: test.len(),
        epochs,
        final_metrics: FinalMetrics {
            test_accuracy: eval.accuracy,
            failure: eval.failure,
            uncertainty_mean: eval.uncertainty_mean,
            uncertainty_std: eval.uncertainty_std,
            gamma,
        },
        test_uncertainties: eval.uncertainties,
        test_correct: eval.correct,
        histogram: hist,
    };
    Ok(RunOutcome {
        report,
        network: pipeline.into_network(),
    })
}

/// Runs every `(config, options)` pair on the same data. With `parallel`
/// (and the `parallel` feature) the runs execute on the rayon pool; each run
/// is independent and deterministic, so results do not depend on
/// scheduling. Runs sharing a checkpoint directory must not be parallel.
pub fn run_many(
    train: &LabeledDataset,
    test: &LabeledDataset,
    runs: &[(TrainConfig, RunOptions)],
    parallel: bool,
) -> Result<Vec<RunOutcome>> {
    #[cfg(feature = "parallel")]
    {
        if parallel {
            use rayon::prelude::*;
            return runs
                .par_iter()
                .map(|(cfg, opts)| run_btcp(train, test, cfg, opts))
                .collect();
        }
    }
    let _ = parallel;
    runs.iter()
        .map(|(cfg, opts)| run_btcp(train, test, cfg, opts))
        .collect()
}
