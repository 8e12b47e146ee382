use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::layer::{Activation, DenseLayer, LayerGrad, Stack, StackCache};
use super::{Matrix, XorShift64Star};
use crate::error::{Error, Result};

static NEXT_VERSION: AtomicU64 = AtomicU64::new(1);

fn fresh_version() -> u64 {
    NEXT_VERSION.fetch_add(1, Ordering::Relaxed)
}

/// The three parameter blocks of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Encoder,
    Classifier,
    Uncertainty,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Encoder, Block::Classifier, Block::Uncertainty];

    pub fn name(self) -> &'static str {
        match self {
            Block::Encoder => "encoder",
            Block::Classifier => "classifier",
            Block::Uncertainty => "uncertainty",
        }
    }
}

/// Which blocks a backward pass should produce gradients for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSet {
    pub encoder: bool,
    pub classifier: bool,
    pub uncertainty: bool,
}

impl BlockSet {
    pub const ALL: BlockSet = BlockSet {
        encoder: true,
        classifier: true,
        uncertainty: true,
    };
    pub const CLASSIFIER_STAGE: BlockSet = BlockSet {
        encoder: true,
        classifier: true,
        uncertainty: false,
    };
    pub const ESTIMATOR_STAGE: BlockSet = BlockSet {
        encoder: false,
        classifier: false,
        uncertainty: true,
    };

    pub fn contains(self, block: Block) -> bool {
        match block {
            Block::Encoder => self.encoder,
            Block::Classifier => self.classifier,
            Block::Uncertainty => self.uncertainty,
        }
    }
}

/// Layer sizes of a [`BtcpNetwork`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    /// Widths of the ReLU encoder layers; the last one is the feature size.
    pub encoder_widths: Vec<usize>,
    pub class_count: usize,
    /// Hidden ReLU widths of the uncertainty head before its sigmoid unit.
    pub uncertainty_hidden: Vec<usize>,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("input dimension must be positive".into()));
        }
        if self.encoder_widths.is_empty() {
            return Err(Error::Config("encoder needs at least one layer".into()));
        }
        if self.class_count < 2 {
            return Err(Error::Config("need at least two classes".into()));
        }
        if self
            .encoder_widths
            .iter()
            .chain(&self.uncertainty_hidden)
            .any(|&w| w == 0)
        {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        *self.encoder_widths.last().expect("validated non-empty")
    }
}

/// Shared encoder feeding a classifier head (logits) and an uncertainty head
/// (one sigmoid unit).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BtcpNetwork {
    encoder: Stack,
    classifier: Stack,
    uncertainty: Stack,
    #[serde(skip, default = "fresh_version")]
    version: u64,
}

impl PartialEq for BtcpNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.encoder == other.encoder
            && self.classifier == other.classifier
            && self.uncertainty == other.uncertainty
    }
}

/// Gradients for each block; `None` for blocks that were not requested.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NetworkGrads {
    pub encoder: Option<Vec<LayerGrad>>,
    pub classifier: Option<Vec<LayerGrad>>,
    pub uncertainty: Option<Vec<LayerGrad>>,
}

impl NetworkGrads {
    pub fn block(&self, block: Block) -> Option<&Vec<LayerGrad>> {
        match block {
            Block::Encoder => self.encoder.as_ref(),
            Block::Classifier => self.classifier.as_ref(),
            Block::Uncertainty => self.uncertainty.as_ref(),
        }
    }

    pub fn block_mut(&mut self, block: Block) -> Option<&mut Vec<LayerGrad>> {
        match block {
            Block::Encoder => self.encoder.as_mut(),
            Block::Classifier => self.classifier.as_mut(),
            Block::Uncertainty => self.uncertainty.as_mut(),
        }
    }

    /// Full-size zero gradients, the shape of every parameter.
    pub fn zeros_like(net: &BtcpNetwork) -> Self {
        Self {
            encoder: Some(net.encoder.zero_grads()),
            classifier: Some(net.classifier.zero_grads()),
            uncertainty: Some(net.uncertainty.zero_grads()),
        }
    }

    /// Iterates `(parameter name, values)` for every present gradient slice.
    pub fn named_slices(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for block in Block::ALL {
            if let Some(layers) = self.block(block) {
                for (i, g) in layers.iter().enumerate() {
                    out.push((param_name(block, i, "weights"), g.weights.as_slice()));
                    out.push((param_name(block, i, "bias"), g.bias.as_slice()));
                }
            }
        }
        out
    }
}

pub(crate) fn param_name(block: Block, layer: usize, kind: &str) -> String {
    format!("{}.{layer}.{kind}", block.name())
}

/// Gradients of the loss w.r.t. the two network outputs.
#[derive(Debug, Clone, Default)]
pub struct OutputGrads {
    /// (n × classes)
    pub logits: Option<Matrix>,
    /// length n
    pub uncertainty: Option<Vec<f64>>,
}

/// Everything [`BtcpNetwork::backward`] needs from a forward call.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    encoder: StackCache,
    classifier: StackCache,
    uncertainty: StackCache,
}

#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// One row of logits per sample.
    pub logits: Matrix,
    /// One estimated uncertainty in (0, 1) per sample.
    pub uncertainty: Vec<f64>,
    pub cache: ForwardCache,
}

impl BtcpNetwork {
    pub fn new(encoder: Stack, classifier: Stack, uncertainty: Stack) -> Result<Self> {
        let feat = encoder
            .out_dim()
            .ok_or_else(|| Error::Config("encoder must not be empty".into()))?;
        for (head, name) in [(&classifier, "classifier"), (&uncertainty, "uncertainty")] {
            let input = head
                .in_dim()
                .ok_or_else(|| Error::Config(format!("{name} head must not be empty")))?;
            if input != feat {
                return Err(Error::Dimension {
                    context: "head input vs encoder output",
                    expected: feat,
                    actual: input,
                });
            }
        }
        let last = uncertainty.layers().last().expect("checked non-empty");
        if last.out_dim() != 1 || last.activation() != Activation::Sigmoid {
            return Err(Error::Config(
                "uncertainty head must end in a single sigmoid unit".into(),
            ));
        }
        if classifier.layers().last().expect("checked").activation() != Activation::Identity {
            return Err(Error::Config(
                "classifier head must end in a logits layer".into(),
            ));
        }
        Ok(Self {
            encoder,
            classifier,
            uncertainty,
            version: fresh_version(),
        })
    }

    /// Glorot-initialized network: ReLU encoder, linear classifier, ReLU
    /// hidden layers then one sigmoid unit for uncertainty. The sigmoid unit
    /// starts at zero, so an untrained network reports `û = 0.5` everywhere.
    pub fn init(spec: &NetworkSpec, rng: &mut XorShift64Star) -> Result<Self> {
        spec.validate()?;
        let mut encoder = Vec::new();
        let mut prev = spec.input_dim;
        for &w in &spec.encoder_widths {
            encoder.push(DenseLayer::glorot(prev, w, Activation::Relu, rng));
            prev = w;
        }
        let feat = prev;
        let classifier = vec![DenseLayer::glorot(
            feat,
            spec.class_count,
            Activation::Identity,
            rng,
        )];
        let mut uncertainty = Vec::new();
        for &w in &spec.uncertainty_hidden {
            uncertainty.push(DenseLayer::glorot(prev, w, Activation::Relu, rng));
            prev = w;
        }
        uncertainty.push(DenseLayer::zeros(prev, 1, Activation::Sigmoid));
        Self::new(
            Stack::new(encoder)?,
            Stack::new(classifier)?,
            Stack::new(uncertainty)?,
        )
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.in_dim().expect("validated")
    }

    pub fn class_count(&self) -> usize {
        self.classifier.out_dim().expect("validated")
    }

    pub fn encoder(&self) -> &Stack {
        &self.encoder
    }

    pub fn classifier(&self) -> &Stack {
        &self.classifier
    }

    pub fn uncertainty_head(&self) -> &Stack {
        &self.uncertainty
    }

    pub fn stack(&self, block: Block) -> &Stack {
        match block {
            Block::Encoder => &self.encoder,
            Block::Classifier => &self.classifier,
            Block::Uncertainty => &self.uncertainty,
        }
    }

    /// Mutable access to a block. Invalidates outstanding forward caches.
    pub fn stack_mut(&mut self, block: Block) -> &mut Stack {
        self.version = fresh_version();
        match block {
            Block::Encoder => &mut self.encoder,
            Block::Classifier => &mut self.classifier,
            Block::Uncertainty => &mut self.uncertainty,
        }
    }

    /// Identifier of the current parameter values; changes on every mutation.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn forward(&self, batch: &Matrix) -> Result<ForwardPass> {
        if batch.cols() != self.input_dim() {
            return Err(Error::Dimension {
                context: "batch features vs encoder input",
                expected: self.input_dim(),
                actual: batch.cols(),
            });
        }
        let encoder = self.encoder.forward(batch.clone())?;
        let features = encoder.output().clone();
        let classifier = self.classifier.forward(features.clone())?;
        let uncertainty = self.uncertainty.forward(features)?;
        Ok(ForwardPass {
            logits: classifier.output().clone(),
            uncertainty: uncertainty.output().as_slice().to_vec(),
            cache: ForwardCache {
                version: self.version,
                encoder,
                classifier,
                uncertainty,
            },
        })
    }

    /// Backpropagates output gradients into parameter gradients for the
    /// requested blocks. Missing output gradients count as zero.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grads: &OutputGrads,
        blocks: BlockSet,
    ) -> Result<NetworkGrads> {
        if cache.version != self.version {
            return Err(Error::StaleCache {
                cached: cache.version,
                current: self.version,
            });
        }
        let n = cache.encoder.output().rows();
        let mut d_features: Option<Matrix> = None;
        let mut add_features = |d: Matrix| match d_features.as_mut() {
            Some(acc) => {
                for (a, b) in acc.as_mut_slice().iter_mut().zip(d.as_slice()) {
                    *a += b;
                }
            }
            None => d_features = Some(d),
        };

        let mut out = NetworkGrads::default();
        match &grads.logits {
            Some(d_logits) => {
                d_logits.check_shape(n, self.class_count(), "logit gradient")?;
                if blocks.classifier || blocks.encoder {
                    let (g, d_feat) = self.classifier.backward(
                        &cache.classifier,
                        d_logits.clone(),
                        blocks.encoder,
                    )?;
                    if blocks.classifier {
                        out.classifier = Some(g);
                    }
                    if let Some(d) = d_feat {
                        add_features(d);
                    }
                }
            }
            None if blocks.classifier => out.classifier = Some(self.classifier.zero_grads()),
            None => {}
        }
        match &grads.uncertainty {
            Some(d_u) => {
                if d_u.len() != n {
                    return Err(Error::Dimension {
                        context: "uncertainty gradient length",
                        expected: n,
                        actual: d_u.len(),
                    });
                }
                if blocks.uncertainty || blocks.encoder {
                    let d = Matrix::new(n, 1, d_u.clone())?;
                    let (g, d_feat) =
                        self.uncertainty
                            .backward(&cache.uncertainty, d, blocks.encoder)?;
                    if blocks.uncertainty {
                        out.uncertainty = Some(g);
                    }
                    if let Some(d) = d_feat {
                        add_features(d);
                    }
                }
            }
            None if blocks.uncertainty => out.uncertainty = Some(self.uncertainty.zero_grads()),
            None => {}
        }
        if blocks.encoder {
            out.encoder = Some(match d_features {
                Some(d) => self.encoder.backward(&cache.encoder, d, false)?.0,
                None => self.encoder.zero_grads(),
            });
        }
        Ok(out)
    }

    /// Visits every scalar parameter slice with its name.
    pub fn named_params(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for block in Block::ALL {
            for (i, layer) in self.stack(block).layers().iter().enumerate() {
                out.push((param_name(block, i, "weights"), layer.weights.as_slice()));
                out.push((param_name(block, i, "bias"), layer.bias.as_slice()));
            }
        }
        out
    }

    /// FNV-1a hash over the bit patterns of one block's parameters.
    pub fn block_fingerprint(&self, block: Block) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for layer in self.stack(block).layers() {
            for v in layer.weights.as_slice().iter().chain(&layer.bias) {
                for byte in v.to_bits().to_le_bytes() {
                    h ^= byte as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> NetworkSpec {
        NetworkSpec {
            input_dim: 4,
            encoder_widths: vec![6, 5],
            class_count: 3,
            uncertainty_hidden: vec![4],
        }
    }

    #[test]
    fn zero_network_outputs_half() {
        let net = BtcpNetwork::new(
            Stack::new(vec![DenseLayer::zeros(3, 4, Activation::Relu)]).unwrap(),
            Stack::new(vec![DenseLayer::zeros(4, 2, Activation::Identity)]).unwrap(),
            Stack::new(vec![DenseLayer::zeros(4, 1, Activation::Sigmoid)]).unwrap(),
        )
        .unwrap();
        let x = Matrix::from_rows(&[vec![1.0, -2.0, 3.0], vec![0.5, 0.5, 9.0]]).unwrap();
        let out = net.forward(&x).unwrap();
        assert!(out.logits.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(out.uncertainty, vec![0.5, 0.5]);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let net = BtcpNetwork::init(&spec(), &mut XorShift64Star::new(1)).unwrap();
        assert!(matches!(
            net.forward(&Matrix::zeros(2, 5)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut net = BtcpNetwork::init(&spec(), &mut XorShift64Star::new(1)).unwrap();
        let pass = net.forward(&Matrix::zeros(1, 4)).unwrap();
        net.stack_mut(Block::Encoder);
        let err = net.backward(&pass.cache, &OutputGrads::default(), BlockSet::ALL);
        assert!(matches!(err, Err(Error::StaleCache { .. })));
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let net = BtcpNetwork::init(&spec(), &mut XorShift64Star::new(2)).unwrap();
        let x = Matrix::from_rows(&[vec![0.1, 0.2, 0.3, 0.4]]).unwrap();
        let pass = net.forward(&x).unwrap();
        let grads = OutputGrads {
            logits: Some(Matrix::zeros(1, 3)),
            uncertainty: Some(vec![0.0]),
        };
        let g = net.backward(&pass.cache, &grads, BlockSet::ALL).unwrap();
        for (_, vals) in g.named_slices() {
            assert!(vals.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rejects_head_without_sigmoid() {
        let r = BtcpNetwork::new(
            Stack::new(vec![DenseLayer::zeros(3, 4, Activation::Relu)]).unwrap(),
            Stack::new(vec![DenseLayer::zeros(4, 2, Activation::Identity)]).unwrap(),
            Stack::new(vec![DenseLayer::zeros(4, 1, Activation::Relu)]).unwrap(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn omitted_blocks_have_no_grads() {
        let net = BtcpNetwork::init(&spec(), &mut XorShift64Star::new(2)).unwrap();
        let pass = net.forward(&Matrix::zeros(2, 4)).unwrap();
        let grads = OutputGrads {
            logits: Some(Matrix::zeros(2, 3)),
            uncertainty: None,
        };
        let g = net
            .backward(&pass.cache, &grads, BlockSet::CLASSIFIER_STAGE)
            .unwrap();
        assert!(g.encoder.is_some() && g.classifier.is_some());
        assert!(g.uncertainty.is_none());
    }
}
