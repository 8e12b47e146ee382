//! SGD with momentum and L2 weight decay.
//!
//! For every parameter `p` with gradient `g` and velocity `v`:
//!
//! ```text
//! v ← momentum·v + g + weight_decay·p
//! p ← p − lr·v
//! ```
//!
//! evaluated left to right in `f64`. Blocks absent from the gradient set are
//! frozen: neither their velocity nor their values change, and no weight
//! decay is applied to them.

use serde::{Deserialize, Serialize};

use super::network::{param_name, Block, BtcpNetwork, NetworkGrads};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        // A zero learning rate is allowed: it pins parameters in place.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!(
                "weight decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// Optimizer state: hyperparameters plus one velocity buffer per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdState {
    pub config: SgdConfig,
    velocity: NetworkGrads,
}

impl SgdState {
    pub fn new(config: SgdConfig, net: &BtcpNetwork) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            velocity: NetworkGrads::zeros_like(net),
        })
    }

    pub fn velocity(&self) -> &NetworkGrads {
        &self.velocity
    }

    /// Applies one update. Every gradient is checked for finiteness before
    /// any parameter is touched.
    pub fn step(&mut self, net: &mut BtcpNetwork, grads: &NetworkGrads) -> Result<()> {
        for block in Block::ALL {
            let Some(layers) = grads.block(block) else {
                continue;
            };
            let stack = net.stack(block);
            if layers.len() != stack.layers().len() {
                return Err(Error::Dimension {
                    context: "gradient layer count",
                    expected: stack.layers().len(),
                    actual: layers.len(),
                });
            }
            for (i, (g, layer)) in layers.iter().zip(stack.layers()).enumerate() {
                g.weights.check_shape(
                    layer.out_dim(),
                    layer.in_dim(),
                    &param_name(block, i, "weights"),
                )?;
                if g.bias.len() != layer.out_dim() {
                    return Err(Error::Dimension {
                        context: "bias gradient length",
                        expected: layer.out_dim(),
                        actual: g.bias.len(),
                    });
                }
                for (kind, vals) in [("weights", g.weights.as_slice()), ("bias", &g.bias[..])] {
                    if let Some((index, &value)) =
                        vals.iter().enumerate().find(|(_, v)| !v.is_finite())
                    {
                        return Err(Error::NonFiniteGradient {
                            param: param_name(block, i, kind),
                            index,
                            value,
                        });
                    }
                }
            }
        }

        let SgdConfig {
            learning_rate: lr,
            momentum,
            weight_decay: wd,
        } = self.config;
        for block in Block::ALL {
            let Some(layers) = grads.block(block) else {
                continue;
            };
            let velocity = self
                .velocity
                .block_mut(block)
                .expect("velocity covers every block");
            let stack = net.stack_mut(block);
            for ((g, v), layer) in layers.iter().zip(velocity).zip(&mut stack.layers) {
                update(
                    layer.weights.as_mut_slice(),
                    g.weights.as_slice(),
                    v.weights.as_mut_slice(),
                    lr,
                    momentum,
                    wd,
                );
                update(&mut layer.bias, &g.bias, &mut v.bias, lr, momentum, wd);
            }
        }
        Ok(())
    }
}

#[inline]
fn update(
    params: &mut [f64],
    grads: &[f64],
    velocity: &mut [f64],
    lr: f64,
    momentum: f64,
    wd: f64,
) {
    for ((p, &g), v) in params.iter_mut().zip(grads).zip(velocity) {
        *v = momentum * *v + g + wd * *p;
        *p -= lr * *v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{NetworkSpec, XorShift64Star};

    fn net() -> BtcpNetwork {
        let spec = NetworkSpec {
            input_dim: 3,
            encoder_widths: vec![4],
            class_count: 2,
            uncertainty_hidden: vec![],
        };
        BtcpNetwork::init(&spec, &mut XorShift64Star::new(5)).unwrap()
    }

    fn filled(net: &BtcpNetwork, value: f64) -> NetworkGrads {
        let mut g = NetworkGrads::zeros_like(net);
        for block in Block::ALL {
            for lg in g.block_mut(block).unwrap() {
                lg.weights.as_mut_slice().fill(value);
                lg.bias.fill(value);
            }
        }
        g
    }

    fn flat(net: &BtcpNetwork) -> Vec<f64> {
        net.named_params()
            .into_iter()
            .flat_map(|(_, v)| v.to_vec())
            .collect()
    }

    #[test]
    fn vanilla_sgd() {
        let mut n = net();
        let before = flat(&n);
        let cfg = SgdConfig {
            learning_rate: 0.1,
            momentum: 0.0,
            weight_decay: 0.0,
        };
        let mut opt = SgdState::new(cfg, &n).unwrap();
        let grads = filled(&n, 2.0);
        opt.step(&mut n, &grads).unwrap();
        for (a, b) in before.iter().zip(flat(&n)) {
            assert_eq!(b, a - 0.1 * 2.0);
        }
    }

    #[test]
    fn zero_grad_no_decay_is_identity() {
        let mut n = net();
        let before = flat(&n);
        let cfg = SgdConfig {
            learning_rate: 0.1,
            momentum: 0.9,
            weight_decay: 0.0,
        };
        let mut opt = SgdState::new(cfg, &n).unwrap();
        let grads = filled(&n, 0.0);
        opt.step(&mut n, &grads).unwrap();
        assert_eq!(before, flat(&n));
    }

    #[test]
    fn momentum_unrolls() {
        let mut n = net();
        let cfg = SgdConfig {
            learning_rate: 0.01,
            momentum: 0.9,
            weight_decay: 0.0,
        };
        let g = 0.5;
        let mut opt = SgdState::new(cfg, &n).unwrap();
        let p0 = flat(&n);
        let grads = filled(&n, g);
        opt.step(&mut n, &grads).unwrap();
        let p1 = flat(&n);
        let grads = filled(&n, g);
        opt.step(&mut n, &grads).unwrap();
        let p2 = flat(&n);
        for i in 0..p0.len() {
            assert!(((p0[i] - p1[i]) - 0.01 * g).abs() < 1e-15);
            assert!(((p1[i] - p2[i]) - 0.01 * 1.9 * g).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut n = net();
        let before = flat(&n);
        let mut g = filled(&n, 0.0);
        g.classifier.as_mut().unwrap()[0].bias[1] = f64::NAN;
        let mut opt = SgdState::new(
            SgdConfig {
                learning_rate: 0.1,
                momentum: 0.9,
                weight_decay: 0.0,
            },
            &n,
        )
        .unwrap();
        match opt.step(&mut n, &g) {
            Err(Error::NonFiniteGradient { param, index, .. }) => {
                assert_eq!(param, "classifier.0.bias");
                assert_eq!(index, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(before, flat(&n));
    }

    #[test]
    fn absent_blocks_stay_frozen() {
        let mut n = net();
        let enc = n.block_fingerprint(Block::Encoder);
        let mut g = filled(&n, 1.0);
        g.encoder = None;
        let mut opt = SgdState::new(
            SgdConfig {
                learning_rate: 0.1,
                momentum: 0.9,
                weight_decay: 0.01,
            },
            &n,
        )
        .unwrap();
        opt.step(&mut n, &g).unwrap();
        assert_eq!(enc, n.block_fingerprint(Block::Encoder));
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        let bad = SgdConfig {
            learning_rate: 0.1,
            momentum: 1.0,
            weight_decay: 0.0,
        };
        assert!(bad.validate().is_err());
    }
}
