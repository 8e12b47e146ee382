use serde::{Deserialize, Serialize};

use super::{Matrix, XorShift64Star};
use crate::error::{Error, Result};

/// Smallest and largest values a sigmoid unit emits, so outputs stay strictly
/// inside (0, 1) even when the pre-activation saturates.
pub const SIGMOID_FLOOR: f64 = 1e-16;
pub const SIGMOID_CEIL: f64 = 1.0 - 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => {
                if z < 0.0 {
                    0.0
                } else {
                    z
                }
            }
            Activation::Sigmoid => sigmoid(z).clamp(SIGMOID_FLOOR, SIGMOID_CEIL),
        }
    }

    /// Derivative expressed through the activation output `a`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Gradient of one dense layer's parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl LayerGrad {
    pub fn zeros_like(layer: &DenseLayer) -> Self {
        Self {
            weights: Matrix::zeros(layer.out_dim(), layer.in_dim()),
            bias: vec![0.0; layer.out_dim()],
        }
    }
}

/// `y = activation(x · Wᵀ + b)` with `W` stored as (out × in).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub(crate) weights: Matrix,
    pub(crate) bias: Vec<f64>,
    pub(crate) activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::Dimension {
                context: "dense layer bias length",
                expected: weights.rows(),
                actual: bias.len(),
            });
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(out_dim, in_dim),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn glorot(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut XorShift64Star,
    ) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let data = (0..in_dim * out_dim)
            .map(|_| rng.uniform(-limit, limit))
            .collect();
        Self {
            weights: Matrix::new(out_dim, in_dim, data).expect("sized above"),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn forward(&self, input: &Matrix) -> Result<Matrix> {
        if input.cols() != self.in_dim() {
            return Err(Error::Dimension {
                context: "dense layer input",
                expected: self.in_dim(),
                actual: input.cols(),
            });
        }
        let mut z = input.matmul_transposed(&self.weights)?;
        let out = self.out_dim();
        if out > 0 {
            for row in z.as_mut_slice().chunks_mut(out) {
                for (v, b) in row.iter_mut().zip(&self.bias) {
                    *v = self.activation.apply(*v + b);
                }
            }
        }
        Ok(z)
    }

    /// Backpropagates `d_output` (gradient w.r.t. this layer's output) given
    /// the cached input and output of the matching forward call.
    pub fn backward(
        &self,
        input: &Matrix,
        output: &Matrix,
        d_output: &Matrix,
        want_input_grad: bool,
    ) -> Result<(LayerGrad, Option<Matrix>)> {
        let n = input.rows();
        output.check_shape(n, self.out_dim(), "layer output cache")?;
        d_output.check_shape(n, self.out_dim(), "layer output gradient")?;
        let mut dz = d_output.clone();
        for (g, &a) in dz.as_mut_slice().iter_mut().zip(output.as_slice()) {
            *g *= self.activation.derivative_from_output(a);
        }
        let weights = dz.transposed_matmul(input)?;
        let bias = dz.column_sums();
        let d_input = if want_input_grad {
            Some(dz.matmul(&self.weights)?)
        } else {
            None
        };
        Ok((LayerGrad { weights, bias }, d_input))
    }
}

/// An ordered chain of dense layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stack {
    pub(crate) layers: Vec<DenseLayer>,
}

/// Activations recorded by [`Stack::forward`]: the input followed by every
/// layer output.
#[derive(Debug, Clone)]
pub struct StackCache {
    activations: Vec<Matrix>,
}

impl StackCache {
    pub fn output(&self) -> &Matrix {
        self.activations
            .last()
            .expect("cache holds at least the input")
    }

    pub fn into_output(mut self) -> Matrix {
        self.activations
            .pop()
            .expect("cache holds at least the input")
    }
}

impl Stack {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Dimension {
                    context: "stacked layer input",
                    expected: pair[0].out_dim(),
                    actual: pair[1].in_dim(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn in_dim(&self) -> Option<usize> {
        self.layers.first().map(DenseLayer::in_dim)
    }

    pub fn out_dim(&self) -> Option<usize> {
        self.layers.last().map(DenseLayer::out_dim)
    }

    pub fn forward(&self, input: Matrix) -> Result<StackCache> {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input);
        for layer in &self.layers {
            let next = layer.forward(activations.last().expect("non-empty"))?;
            activations.push(next);
        }
        Ok(StackCache { activations })
    }

    pub fn backward(
        &self,
        cache: &StackCache,
        d_output: Matrix,
        want_input_grad: bool,
    ) -> Result<(Vec<LayerGrad>, Option<Matrix>)> {
        if cache.activations.len() != self.layers.len() + 1 {
            return Err(Error::Contract(format!(
                "stack cache has {} activations for {} layers",
                cache.activations.len(),
                self.layers.len()
            )));
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = d_output;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let need = want_input_grad || i > 0;
            let (g, d_in) = layer.backward(
                &cache.activations[i],
                &cache.activations[i + 1],
                &upstream,
                need,
            )?;
            grads.push(g);
            if let Some(d) = d_in {
                upstream = d;
            }
        }
        grads.reverse();
        let d_input = if want_input_grad {
            Some(upstream)
        } else {
            None
        };
        Ok((grads, d_input))
    }

    pub(crate) fn zero_grads(&self) -> Vec<LayerGrad> {
        self.layers.iter().map(LayerGrad::zeros_like).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
        let a = Activation::Sigmoid;
        assert!(a.apply(800.0) < 1.0);
        assert!(a.apply(-800.0) > 0.0);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let w = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let layer = DenseLayer::new(w, vec![0.0, 0.0], Activation::Identity).unwrap();
        let x = Matrix::from_rows(&[vec![0.3, -2.0]]).unwrap();
        assert_eq!(layer.forward(&x).unwrap(), x);
    }

    #[test]
    fn rejects_mismatched_input() {
        let layer = DenseLayer::zeros(3, 2, Activation::Relu);
        let x = Matrix::zeros(1, 4);
        assert!(matches!(layer.forward(&x), Err(Error::Dimension { .. })));
    }

    #[test]
    fn stack_rejects_broken_chain() {
        let a = DenseLayer::zeros(3, 2, Activation::Relu);
        let b = DenseLayer::zeros(3, 1, Activation::Relu);
        assert!(Stack::new(vec![a, b]).is_err());
    }
}
