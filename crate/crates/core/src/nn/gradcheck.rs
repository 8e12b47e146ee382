//! Central finite-difference verification of analytic gradients.

use serde::Serialize;

use super::network::{Block, BtcpNetwork, NetworkGrads};
use crate::error::Result;

/// Default perturbation for central differences.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Denominator floor in [`relative_error`]. Below this magnitude the error is
/// effectively absolute.
pub const RELATIVE_FLOOR: f64 = 1e-7;

/// `|a − n| / max(|a|, |n|, RELATIVE_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
    (analytic - numeric).abs() / denom
}

/// Central-difference gradient of a scalar function of a vector.
pub fn numeric_gradient<F>(f: F, x: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let plus = f(&probe);
            probe[i] = orig - step;
            let minus = f(&probe);
            probe[i] = orig;
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockError {
    /// Parameter name, e.g. `encoder.1.weights`.
    pub name: String,
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub blocks: Vec<BlockError>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.max_relative_error < self.tolerance)
    }

    /// Names of the parameter blocks at or above tolerance.
    pub fn failing(&self) -> Vec<&str> {
        self.blocks
            .iter()
            .filter(|b| b.max_relative_error >= self.tolerance)
            .map(|b| b.name.as_str())
            .collect()
    }

    pub fn worst(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.max_relative_error)
            .fold(0.0, f64::max)
    }
}

/// Compares the analytic gradients produced by `objective` against central
/// differences of its loss, for every parameter block the objective returns
/// a gradient for.
///
/// `objective` must be deterministic and return `(loss, gradients)` at the
/// given network.
pub fn finite_diff_check<F>(
    net: &BtcpNetwork,
    objective: F,
    step: f64,
    tolerance: f64,
) -> Result<GradCheckReport>
where
    F: Fn(&BtcpNetwork) -> Result<(f64, NetworkGrads)>,
{
    let (_, analytic) = objective(net)?;
    let mut probe = net.clone();
    let mut blocks = Vec::new();
    for block in Block::ALL {
        let Some(layer_grads) = analytic.block(block) else {
            continue;
        };
        for (li, g) in layer_grads.iter().enumerate() {
            for is_bias in [false, true] {
                let analytic_vals = if is_bias {
                    &g.bias[..]
                } else {
                    g.weights.as_slice()
                };
                let mut max_rel: f64 = 0.0;
                let mut max_abs: f64 = 0.0;
                for (idx, &a) in analytic_vals.iter().enumerate() {
                    let orig = param(&probe, block, li, is_bias, idx);
                    set_param(&mut probe, block, li, is_bias, idx, orig + step);
                    let plus = objective(&probe)?.0;
                    set_param(&mut probe, block, li, is_bias, idx, orig - step);
                    let minus = objective(&probe)?.0;
                    set_param(&mut probe, block, li, is_bias, idx, orig);
                    let numeric = (plus - minus) / (2.0 * step);
                    max_rel = max_rel.max(relative_error(a, numeric));
                    max_abs = max_abs.max((a - numeric).abs());
                }
                blocks.push(BlockError {
                    name: format!(
                        "{}.{li}.{}",
                        block.name(),
                        if is_bias { "bias" } else { "weights" }
                    ),
                    max_relative_error: max_rel,
                    max_absolute_error: max_abs,
                });
            }
        }
    }
    Ok(GradCheckReport { tolerance, blocks })
}

fn param(net: &BtcpNetwork, block: Block, layer: usize, is_bias: bool, idx: usize) -> f64 {
    let l = &net.stack(block).layers()[layer];
    if is_bias {
        l.bias[idx]
    } else {
        l.weights.as_slice()[idx]
    }
}

fn set_param(net: &mut BtcpNetwork, block: Block, layer: usize, is_bias: bool, idx: usize, v: f64) {
    let l = &mut net.stack_mut(block).layers[layer];
    if is_bias {
        l.bias[idx] = v;
    } else {
        l.weights.as_mut_slice()[idx] = v;
    }
}
