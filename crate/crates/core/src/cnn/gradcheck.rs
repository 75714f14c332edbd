use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::{loss, loss_and_gradient};
use super::{NetworkParams, NetworkSpec};
use crate::completion::PairEmbedding;
use crate::error::Result;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Layers larger than this are checked on a seeded sample of this many entries.
const MAX_CHECKS_PER_LAYER: usize = 200;
/// Gradients smaller than this are compared in absolute rather than relative
/// terms. Central-difference roundoff is about `eps * |loss| / FD_STEP`,
/// roughly 1e-11 here, so a smaller floor would report noise.
const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub per_layer: Vec<(&'static str, f64)>,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

fn rel_error(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Compares the backpropagated gradient of the penalized loss against
/// central finite differences.
pub fn gradient_check(
    params: &NetworkParams,
    batch: &[PairEmbedding],
    labels: &[f64],
    l2: f64,
    sample_seed: u64,
) -> Result<GradCheckReport> {
    let (_, analytic) = loss_and_gradient(params, batch, labels, l2)?;
    compare(params, &analytic, batch, labels, l2, sample_seed)
}

/// Uniform random embeddings with alternating labels, for gradient checks
/// away from real data.
pub fn random_batch(spec: &NetworkSpec, n: usize, seed: u64) -> (Vec<PairEmbedding>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = (0..n)
        .map(|i| PairEmbedding {
            matrix: Array2::from_shape_fn((spec.input_height, spec.input_width), |_| rng.gen()),
            lnc: i,
            disease: 0,
        })
        .collect();
    let ys = (0..n).map(|i| (i % 2) as f64).collect();
    (xs, ys)
}

pub(crate) fn compare(
    params: &NetworkParams,
    analytic: &NetworkParams,
    batch: &[PairEmbedding],
    labels: &[f64],
    l2: f64,
    sample_seed: u64,
) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let mut probe = params.clone();
    let mut per_layer = Vec::new();
    let mut checked = 0;

    for (layer, (name, grad)) in analytic.layers().into_iter().enumerate() {
        let len = grad.len();
        let indices: Vec<usize> = if len <= MAX_CHECKS_PER_LAYER {
            (0..len).collect()
        } else {
            let mut picked = rand::seq::index::sample(&mut rng, len, MAX_CHECKS_PER_LAYER).into_vec();
            picked.sort_unstable();
            picked
        };
        let mut worst = 0.0f64;
        for i in indices {
            let original = probe.layers()[layer].1[i];
            probe.layers_mut()[layer].1[i] = original + FD_STEP;
            let up = loss(&probe, batch, labels, l2)?;
            probe.layers_mut()[layer].1[i] = original - FD_STEP;
            let down = loss(&probe, batch, labels, l2)?;
            probe.layers_mut()[layer].1[i] = original;
            let numeric = (up - down) / (2.0 * FD_STEP);
            worst = worst.max(rel_error(grad[i], numeric));
            checked += 1;
        }
        per_layer.push((name, worst));
    }

    let max_rel_error = per_layer.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    Ok(GradCheckReport {
        max_rel_error,
        per_layer,
        checked,
    })
}
