use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{loss, loss_and_gradient};
use super::{NetworkParams, NetworkSpec};
use crate::completion::PairEmbedding;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds the weight initialization.
    pub init_seed: u64,
    /// Seeds the per-epoch mini-batch shuffle.
    pub batch_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            l2: 1e-4,
            epochs: 20,
            batch_size: 32,
            init_seed: 0,
            batch_seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| {
            Err(Error::InvalidValue {
                key: key.into(),
                message: message.into(),
            })
        };
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("cnn.learning_rate", "must be a non-negative number");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("cnn.l2", "must be a non-negative number");
        }
        if self.epochs == 0 {
            return bad("cnn.epochs", "must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("cnn.batch_size", "must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    /// Full-data loss before training followed by the loss after each epoch.
    pub loss_trace: Vec<f64>,
}

/// Plain mini-batch gradient descent on the penalized cross-entropy.
pub fn train(
    spec: NetworkSpec,
    cfg: &TrainConfig,
    data: &[PairEmbedding],
    labels: &[f64],
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.len() != labels.len() {
        return Err(Error::Shape(format!("{} samples, {} labels", data.len(), labels.len())));
    }
    let has = |y: f64| labels.contains(&y);
    if !(has(0.0) && has(1.0)) {
        return Err(Error::SingleClass("CNN training data".into()));
    }

    let mut params = NetworkParams::init(spec, cfg.init_seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.batch_seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut loss_trace = vec![loss(&params, data, labels, cfg.l2)?];

    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut batch_labels = Vec::with_capacity(cfg.batch_size);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch_labels.clear();
            for &i in chunk {
                batch.push(data[i].clone());
                batch_labels.push(labels[i]);
            }
            let (_, grads) = loss_and_gradient(&params, &batch, &batch_labels, cfg.l2)?;
            for (name, g) in grads.layers() {
                if let Some(pos) = g.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        layer: name,
                        detail: format!("gradient entry {pos} is {}", g[pos]),
                    });
                }
            }
            for ((_, w), (_, g)) in params.layers_mut().into_iter().zip(grads.layers()) {
                for (w, g) in w.iter_mut().zip(g) {
                    *w -= cfg.learning_rate * g;
                }
            }
        }
        loss_trace.push(loss(&params, data, labels, cfg.l2)?);
    }
    Ok(TrainOutcome { params, loss_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    fn small_spec(width: usize) -> NetworkSpec {
        let mut spec = NetworkSpec::for_width(width);
        spec.kernel = (2, 4);
        spec.filters = 4;
        spec.hidden_units = 8;
        spec
    }

    /// Two classes whose embeddings differ in level on the left half.
    fn separable(n: usize, width: usize, seed: u64) -> (Vec<PairEmbedding>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..n {
            let y = (i % 2) as f64;
            let m = Array2::from_shape_fn((2, width), |(_, c)| {
                let base = if c < width / 2 { 0.2 + 0.6 * y } else { 0.5 };
                base + rng.gen_range(-0.1..0.1)
            });
            xs.push(PairEmbedding { matrix: m, lnc: i, disease: 0 });
            ys.push(y);
        }
        (xs, ys)
    }

    #[test]
    fn zero_learning_rate_keeps_initial_params() {
        let spec = small_spec(16);
        let (xs, ys) = separable(10, 16, 1);
        let cfg = TrainConfig { learning_rate: 0.0, epochs: 2, init_seed: 5, ..Default::default() };
        let out = train(spec, &cfg, &xs, &ys).unwrap();
        assert_eq!(out.params, NetworkParams::init(spec, 5).unwrap());
    }

    #[test]
    fn loss_decreases_on_separable_data() {
        let spec = small_spec(24);
        let (xs, ys) = separable(50, 24, 2);
        let cfg = TrainConfig { learning_rate: 0.1, ..Default::default() };
        let out = train(spec, &cfg, &xs, &ys).unwrap();
        assert_eq!(out.loss_trace.len(), 21);
        assert!(out.loss_trace[20] < out.loss_trace[0], "{:?}", out.loss_trace);
    }

    #[test]
    fn default_rate_also_descends() {
        let spec = small_spec(24);
        let (xs, ys) = separable(50, 24, 3);
        let out = train(spec, &TrainConfig::default(), &xs, &ys).unwrap();
        assert!(out.loss_trace.last().unwrap() < &out.loss_trace[0]);
    }

    #[test]
    fn same_seed_same_params() {
        let spec = small_spec(20);
        let (xs, ys) = separable(20, 20, 4);
        let cfg = TrainConfig { epochs: 3, ..Default::default() };
        let a = train(spec, &cfg, &xs, &ys).unwrap();
        let b = train(spec, &cfg, &xs, &ys).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.loss_trace, b.loss_trace);
    }

    #[test]
    fn single_class_rejected() {
        let spec = small_spec(16);
        let (xs, _) = separable(4, 16, 1);
        assert!(matches!(
            train(spec, &TrainConfig::default(), &xs, &[1.0; 4]),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn exploding_gradient_names_layer() {
        let spec = small_spec(16);
        let (mut xs, ys) = separable(4, 16, 1);
        xs[0].matrix.fill(1e300);
        let cfg = TrainConfig { learning_rate: 1e10, ..Default::default() };
        match train(spec, &cfg, &xs, &ys) {
            Err(Error::NonFinite { layer, .. }) => assert!(layer.contains('.')),
            other => panic!("expected non-finite failure, got {other:?}"),
        }
    }
}
