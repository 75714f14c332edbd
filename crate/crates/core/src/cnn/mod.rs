//! Small convolutional network over 2 x F pair embeddings.
//!
//! Architecture: one convolution (several filters, valid padding, stride 1)
//! with ReLU, non-overlapping pooling, a ReLU hidden layer and a single
//! sigmoid output. The hidden activations are the learned low-dimensional
//! features handed to the tree ensemble.

mod gradcheck;
mod network;
mod ops;
mod train;

use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gradcheck::{gradient_check, random_batch, GradCheckReport, FD_STEP};
pub(crate) use network::sigmoid;
pub use network::{extract_features, forward, loss, loss_and_gradient, Forward, PROB_EPSILON};
pub use ops::{conv_forward, pool_forward};
pub use train::{train, TrainConfig, TrainOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolMode {
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_height: usize,
    pub input_width: usize,
    pub filters: usize,
    pub kernel: (usize, usize),
    pub pool: (usize, usize),
    pub pool_mode: PoolMode,
    pub hidden_units: usize,
}

impl NetworkSpec {
    /// Default architecture for embeddings of width `input_width`.
    pub fn for_width(input_width: usize) -> Self {
        Self {
            input_height: 2,
            input_width,
            filters: 8,
            kernel: (2, 16),
            pool: (1, 2),
            pool_mode: PoolMode::Max,
            hidden_units: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Err(Error::InvalidValue { key: "cnn".into(), message });
        if self.filters == 0 || self.hidden_units == 0 {
            return bad("filters and hidden units must be positive".into());
        }
        let (kh, kw) = self.kernel;
        if kh == 0 || kw == 0 || kh > self.input_height || kw > self.input_width {
            return bad(format!(
                "kernel {kh}x{kw} does not fit a {}x{} input",
                self.input_height, self.input_width
            ));
        }
        let (ph, pw) = self.pool;
        let (ch, cw) = self.conv_shape();
        if ph == 0 || pw == 0 || ph > ch || pw > cw {
            return bad(format!("pool window {ph}x{pw} does not fit a {ch}x{cw} feature map"));
        }
        Ok(())
    }

    pub fn conv_shape(&self) -> (usize, usize) {
        (
            self.input_height + 1 - self.kernel.0,
            self.input_width + 1 - self.kernel.1,
        )
    }

    pub fn pooled_shape(&self) -> (usize, usize) {
        let (ch, cw) = self.conv_shape();
        (ch / self.pool.0, cw / self.pool.1)
    }

    /// Length of the flattened pooled feature maps.
    pub fn flat_len(&self) -> usize {
        let (h, w) = self.pooled_shape();
        self.filters * h * w
    }
}

/// Weights and biases of every layer, plus the architecture they belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub spec: NetworkSpec,
    pub seed: u64,
    /// filters x kernel height x kernel width
    pub conv_w: Array3<f64>,
    pub conv_b: Array1<f64>,
    /// hidden units x flattened pooled length
    pub hidden_w: Array2<f64>,
    pub hidden_b: Array1<f64>,
    pub out_w: Array1<f64>,
    pub out_b: Array1<f64>,
}

pub(crate) const LAYER_NAMES: [&str; 6] = [
    "conv.weight",
    "conv.bias",
    "hidden.weight",
    "hidden.bias",
    "output.weight",
    "output.bias",
];

impl NetworkParams {
    pub fn zeros(spec: NetworkSpec) -> Self {
        let (kh, kw) = spec.kernel;
        Self {
            spec,
            seed: 0,
            conv_w: Array3::zeros((spec.filters, kh, kw)),
            conv_b: Array1::zeros(spec.filters),
            hidden_w: Array2::zeros((spec.hidden_units, spec.flat_len())),
            hidden_b: Array1::zeros(spec.hidden_units),
            out_w: Array1::zeros(spec.hidden_units),
            out_b: Array1::zeros(1),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Self::zeros(spec);
        params.seed = seed;
        let (kh, kw) = spec.kernel;
        let glorot = |fan_in: usize, fan_out: usize| (6.0 / (fan_in + fan_out) as f64).sqrt();
        let conv_limit = glorot(kh * kw, spec.filters * kh * kw);
        let hidden_limit = glorot(spec.flat_len(), spec.hidden_units);
        let out_limit = glorot(spec.hidden_units, 1);
        for (w, limit) in [
            (params.conv_w.as_slice_mut().unwrap(), conv_limit),
            (params.hidden_w.as_slice_mut().unwrap(), hidden_limit),
            (params.out_w.as_slice_mut().unwrap(), out_limit),
        ] {
            for v in w.iter_mut() {
                *v = rng.gen_range(-limit..=limit);
            }
        }
        Ok(params)
    }

    /// Checks tensor shapes against `spec` and that every value is finite.
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let expected = Self::zeros(self.spec);
        let shapes_match = self.conv_w.dim() == expected.conv_w.dim()
            && self.conv_b.dim() == expected.conv_b.dim()
            && self.hidden_w.dim() == expected.hidden_w.dim()
            && self.hidden_b.dim() == expected.hidden_b.dim()
            && self.out_w.dim() == expected.out_w.dim()
            && self.out_b.dim() == expected.out_b.dim();
        if !shapes_match {
            return Err(Error::Shape("network tensors do not match the architecture".into()));
        }
        for (name, values) in self.layers() {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    layer: name,
                    detail: "parameter".into(),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn layers(&self) -> [(&'static str, &[f64]); 6] {
        [
            (LAYER_NAMES[0], self.conv_w.as_slice().unwrap()),
            (LAYER_NAMES[1], self.conv_b.as_slice().unwrap()),
            (LAYER_NAMES[2], self.hidden_w.as_slice().unwrap()),
            (LAYER_NAMES[3], self.hidden_b.as_slice().unwrap()),
            (LAYER_NAMES[4], self.out_w.as_slice().unwrap()),
            (LAYER_NAMES[5], self.out_b.as_slice().unwrap()),
        ]
    }

    pub(crate) fn layers_mut(&mut self) -> [(&'static str, &mut [f64]); 6] {
        [
            (LAYER_NAMES[0], self.conv_w.as_slice_mut().unwrap()),
            (LAYER_NAMES[1], self.conv_b.as_slice_mut().unwrap()),
            (LAYER_NAMES[2], self.hidden_w.as_slice_mut().unwrap()),
            (LAYER_NAMES[3], self.hidden_b.as_slice_mut().unwrap()),
            (LAYER_NAMES[4], self.out_w.as_slice_mut().unwrap()),
            (LAYER_NAMES[5], self.out_b.as_slice_mut().unwrap()),
        ]
    }

    /// Sum of squared weights; biases are not penalized.
    pub fn weight_sq_norm(&self) -> f64 {
        self.layers()
            .iter()
            .filter(|(name, _)| name.ends_with(".weight"))
            .flat_map(|(_, w)| w.iter())
            .map(|w| w * w)
            .sum()
    }
}
