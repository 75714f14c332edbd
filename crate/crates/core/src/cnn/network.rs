use std::borrow::Cow;

use ndarray::Array2;

use super::{NetworkParams, PoolMode};
use crate::completion::PairEmbedding;
use crate::error::{Error, Result};

/// Predictions are clamped to `[eps, 1 - eps]` before taking logarithms.
pub const PROB_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub probability: f64,
    /// Hidden-layer activations (after ReLU).
    pub features: Vec<f64>,
}

/// Intermediate values of one forward pass, kept for backpropagation.
struct Trace {
    conv: Vec<f64>,
    pooled: Vec<f64>,
    argmax: Vec<usize>,
    hidden: Vec<f64>,
    prob: f64,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Four independent partial sums so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn input_slice<'a>(params: &NetworkParams, x: &'a PairEmbedding) -> Result<Cow<'a, [f64]>> {
    let spec = &params.spec;
    if x.matrix.dim() != (spec.input_height, spec.input_width) {
        return Err(Error::Shape(format!(
            "embedding is {:?}, network expects {}x{}",
            x.matrix.dim(),
            spec.input_height,
            spec.input_width
        )));
    }
    Ok(match x.matrix.as_slice() {
        Some(s) => Cow::Borrowed(s),
        None => Cow::Owned(x.matrix.iter().copied().collect()),
    })
}

fn run(params: &NetworkParams, x: &[f64]) -> Trace {
    let spec = &params.spec;
    let width = spec.input_width;
    let (kh, kw) = spec.kernel;
    let (ch, cw) = spec.conv_shape();
    let (ph, pw) = spec.pool;
    let (oh, ow) = spec.pooled_shape();
    let kernels = params.conv_w.as_slice().unwrap();

    let mut conv = vec![0.0; spec.filters * ch * cw];
    for f in 0..spec.filters {
        for r in 0..ch {
            for c in 0..cw {
                let mut sum = params.conv_b[f];
                for a in 0..kh {
                    let xs = &x[(r + a) * width + c..][..kw];
                    let ws = &kernels[(f * kh + a) * kw..][..kw];
                    sum += dot(xs, ws);
                }
                conv[(f * ch + r) * cw + c] = sum.max(0.0);
            }
        }
    }

    let mut pooled = vec![0.0; spec.flat_len()];
    let mut argmax = vec![0; spec.flat_len()];
    for f in 0..spec.filters {
        for r in 0..oh {
            for c in 0..ow {
                let m = (f * oh + r) * ow + c;
                let mut best = f64::NEG_INFINITY;
                let mut best_at = 0;
                let mut total = 0.0;
                for a in 0..ph {
                    for b in 0..pw {
                        let idx = (f * ch + r * ph + a) * cw + c * pw + b;
                        total += conv[idx];
                        if conv[idx] > best {
                            best = conv[idx];
                            best_at = idx;
                        }
                    }
                }
                pooled[m] = match spec.pool_mode {
                    PoolMode::Max => best,
                    PoolMode::Mean => total / (ph * pw) as f64,
                };
                argmax[m] = best_at;
            }
        }
    }

    let hidden: Vec<f64> = params
        .hidden_w
        .outer_iter()
        .zip(params.hidden_b.iter())
        .map(|(w, b)| (dot(w.as_slice().unwrap(), &pooled) + b).max(0.0))
        .collect();
    let logit = dot(params.out_w.as_slice().unwrap(), &hidden) + params.out_b[0];

    Trace {
        conv,
        pooled,
        argmax,
        hidden,
        prob: sigmoid(logit),
    }
}

/// Accumulates `scale * d(loss)/d(params)` of one sample into `grads`.
fn backward(params: &NetworkParams, x: &[f64], trace: &Trace, label: f64, scale: f64, grads: &mut NetworkParams) {
    let spec = &params.spec;
    let width = spec.input_width;
    let (kh, kw) = spec.kernel;
    let (ch, cw) = spec.conv_shape();
    let (ph, pw) = spec.pool;
    let (oh, ow) = spec.pooled_shape();

    // sigmoid + binary cross-entropy
    let dlogit = scale * (trace.prob - label);
    grads.out_b[0] += dlogit;
    for (g, h) in grads.out_w.iter_mut().zip(&trace.hidden) {
        *g += dlogit * h;
    }

    let mut dpooled = vec![0.0; trace.pooled.len()];
    for k in 0..spec.hidden_units {
        if trace.hidden[k] <= 0.0 {
            continue;
        }
        let dh = dlogit * params.out_w[k];
        grads.hidden_b[k] += dh;
        let w = params.hidden_w.row(k);
        let mut gw = grads.hidden_w.row_mut(k);
        for ((g, p), (d, wv)) in gw
            .iter_mut()
            .zip(&trace.pooled)
            .zip(dpooled.iter_mut().zip(w.iter()))
        {
            *g += dh * p;
            *d += dh * wv;
        }
    }

    let mut dconv = vec![0.0; trace.conv.len()];
    match spec.pool_mode {
        PoolMode::Max => {
            for (m, &d) in dpooled.iter().enumerate() {
                dconv[trace.argmax[m]] += d;
            }
        }
        PoolMode::Mean => {
            let share = 1.0 / (ph * pw) as f64;
            for f in 0..spec.filters {
                for r in 0..oh {
                    for c in 0..ow {
                        let d = dpooled[(f * oh + r) * ow + c] * share;
                        for a in 0..ph {
                            for b in 0..pw {
                                dconv[(f * ch + r * ph + a) * cw + c * pw + b] += d;
                            }
                        }
                    }
                }
            }
        }
    }

    let gk = grads.conv_w.as_slice_mut().unwrap();
    for f in 0..spec.filters {
        for r in 0..ch {
            for c in 0..cw {
                let idx = (f * ch + r) * cw + c;
                // ReLU: the stored activation is positive iff the input was
                let d = if trace.conv[idx] > 0.0 { dconv[idx] } else { 0.0 };
                if d == 0.0 {
                    continue;
                }
                grads.conv_b[f] += d;
                for a in 0..kh {
                    let xs = &x[(r + a) * width + c..][..kw];
                    let gs = &mut gk[(f * kh + a) * kw..][..kw];
                    for (g, xv) in gs.iter_mut().zip(xs) {
                        *g += d * xv;
                    }
                }
            }
        }
    }
}

pub fn forward(params: &NetworkParams, x: &PairEmbedding) -> Result<Forward> {
    let input = input_slice(params, x)?;
    let trace = run(params, &input);
    Ok(Forward {
        probability: trace.prob,
        features: trace.hidden,
    })
}

/// Hidden-layer features of every embedding, one row per sample.
pub fn extract_features(params: &NetworkParams, xs: &[PairEmbedding]) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((xs.len(), params.spec.hidden_units));
    for (mut row, x) in out.outer_iter_mut().zip(xs) {
        let f = forward(params, x)?;
        row.assign(&ndarray::ArrayView1::from(&f.features));
    }
    Ok(out)
}

fn bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

fn check_batch(batch: &[PairEmbedding], labels: &[f64]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    if batch.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} samples but {} labels",
            batch.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// Mean binary cross-entropy plus `l2 / 2` times the squared weight norm.
pub fn loss(params: &NetworkParams, batch: &[PairEmbedding], labels: &[f64], l2: f64) -> Result<f64> {
    check_batch(batch, labels)?;
    let mut total = 0.0;
    for (x, &y) in batch.iter().zip(labels) {
        total += bce(forward(params, x)?.probability, y);
    }
    Ok(total / batch.len() as f64 + 0.5 * l2 * params.weight_sq_norm())
}

/// Loss and its gradient with respect to every parameter. The returned
/// gradient reuses the parameter container (its `seed` is meaningless).
pub fn loss_and_gradient(
    params: &NetworkParams,
    batch: &[PairEmbedding],
    labels: &[f64],
    l2: f64,
) -> Result<(f64, NetworkParams)> {
    check_batch(batch, labels)?;
    let mut grads = NetworkParams::zeros(params.spec);
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for (x, &y) in batch.iter().zip(labels) {
        let input = input_slice(params, x)?;
        let trace = run(params, &input);
        total += bce(trace.prob, y);
        backward(params, &input, &trace, y, scale, &mut grads);
    }
    if l2 != 0.0 {
        for ((name, g), (_, w)) in grads.layers_mut().into_iter().zip(params.layers()) {
            if name.ends_with(".weight") {
                for (g, w) in g.iter_mut().zip(w) {
                    *g += l2 * w;
                }
            }
        }
    }
    Ok((total * scale + 0.5 * l2 * params.weight_sq_norm(), grads))
}
