use ndarray::{s, Array2};

use super::PoolMode;
use crate::error::{Error, Result};

/// Valid-padding, stride-1 cross-correlation of `input` with `kernel`, plus
/// `bias`. The activation is applied by the caller.
pub fn conv_forward(input: &Array2<f64>, kernel: &Array2<f64>, bias: f64) -> Result<Array2<f64>> {
    let (h, w) = input.dim();
    let (kh, kw) = kernel.dim();
    if kh == 0 || kw == 0 || kh > h || kw > w {
        return Err(Error::Shape(format!("kernel {kh}x{kw} larger than input {h}x{w}")));
    }
    let out = Array2::from_shape_fn((h - kh + 1, w - kw + 1), |(r, c)| {
        let window = input.slice(s![r..r + kh, c..c + kw]);
        (&window * kernel).sum() + bias
    });
    Ok(out)
}

/// Non-overlapping pooling with stride equal to the window; trailing
/// partial windows are dropped.
pub fn pool_forward(input: &Array2<f64>, window: (usize, usize), mode: PoolMode) -> Result<Array2<f64>> {
    let (h, w) = input.dim();
    let (ph, pw) = window;
    if ph == 0 || pw == 0 || ph > h || pw > w {
        return Err(Error::Shape(format!("pool window {ph}x{pw} larger than input {h}x{w}")));
    }
    let out = Array2::from_shape_fn((h / ph, w / pw), |(r, c)| {
        let cell = input.slice(s![r * ph..(r + 1) * ph, c * pw..(c + 1) * pw]);
        match mode {
            PoolMode::Max => cell.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            PoolMode::Mean => cell.mean().unwrap(),
        }
    });
    Ok(out)
}
