use ndarray::Array2;

use super::GbdtConfig;

/// Relative margin a candidate's gain must exceed the incumbent by to
/// replace it. Candidates within the margin are ties and the earlier one
/// (lower feature, then lower threshold) is kept.
pub const GAIN_TIE_TOLERANCE: f64 = 1e-12;

/// Relative slack on the `min_child_hessian` test. Child sums that are equal
/// to the bound in exact arithmetic can land a few ulps either side of it
/// depending on summation order.
pub const HESSIAN_SLACK: f64 = 1e-9;

pub(crate) fn heavy_enough(h: f64, cfg: &GbdtConfig) -> bool {
    h >= cfg.min_child_hessian * (1.0 - HESSIAN_SLACK)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    /// Samples with `x[feature] < threshold` go left.
    pub threshold: f64,
    pub gain: f64,
}

/// Reduction of the regularized quadratic objective from splitting a node.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, cfg: &GbdtConfig) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + cfg.lambda);
    0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr)) - cfg.min_split_gain
}

pub(crate) fn beats(candidate: f64, incumbent: Option<f64>) -> bool {
    match incumbent {
        None => true,
        Some(best) => candidate > best + GAIN_TIE_TOLERANCE * best.abs().max(1.0),
    }
}

/// Midpoint between two adjacent distinct values that still separates them.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// Running best candidate across features scanned in ascending order.
#[derive(Default)]
pub(crate) struct SplitSearch {
    best: Option<Split>,
}

impl SplitSearch {
    /// Scans one feature. `column` holds that feature for every sample and
    /// `sorted` the node's samples ordered by it; `g_total`/`h_total` are
    /// node sums.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn scan(
        &mut self,
        feature: usize,
        sorted: &[usize],
        column: &[f64],
        g: &[f64],
        h: &[f64],
        g_total: f64,
        h_total: f64,
        cfg: &GbdtConfig,
    ) {
        let (mut gl, mut hl) = (0.0, 0.0);
        for w in 0..sorted.len().saturating_sub(1) {
            let s = sorted[w];
            gl += g[s];
            hl += h[s];
            let lo = column[s];
            let hi = column[sorted[w + 1]];
            if lo == hi {
                continue;
            }
            let hr = h_total - hl;
            if !(heavy_enough(hl, cfg) && heavy_enough(hr, cfg)) {
                continue;
            }
            let gain = split_gain(gl, hl, g_total - gl, hr, cfg);
            if beats(gain, self.best.map(|b| b.gain)) {
                self.best = Some(Split {
                    feature,
                    threshold: midpoint(lo, hi),
                    gain,
                });
            }
        }
    }

    pub(crate) fn finish(self) -> Option<Split> {
        self.best.filter(|s| s.gain > 0.0)
    }
}

pub(crate) fn sort_by_column(samples: &[usize], column: &[f64]) -> Vec<usize> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|&a, &b| column[a].total_cmp(&column[b]).then(a.cmp(&b)));
    sorted
}

/// Feature columns as contiguous vectors.
pub(crate) fn columns_of(features: &Array2<f64>) -> Vec<Vec<f64>> {
    features.columns().into_iter().map(|c| c.to_vec()).collect()
}

/// Exact greedy search for the best split of `node_samples`. Returns `None`
/// when no split has positive gain with both children meeting
/// `min_child_hessian`.
pub fn best_split(
    features: &Array2<f64>,
    g: &[f64],
    h: &[f64],
    node_samples: &[usize],
    cfg: &GbdtConfig,
) -> Option<Split> {
    let g_total: f64 = node_samples.iter().map(|&s| g[s]).sum();
    let h_total: f64 = node_samples.iter().map(|&s| h[s]).sum();
    let mut search = SplitSearch::default();
    for (feature, column) in columns_of(features).iter().enumerate() {
        let sorted = sort_by_column(node_samples, column);
        search.scan(feature, &sorted, column, g, h, g_total, h_total, cfg);
    }
    search.finish()
}
