use ndarray::Array2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::split::{columns_of, sort_by_column};
use super::tree::{Grower, TreeNode};
use super::{grad_hess, logit, logloss, GbdtConfig};
use crate::cnn::sigmoid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    pub config: GbdtConfig,
    pub n_features: usize,
    pub trees: Vec<TreeNode>,
}

impl BoostedEnsemble {
    /// Raw additive score of one row.
    fn raw_score(&self, row: ndarray::ArrayView1<'_, f64>) -> f64 {
        let eta = self.config.learning_rate;
        self.trees
            .iter()
            .fold(logit(self.config.base_score), |acc, t| acc + eta * t.predict(row))
    }
}

#[derive(Debug, Clone)]
pub struct GbdtOutcome {
    pub ensemble: BoostedEnsemble,
    /// Training log-loss before the first tree and after every round.
    pub logloss_trace: Vec<f64>,
}

fn mean_logloss(raw: &[f64], labels: &[f64]) -> f64 {
    raw.iter()
        .zip(labels)
        .map(|(&r, &y)| logloss(sigmoid(r), y))
        .sum::<f64>()
        / raw.len() as f64
}

pub fn train(features: &Array2<f64>, labels: &[f64], cfg: &GbdtConfig) -> Result<GbdtOutcome> {
    cfg.validate()?;
    let (n, m) = features.dim();
    if labels.len() != n {
        return Err(Error::Shape(format!("{n} rows but {} labels", labels.len())));
    }
    if !(labels.contains(&0.0) && labels.contains(&1.0)) {
        return Err(Error::SingleClass("boosting training data".into()));
    }
    if let Some(y) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
        return Err(Error::InvalidValue {
            key: "label".into(),
            message: format!("{y} is not 0 or 1"),
        });
    }

    let all_rows: Vec<usize> = (0..n).collect();
    let data = columns_of(features);
    let presorted: Vec<Vec<usize>> = data.iter().map(|c| sort_by_column(&all_rows, c)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rows_per_tree = ((cfg.subsample * n as f64).round() as usize).clamp(1, n);
    let cols_per_tree = ((cfg.colsample * m as f64).round() as usize).clamp(1, m.max(1));

    let mut raw = vec![logit(cfg.base_score); n];
    let mut trace = vec![mean_logloss(&raw, labels)];
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    let mut trees = Vec::with_capacity(cfg.num_trees);
    let mut in_sample = vec![true; n];

    for _ in 0..cfg.num_trees {
        for i in 0..n {
            (g[i], h[i]) = grad_hess(sigmoid(raw[i]), labels[i]);
        }

        let rows: Vec<usize> = if rows_per_tree < n {
            let mut r = sample(&mut rng, n, rows_per_tree).into_vec();
            r.sort_unstable();
            in_sample.fill(false);
            for &i in &r {
                in_sample[i] = true;
            }
            r
        } else {
            all_rows.clone()
        };
        let columns: Vec<usize> = if cols_per_tree < m {
            let mut c = sample(&mut rng, m, cols_per_tree).into_vec();
            c.sort_unstable();
            c
        } else {
            (0..m).collect()
        };
        let sorted: Vec<Vec<usize>> = columns
            .iter()
            .map(|&f| {
                if rows_per_tree < n {
                    presorted[f].iter().copied().filter(|&i| in_sample[i]).collect()
                } else {
                    presorted[f].clone()
                }
            })
            .collect();

        let tree = Grower {
            data: &data,
            g: &g,
            h: &h,
            cfg,
            columns: &columns,
        }
        .grow(rows, sorted, 0);

        for (i, r) in raw.iter_mut().enumerate() {
            *r += cfg.learning_rate * tree.predict(features.row(i));
        }
        trace.push(mean_logloss(&raw, labels));
        trees.push(tree);
    }

    Ok(GbdtOutcome {
        ensemble: BoostedEnsemble {
            config: *cfg,
            n_features: m,
            trees,
        },
        logloss_trace: trace,
    })
}

pub fn predict_proba(ensemble: &BoostedEnsemble, features: &Array2<f64>) -> Result<Vec<f64>> {
    if features.ncols() != ensemble.n_features {
        return Err(Error::Shape(format!(
            "{} feature columns, ensemble trained on {}",
            features.ncols(),
            ensemble.n_features
        )));
    }
    Ok(features
        .outer_iter()
        .map(|row| sigmoid(ensemble.raw_score(row)))
        .collect())
}
