//! Second-order gradient-boosted decision trees for binary classification.
//!
//! Each round fits one regression tree to the quadratic expansion of the
//! logistic loss around the current scores. Splits are found by exact greedy
//! search over midpoints between adjacent distinct feature values, and leaf
//! weights are the L2-regularized Newton steps `-G / (H + lambda)`.

mod ensemble;
mod split;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ensemble::{predict_proba, train, BoostedEnsemble, GbdtOutcome};
pub use split::{best_split, split_gain, Split, GAIN_TIE_TOLERANCE, HESSIAN_SLACK};
pub use tree::{build_tree, TreeNode};

/// Probabilities are clamped to `[eps, 1 - eps]` before computing
/// derivatives or log-loss.
pub const PROB_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub num_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub min_split_gain: f64,
    pub min_child_hessian: f64,
    pub base_score: f64,
    /// Fraction of rows drawn (without replacement) for each tree.
    pub subsample: f64,
    /// Fraction of feature columns drawn for each tree.
    pub colsample: f64,
    pub seed: u64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            num_trees: 500,
            max_depth: 15,
            learning_rate: 0.3,
            lambda: 1.0,
            min_split_gain: 0.0,
            min_child_hessian: 1.0,
            base_score: 0.5,
            subsample: 1.0,
            colsample: 1.0,
            seed: 0,
        }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, key: &str, message: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidValue {
                    key: format!("gbdt.{key}"),
                    message: message.into(),
                })
            }
        };
        check(self.max_depth >= 1, "max_depth", "must be at least 1")?;
        check(
            self.learning_rate > 0.0 && self.learning_rate <= 1.0,
            "learning_rate",
            "must lie in (0, 1]",
        )?;
        check(self.lambda >= 0.0 && self.lambda.is_finite(), "lambda", "must be non-negative")?;
        check(self.min_split_gain >= 0.0, "min_split_gain", "must be non-negative")?;
        check(self.min_child_hessian >= 0.0, "min_child_hessian", "must be non-negative")?;
        check(
            self.base_score > 0.0 && self.base_score < 1.0,
            "base_score",
            "must lie in (0, 1)",
        )?;
        check(self.subsample > 0.0 && self.subsample <= 1.0, "subsample", "must lie in (0, 1]")?;
        check(self.colsample > 0.0 && self.colsample <= 1.0, "colsample", "must lie in (0, 1]")?;
        Ok(())
    }
}

/// First and second derivative of the logistic loss with respect to the
/// raw score, at predicted probability `p` and label `y`.
pub fn grad_hess(p: f64, y: f64) -> (f64, f64) {
    let p = p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
    (p - y, p * (1.0 - p))
}

pub(crate) fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub(crate) fn logloss(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives() {
        let (g, h) = grad_hess(1.0, 1.0);
        assert!(g.abs() < 1e-11 && h > 0.0 && h < 1e-11);
        assert_eq!(grad_hess(0.5, 1.0), (-0.5, 0.25));
        assert_eq!(grad_hess(0.5, 0.0), (0.5, 0.25));
    }

    #[test]
    fn config_validation() {
        GbdtConfig::default().validate().unwrap();
        let bad = [
            GbdtConfig { max_depth: 0, ..Default::default() },
            GbdtConfig { learning_rate: 0.0, ..Default::default() },
            GbdtConfig { learning_rate: 1.5, ..Default::default() },
            GbdtConfig { lambda: -1.0, ..Default::default() },
            GbdtConfig { base_score: 1.0, ..Default::default() },
            GbdtConfig { subsample: 0.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        GbdtConfig { num_trees: 0, ..Default::default() }.validate().unwrap();
    }
}
