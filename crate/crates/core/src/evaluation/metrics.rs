//! Ranking and threshold metrics.
//!
//! ROC AUC is the Mann-Whitney statistic (score ties earn half credit).
//! Area under the precision-recall curve uses the step rule: each block of
//! tied scores adds its share of recall times the precision reached at the
//! end of the block.

use std::cmp::Ordering;

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

fn check_inputs(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::NonFinite {
            layer: "scores",
            detail: format!("score {s}"),
        });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    Ok((pos, labels.len() - pos))
}

/// Sample indices by descending score, grouped into blocks of equal score.
fn descending_blocks(scores: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match blocks.last_mut() {
            Some(block) if scores[block[0]].total_cmp(&scores[i]) == Ordering::Equal => block.push(i),
            _ => blocks.push(vec![i]),
        }
    }
    blocks
}

/// AUC and the ROC curve as `(fpr, tpr)` points from `(0,0)` to `(1,1)`.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<(f64, Vec<(f64, f64)>)> {
    let (p, n) = check_inputs(scores, labels)?;
    if p == 0 || n == 0 {
        return Err(Error::SingleClass("ROC AUC".into()));
    }
    let blocks = descending_blocks(scores);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    // pairs won: each positive beats every negative ranked strictly below it
    let mut won = 0.0;
    let mut below_neg = n;
    for block in &blocks {
        let bp = block.iter().filter(|&&i| labels[i]).count();
        let bn = block.len() - bp;
        below_neg -= bn;
        won += bp as f64 * (below_neg as f64 + 0.5 * bn as f64);
        tp += bp;
        fp += bn;
        points.push((fp as f64 / n as f64, tp as f64 / p as f64));
    }
    Ok((won / (p as f64 * n as f64), points))
}

/// Average precision and the PR curve as `(recall, precision)` points,
/// starting at `(0, 1)`.
pub fn pr_auc(scores: &[f64], labels: &[bool]) -> Result<(f64, Vec<(f64, f64)>)> {
    let (p, _) = check_inputs(scores, labels)?;
    if p == 0 {
        return Err(Error::SingleClass("precision-recall AUC needs positives; it".into()));
    }
    let mut points = vec![(0.0, 1.0)];
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut area = 0.0;
    for block in descending_blocks(scores) {
        let bp = block.iter().filter(|&&i| labels[i]).count();
        tp += bp;
        seen += block.len();
        let precision = tp as f64 / seen as f64;
        area += bp as f64 / p as f64 * precision;
        points.push((tp as f64 / p as f64, precision));
    }
    Ok((area, points))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdMetrics {
    pub acc: f64,
    pub pre: f64,
    pub f1: f64,
    pub counts: ConfusionCounts,
    /// Precision had a zero denominator and was reported as 0.
    pub pre_undefined: bool,
    /// F1 had a zero denominator and was reported as 0.
    pub f1_undefined: bool,
}

impl ThresholdMetrics {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let ConfusionCounts { tp, fp, tn, fn_ } = counts;
        let total = tp + fp + tn + fn_;
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        Self {
            acc: ratio(tp + tn, total),
            pre: ratio(tp, tp + fp),
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
            counts,
            pre_undefined: tp + fp == 0,
            f1_undefined: 2 * tp + fp + fn_ == 0,
        }
    }
}

/// Accuracy, precision and F1 of `score >= threshold` predictions.
pub fn threshold_metrics(scores: &[f64], labels: &[bool], threshold: f64) -> ThresholdMetrics {
    let mut counts = ConfusionCounts { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y) {
            (true, true) => counts.tp += 1,
            (true, false) => counts.fp += 1,
            (false, false) => counts.tn += 1,
            (false, true) => counts.fn_ += 1,
        }
    }
    ThresholdMetrics::from_counts(counts)
}

/// The five headline numbers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSummary {
    pub auc: f64,
    pub aupr: f64,
    pub acc: f64,
    pub pre: f64,
    pub f1: f64,
}

impl MetricSummary {
    pub fn mean(items: &[MetricSummary]) -> MetricSummary {
        let n = items.len() as f64;
        let avg = |f: fn(&MetricSummary) -> f64| items.iter().map(f).sum::<f64>() / n;
        MetricSummary {
            auc: avg(|m| m.auc),
            aupr: avg(|m| m.aupr),
            acc: avg(|m| m.acc),
            pre: avg(|m| m.pre),
            f1: avg(|m| m.f1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub summary: MetricSummary,
    pub threshold: f64,
    pub threshold_detail: ThresholdMetrics,
    pub roc_points: Vec<(f64, f64)>,
    pub pr_points: Vec<(f64, f64)>,
}

pub fn evaluate(scores: &[f64], labels: &[bool], threshold: f64) -> Result<MetricsReport> {
    let (auc, roc_points) = roc_auc(scores, labels)?;
    let (aupr, pr_points) = pr_auc(scores, labels)?;
    let detail = threshold_metrics(scores, labels, threshold);
    Ok(MetricsReport {
        summary: MetricSummary {
            auc,
            aupr,
            acc: detail.acc,
            pre: detail.pre,
            f1: detail.f1,
        },
        threshold,
        threshold_detail: detail,
        roc_points,
        pr_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_extremes_and_worked_case() {
        let labels = [true, true, false, false];
        assert_eq!(roc_auc(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap().0, 1.0);
        assert_eq!(roc_auc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap().0, 0.0);
        assert_eq!(roc_auc(&[0.9, 0.4, 0.5, 0.1], &labels).unwrap().0, 0.75);
    }

    #[test]
    fn ties_earn_half_credit() {
        let (auc, pts) = roc_auc(&[0.5, 0.5], &[true, false]).unwrap();
        assert_eq!(auc, 0.5);
        assert_eq!(pts, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn roc_curve_endpoints() {
        let (_, pts) = roc_auc(&[0.9, 0.4, 0.5, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(pts.first(), Some(&(0.0, 0.0)));
        assert_eq!(pts.last(), Some(&(1.0, 1.0)));
        assert_eq!(pts.len(), 5);
    }

    #[test]
    fn single_class_errors() {
        assert!(matches!(roc_auc(&[0.1, 0.2], &[true, true]), Err(Error::SingleClass(_))));
        assert!(pr_auc(&[0.1, 0.2], &[false, false]).is_err());
        assert!(roc_auc(&[f64::NAN, 0.2], &[true, false]).is_err());
    }

    #[test]
    fn pr_cases() {
        assert_eq!(pr_auc(&[0.9, 0.8, 0.1], &[true, true, false]).unwrap().0, 1.0);
        assert_eq!(pr_auc(&[0.9, 0.1], &[false, true]).unwrap().0, 0.5);
        // tie block: both precision values taken at the end of the block
        let (ap, pts) = pr_auc(&[0.5, 0.5, 0.5], &[true, false, true]).unwrap();
        assert!((ap - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(pts, vec![(0.0, 1.0), (1.0, 2.0 / 3.0)]);
    }

    #[test]
    fn confusion_case() {
        let m = ThresholdMetrics::from_counts(ConfusionCounts { tp: 3, fp: 1, tn: 4, fn_: 2 });
        assert!((m.acc - 0.7).abs() < 1e-15);
        assert_eq!(m.pre, 0.75);
        assert!((m.f1 - 6.0 / 9.0).abs() < 1e-15);

        let scores = [0.9, 0.8, 0.7, 0.6, 0.1, 0.2, 0.3, 0.4, 0.45, 0.49];
        let labels = [true, true, true, false, true, true, false, false, false, false];
        let t = threshold_metrics(&scores, &labels, 0.5);
        assert_eq!(t.counts, ConfusionCounts { tp: 3, fp: 1, tn: 4, fn_: 2 });
    }

    #[test]
    fn perfect_and_degenerate_thresholds() {
        let m = threshold_metrics(&[0.9, 0.1], &[true, false], 0.5);
        assert_eq!((m.acc, m.pre, m.f1), (1.0, 1.0, 1.0));
        let m = threshold_metrics(&[0.4, 0.1], &[true, false], 0.5);
        assert_eq!(m.pre, 0.0);
        assert!(m.pre_undefined);
        assert!(!m.f1_undefined);
        // threshold is inclusive
        assert_eq!(threshold_metrics(&[0.5], &[true], 0.5).counts.tp, 1);
    }

    #[test]
    fn mean_summary() {
        let a = MetricSummary { auc: 1.0, aupr: 0.5, acc: 0.2, pre: 0.0, f1: 0.4 };
        let b = MetricSummary { auc: 0.5, aupr: 0.5, acc: 0.4, pre: 1.0, f1: 0.2 };
        let m = MetricSummary::mean(&[a, b]);
        assert_eq!(m.auc, 0.75);
        assert!((m.f1 - 0.3).abs() < 1e-15);
    }
}
