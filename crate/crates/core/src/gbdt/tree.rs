use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::split::{columns_of, sort_by_column, SplitSearch, HESSIAN_SLACK};
use super::GbdtConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<FlatNode>", try_from = "Vec<FlatNode>")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        weight: f64,
    },
}

impl TreeNode {
    pub fn predict(&self, row: ArrayView1<'_, f64>) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit_leaves(&mut out);
        out
    }

    fn visit_leaves(&self, out: &mut Vec<f64>) {
        match self {
            TreeNode::Leaf { weight } => out.push(*weight),
            TreeNode::Split { left, right, .. } => {
                left.visit_leaves(out);
                right.visit_leaves(out);
            }
        }
    }

    pub fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split {
                feature, left, right, ..
            } => Some(
                [Some(*feature), left.max_feature(), right.max_feature()]
                    .into_iter()
                    .flatten()
                    .max()
                    .unwrap(),
            ),
        }
    }
}

/// Pre-order node record used for persistence.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlatNode {
    Split { feature: usize, threshold: f64 },
    Leaf { weight: f64 },
}

impl From<TreeNode> for Vec<FlatNode> {
    fn from(tree: TreeNode) -> Self {
        fn walk(node: &TreeNode, out: &mut Vec<FlatNode>) {
            match node {
                TreeNode::Leaf { weight } => out.push(FlatNode::Leaf { weight: *weight }),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    out.push(FlatNode::Split {
                        feature: *feature,
                        threshold: *threshold,
                    });
                    walk(left, out);
                    walk(right, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&tree, &mut out);
        out
    }
}

impl TryFrom<Vec<FlatNode>> for TreeNode {
    type Error = Error;

    fn try_from(nodes: Vec<FlatNode>) -> Result<Self> {
        fn take(nodes: &[FlatNode], pos: &mut usize) -> Result<TreeNode> {
            let node = nodes
                .get(*pos)
                .ok_or_else(|| Error::Model("truncated pre-order tree".into()))?;
            *pos += 1;
            Ok(match *node {
                FlatNode::Leaf { weight } => TreeNode::Leaf { weight },
                FlatNode::Split { feature, threshold } => {
                    let left = Box::new(take(nodes, pos)?);
                    let right = Box::new(take(nodes, pos)?);
                    TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    }
                }
            })
        }
        let mut pos = 0;
        let tree = take(&nodes, &mut pos)?;
        if pos != nodes.len() {
            return Err(Error::Model("trailing nodes after pre-order tree".into()));
        }
        Ok(tree)
    }
}

/// Tree growth over per-feature sorted sample lists; children inherit the
/// parent's order through stable partitioning.
pub(crate) struct Grower<'a> {
    /// Feature values by column, see [`columns_of`].
    pub data: &'a [Vec<f64>],
    pub g: &'a [f64],
    pub h: &'a [f64],
    pub cfg: &'a GbdtConfig,
    /// Feature columns eligible for splits, ascending.
    pub columns: &'a [usize],
}

impl Grower<'_> {
    /// `samples` is ascending; `sorted[k]` orders the same samples by
    /// `columns[k]`.
    pub(crate) fn grow(&self, samples: Vec<usize>, sorted: Vec<Vec<usize>>, depth: usize) -> TreeNode {
        let g_total: f64 = samples.iter().map(|&s| self.g[s]).sum();
        let h_total: f64 = samples.iter().map(|&s| self.h[s]).sum();
        let leaf = TreeNode::Leaf {
            weight: -g_total / (h_total + self.cfg.lambda),
        };
        // both children need min_child_hessian
        let too_light = h_total < 2.0 * self.cfg.min_child_hessian * (1.0 - HESSIAN_SLACK);
        if depth >= self.cfg.max_depth || samples.len() < 2 || too_light {
            return leaf;
        }
        let mut search = SplitSearch::default();
        for (k, &feature) in self.columns.iter().enumerate() {
            search.scan(feature, &sorted[k], &self.data[feature], self.g, self.h, g_total, h_total, self.cfg);
        }
        let Some(split) = search.finish() else {
            return leaf;
        };

        let column = &self.data[split.feature];
        let goes_left = |s: usize| column[s] < split.threshold;
        let (left_samples, right_samples): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&s| goes_left(s));
        let mut left_sorted = Vec::with_capacity(sorted.len());
        let mut right_sorted = Vec::with_capacity(sorted.len());
        for list in sorted {
            let (l, r): (Vec<usize>, Vec<usize>) = list.into_iter().partition(|&s| goes_left(s));
            left_sorted.push(l);
            right_sorted.push(r);
        }
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(left_samples, left_sorted, depth + 1)),
            right: Box::new(self.grow(right_samples, right_sorted, depth + 1)),
        }
    }
}

/// Grows one regression tree on all samples and features.
pub fn build_tree(features: &Array2<f64>, g: &[f64], h: &[f64], cfg: &GbdtConfig) -> TreeNode {
    let samples: Vec<usize> = (0..features.nrows()).collect();
    let columns: Vec<usize> = (0..features.ncols()).collect();
    let data = columns_of(features);
    let sorted = data.iter().map(|c| sort_by_column(&samples, c)).collect();
    Grower {
        data: &data,
        g,
        h,
        cfg,
        columns: &columns,
    }
    .grow(samples, sorted, 0)
}
