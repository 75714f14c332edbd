//! Random instances and brute-force oracles shared by integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use hcnlda::data::{AssociationMatrix, DiseaseDag, EntityCatalog, EntityKind};
use hcnlda::gbdt::{GbdtConfig, Split, GAIN_TIE_TOLERANCE, HESSIAN_SLACK};
use ndarray::Array2;
use rand::Rng;

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn catalog(kind: EntityKind, prefix: &str, n: usize) -> EntityCatalog {
    EntityCatalog::from_names(kind, names(prefix, n))
}

pub fn random_binary(rng: &mut impl Rng, rows: usize, cols: usize, density: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| f64::from(u8::from(rng.gen_bool(density))))
}

pub fn random_assoc(
    rng: &mut impl Rng,
    (rk, rp, rows): (EntityKind, &str, usize),
    (ck, cp, cols): (EntityKind, &str, usize),
    density: f64,
) -> AssociationMatrix {
    AssociationMatrix::new(
        catalog(rk, rp, rows),
        catalog(ck, cp, cols),
        random_binary(rng, rows, cols, density),
    )
    .unwrap()
}

/// DAG over `d0..d{n-1}` where each ordered pair `i < j` is an edge
/// `dj -> di` (child `dj`) with probability `p`.
pub fn random_dag(rng: &mut impl Rng, n: usize, p: f64) -> DiseaseDag {
    let mut parents = vec![Vec::new(); n];
    for (j, list) in parents.iter_mut().enumerate() {
        for i in 0..j {
            if rng.gen_bool(p) {
                list.push(i);
            }
        }
    }
    DiseaseDag::new(catalog(EntityKind::Disease, "d", n), parents).unwrap()
}

/// Contribution of every ancestor to `node`: the best `delta^len` over all
/// upward paths, found by exhaustive path enumeration.
pub fn contributions_by_paths(parents: &[Vec<usize>], node: usize, delta: f64) -> HashMap<usize, f64> {
    fn walk(parents: &[Vec<usize>], at: usize, weight: f64, delta: f64, out: &mut HashMap<usize, f64>) {
        let best = out.entry(at).or_insert(0.0);
        if weight > *best {
            *best = weight;
        }
        for &p in &parents[at] {
            walk(parents, p, weight * delta, delta, out);
        }
    }
    let mut out = HashMap::new();
    walk(parents, node, 1.0, delta, &mut out);
    out
}

/// Semantic similarity of two nodes from their path contributions.
pub fn semantic_oracle(parents: &[Vec<usize>], a: usize, b: usize, delta: f64) -> f64 {
    if a == b {
        return 1.0;
    }
    let ca = contributions_by_paths(parents, a, delta);
    let cb = contributions_by_paths(parents, b, delta);
    let shared: f64 = ca
        .iter()
        .filter_map(|(t, va)| cb.get(t).map(|vb| va + vb))
        .sum();
    let total: f64 = ca.values().sum::<f64>() + cb.values().sum::<f64>();
    shared / total
}

/// Every midpoint split of every feature, evaluated from scratch.
pub fn split_oracle(x: &Array2<f64>, g: &[f64], h: &[f64], samples: &[usize], cfg: &GbdtConfig) -> Option<Split> {
    let score = |gs: f64, hs: f64| gs * gs / (hs + cfg.lambda);
    let g_all: f64 = samples.iter().map(|&s| g[s]).sum();
    let h_all: f64 = samples.iter().map(|&s| h[s]).sum();
    let mut candidates = Vec::new();
    for f in 0..x.ncols() {
        let mut values: Vec<f64> = samples.iter().map(|&s| x[(s, f)]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let t = if t > w[0] { t } else { w[1] };
            let left: Vec<usize> = samples.iter().copied().filter(|&s| x[(s, f)] < t).collect();
            let gl: f64 = left.iter().map(|&s| g[s]).sum();
            let hl: f64 = left.iter().map(|&s| h[s]).sum();
            let (gr, hr) = (g_all - gl, h_all - hl);
            let floor = cfg.min_child_hessian * (1.0 - HESSIAN_SLACK);
            if hl < floor || hr < floor {
                continue;
            }
            let gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(g_all, h_all)) - cfg.min_split_gain;
            candidates.push(Split { feature: f, threshold: t, gain });
        }
    }
    let best = candidates.iter().map(|c| c.gain).fold(f64::NEG_INFINITY, f64::max);
    if best <= 0.0 {
        return None;
    }
    // lowest (feature, threshold) among candidates tied with the best
    let margin = GAIN_TIE_TOLERANCE * best.abs().max(1.0);
    candidates.into_iter().find(|c| c.gain >= best - margin)
}

/// Mann-Whitney AUC by comparing every positive with every negative.
pub fn auc_by_pairs(scores: &[f64], labels: &[bool]) -> f64 {
    let mut won = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    won += 1.0;
                } else if scores[i] == scores[j] {
                    won += 0.5;
                }
            }
        }
    }
    won / pairs
}

/// Average precision where each positive is credited with the precision
/// among all samples scoring at least as high.
pub fn ap_by_rank_walk(scores: &[f64], labels: &[bool]) -> f64 {
    let positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut total = 0.0;
    for &i in &positives {
        let above: Vec<usize> = (0..scores.len()).filter(|&k| scores[k] >= scores[i]).collect();
        let hits = above.iter().filter(|&&k| labels[k]).count();
        total += hits as f64 / above.len() as f64;
    }
    total / positives.len() as f64
}
