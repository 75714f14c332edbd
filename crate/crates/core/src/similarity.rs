//! Similarity kernels over lncRNAs and diseases and their max-fusion.
//!
//! * disease semantic similarity from shared ancestors in the disease DAG,
//!   each ancestor contributing `delta^k` for its closest distance `k`;
//! * lncRNA functional similarity as a best-match average of the semantic
//!   similarity between the two lncRNAs' disease sets;
//! * Gaussian interaction profile (GIP) kernels over association profiles.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{AssociationMatrix, DiseaseDag, EntityCatalog};
use crate::error::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.5;

/// Square, symmetric matrix with entries in `[0, 1]` over one catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    catalog: EntityCatalog,
    values: Array2<f64>,
}

impl SimilarityMatrix {
    pub fn new(catalog: EntityCatalog, values: Array2<f64>) -> Result<Self> {
        let n = catalog.len();
        if values.dim() != (n, n) {
            return Err(Error::Shape(format!(
                "similarity matrix is {:?} for {n} entities",
                values.dim()
            )));
        }
        Ok(Self { catalog, values })
    }

    pub fn identity(catalog: EntityCatalog) -> Self {
        let n = catalog.len();
        Self {
            catalog,
            values: Array2::eye(n),
        }
    }

    pub fn catalog(&self) -> &EntityCatalog {
        &self.catalog
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.catalog.len()
    }

    pub fn is_empty(&self) -> bool {
        self.catalog.is_empty()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[(a, b)]
    }

    pub fn row(&self, a: usize) -> ArrayView1<'_, f64> {
        self.values.row(a)
    }

    /// Largest `|S(a,b) - S(b,a)|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                worst = worst.max((self.values[(a, b)] - self.values[(b, a)]).abs());
            }
        }
        worst
    }
}

/// Fills the upper triangle with `f` and mirrors it; the diagonal is 1.
fn symmetric_from(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Array2<f64> {
    let mut values = Array2::eye(n);
    for a in 0..n {
        for b in a + 1..n {
            let v = f(a, b);
            values[(a, b)] = v;
            values[(b, a)] = v;
        }
    }
    values
}

/// Contribution of every ancestor of `disease` (itself included) to its
/// semantics. Nodes outside the ancestor set are absent from the map.
pub fn semantic_contribution(
    dag: &DiseaseDag,
    disease: usize,
    delta: f64,
) -> Result<HashMap<usize, f64>> {
    if disease >= dag.len() {
        return Err(Error::OutOfRange(format!(
            "disease node {disease} of {}",
            dag.len()
        )));
    }
    Ok(contribution_list(dag, disease, delta).into_iter().collect())
}

/// Sorted `(node, contribution)` pairs for `disease`.
fn contribution_list(dag: &DiseaseDag, disease: usize, delta: f64) -> Vec<(usize, f64)> {
    let mut value = vec![f64::NAN; dag.len()];
    value[disease] = 1.0;
    for &v in dag.bottom_up_order() {
        // Only ancestors of `disease` are ever assigned; all of v's children
        // precede it, so its value is final here.
        if value[v].is_nan() {
            continue;
        }
        let passed = delta * value[v];
        for &p in dag.parents(v) {
            if value[p].is_nan() || passed > value[p] {
                value[p] = passed;
            }
        }
    }
    value
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .collect()
}

/// Semantic value of a disease: the sum of its contributions.
pub fn semantic_value(contrib: &HashMap<usize, f64>) -> f64 {
    contrib.values().sum()
}

/// Contributions of a node's ancestors and their sum.
type Profile = (Vec<(usize, f64)>, f64);

/// Semantic similarity over `catalog`. Diseases missing from the DAG are
/// similar only to themselves.
pub fn disease_semantic_similarity(
    dag: &DiseaseDag,
    catalog: &EntityCatalog,
    delta: f64,
) -> SimilarityMatrix {
    let profiles: Vec<Option<Profile>> = catalog
        .names()
        .iter()
        .map(|name| {
            dag.nodes().position(name).map(|node| {
                let list = contribution_list(dag, node, delta);
                let dv = list.iter().map(|(_, v)| v).sum();
                (list, dv)
            })
        })
        .collect();

    let values = symmetric_from(catalog.len(), |a, b| match (&profiles[a], &profiles[b]) {
        (Some((pa, dva)), Some((pb, dvb))) => {
            // merge-join over the sorted ancestor lists
            let (mut x, mut y, mut shared) = (0, 0, 0.0);
            while x < pa.len() && y < pb.len() {
                match pa[x].0.cmp(&pb[y].0) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        shared += pa[x].1 + pb[y].1;
                        x += 1;
                        y += 1;
                    }
                }
            }
            shared / (dva + dvb)
        }
        _ => 0.0,
    });
    SimilarityMatrix {
        catalog: catalog.clone(),
        values,
    }
}

/// Functional similarity of lncRNAs from the semantic similarity of their
/// associated disease sets.
pub fn lncrna_functional_similarity(
    ld: &AssociationMatrix,
    ds: &SimilarityMatrix,
) -> Result<SimilarityMatrix> {
    if !ld.cols().same_as(ds.catalog()) {
        return Err(Error::Shape(
            "association columns and disease similarity use different catalogs".into(),
        ));
    }
    let disease_sets: Vec<Vec<usize>> = ld
        .values()
        .outer_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v == 1.0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();

    // best match of each disease in `from` against the set `to`
    let best_match_sum = |from: &[usize], to: &[usize]| -> f64 {
        from.iter()
            .map(|&d| to.iter().map(|&e| ds.get(d, e)).fold(0.0, f64::max))
            .sum()
    };

    let values = symmetric_from(ld.rows().len(), |a, b| {
        let (da, db) = (&disease_sets[a], &disease_sets[b]);
        if da.is_empty() || db.is_empty() {
            return 0.0;
        }
        (best_match_sum(da, db) + best_match_sum(db, da)) / (da.len() + db.len()) as f64
    });
    SimilarityMatrix::new(ld.rows().clone(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileAxis {
    /// Profiles are matrix rows (lncRNAs in LD).
    Rows,
    /// Profiles are matrix columns (diseases in LD).
    Cols,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GipConfig {
    pub gamma_prime: f64,
}

impl Default for GipConfig {
    fn default() -> Self {
        Self { gamma_prime: 1.0 }
    }
}

impl GipConfig {
    pub fn new(gamma_prime: f64) -> Result<Self> {
        if !(gamma_prime > 0.0 && gamma_prime.is_finite()) {
            return Err(Error::InvalidValue {
                key: "gamma_prime".into(),
                message: format!("{gamma_prime} must be positive"),
            });
        }
        Ok(Self { gamma_prime })
    }
}

/// Bandwidth-normalized Gaussian kernel over interaction profiles.
pub fn gip_kernel(y: &AssociationMatrix, axis: ProfileAxis, cfg: GipConfig) -> SimilarityMatrix {
    let (values, catalog) = match axis {
        ProfileAxis::Rows => (y.values().view(), y.rows()),
        ProfileAxis::Cols => (y.values().t(), y.cols()),
    };
    let n = values.len_of(Axis(0));
    let norms: Vec<f64> = values
        .outer_iter()
        .map(|p| p.iter().map(|v| v * v).sum())
        .collect();
    let total: f64 = norms.iter().sum();
    let gamma = if total == 0.0 {
        1.0
    } else {
        cfg.gamma_prime / (total / n as f64)
    };
    let profiles: Vec<ArrayView1<f64>> = values.outer_iter().collect();
    let kernel = symmetric_from(n, |a, b| {
        let dist: f64 = profiles[a]
            .iter()
            .zip(profiles[b].iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        (-gamma * dist).exp()
    });
    SimilarityMatrix {
        catalog: catalog.clone(),
        values: kernel,
    }
}

/// Elementwise maximum of two similarity matrices over the same catalog.
pub fn fuse_max(a: &SimilarityMatrix, b: &SimilarityMatrix) -> Result<SimilarityMatrix> {
    if !a.catalog.same_as(&b.catalog) {
        return Err(Error::Shape("cannot fuse similarities over different catalogs".into()));
    }
    let values = ndarray::Zip::from(&a.values)
        .and(&b.values)
        .map_collect(|&x, &y| x.max(y));
    Ok(SimilarityMatrix {
        catalog: a.catalog.clone(),
        values,
    })
}
