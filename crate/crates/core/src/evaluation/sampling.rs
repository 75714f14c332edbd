use std::collections::HashSet;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{AssociationMatrix, FoldMask};
use crate::error::{Error, Result};

/// Where a set of labeled pairs came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Fold(usize),
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabeledPair {
    pub lnc: usize,
    pub disease: usize,
    pub label: bool,
}

/// Training or test samples; no `(lnc, disease)` pair occurs twice.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPairSet {
    pairs: Vec<LabeledPair>,
    provenance: Provenance,
}

impl LabeledPairSet {
    pub fn new(pairs: Vec<LabeledPair>, provenance: Provenance) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for p in &pairs {
            if !seen.insert((p.lnc, p.disease)) {
                return Err(Error::Shape(format!(
                    "pair ({}, {}) appears twice in a labeled set",
                    p.lnc, p.disease
                )));
            }
        }
        Ok(Self { pairs, provenance })
    }

    /// Positives followed by negatives.
    pub fn from_parts(
        positives: &[(usize, usize)],
        negatives: &[(usize, usize)],
        provenance: Provenance,
    ) -> Result<Self> {
        let label = |label| move |&(lnc, disease): &(usize, usize)| LabeledPair { lnc, disease, label };
        let pairs = positives
            .iter()
            .map(label(true))
            .chain(negatives.iter().map(label(false)))
            .collect();
        Self::new(pairs, provenance)
    }

    pub fn pairs(&self) -> &[LabeledPair] {
        &self.pairs
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.pairs.iter().map(|p| p.label).collect()
    }

    pub fn contains_pair(&self, pair: (usize, usize)) -> bool {
        self.pairs.iter().any(|p| (p.lnc, p.disease) == pair)
    }

    pub fn pair_set(&self) -> HashSet<(usize, usize)> {
        self.pairs.iter().map(|p| (p.lnc, p.disease)).collect()
    }
}

/// Uniform sample without replacement from the zero entries of `ld` not in
/// `exclude`. Returned in ascending `(lnc, disease)` order.
pub fn sample_negatives(
    ld: &AssociationMatrix,
    count: usize,
    seed: u64,
    exclude: &HashSet<(usize, usize)>,
) -> Result<Vec<(usize, usize)>> {
    let candidates: Vec<(usize, usize)> = ld
        .values()
        .indexed_iter()
        .filter(|(ij, &v)| v == 0.0 && !exclude.contains(ij))
        .map(|(ij, _)| ij)
        .collect();
    if count > candidates.len() {
        return Err(Error::NotEnoughNegatives {
            requested: count,
            available: candidates.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<(usize, usize)> = sample(&mut rng, candidates.len(), count)
        .into_iter()
        .map(|k| candidates[k])
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Shuffles the positives and cuts them into `k` contiguous folds; the
/// first `n mod k` folds take one extra pair.
pub fn kfold_split(positives: &[(usize, usize)], k: usize, seed: u64) -> Result<Vec<FoldMask>> {
    if k < 2 {
        return Err(Error::InvalidValue {
            key: "pipeline.folds".into(),
            message: format!("{k} folds; need at least 2"),
        });
    }
    if positives.len() < k {
        return Err(Error::TooFewPositives {
            needed: k,
            found: positives.len(),
        });
    }
    let mut order = positives.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (order.len() / k, order.len() % k);
    let mut start = 0;
    Ok((0..k)
        .map(|f| {
            let size = base + usize::from(f < extra);
            let fold = FoldMask::new(f, order[start..start + size].iter().copied());
            start += size;
            fold
        })
        .collect())
}
