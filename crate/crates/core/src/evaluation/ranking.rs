use std::fmt::Write as _;

use ndarray::Array2;

use super::pipeline::{score_pairs, TrainedModel};
use crate::completion::EmbeddingSource;
use crate::data::AssociationMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub rank: usize,
    pub lnc: String,
    pub disease: String,
    pub score: f64,
}

fn disease_index(ld: &AssociationMatrix, disease: &str) -> Result<usize> {
    ld.cols().position(disease).ok_or_else(|| Error::UnknownName {
        kind: "disease",
        name: disease.to_string(),
    })
}

/// Unobserved lncRNAs for `disease`, best first, at most `top_k` of them.
/// `scores` is lncRNA x disease; entries of known associations are ignored.
/// Equal scores keep catalog order.
pub fn rank_candidates(
    ld: &AssociationMatrix,
    scores: &Array2<f64>,
    disease: &str,
    top_k: usize,
) -> Result<Vec<RankedCandidate>> {
    if top_k == 0 {
        return Err(Error::InvalidValue {
            key: "top".into(),
            message: "must be at least 1".into(),
        });
    }
    if scores.dim() != ld.shape() {
        return Err(Error::Shape(format!(
            "score matrix {:?} does not match associations {:?}",
            scores.dim(),
            ld.shape()
        )));
    }
    let j = disease_index(ld, disease)?;
    let mut candidates: Vec<(usize, f64)> = (0..ld.shape().0)
        .filter(|&i| !ld.is_set(i, j))
        .map(|i| (i, scores[(i, j)]))
        .collect();
    if let Some(&(i, s)) = candidates.iter().find(|(_, s)| !s.is_finite()) {
        return Err(Error::NonFinite {
            layer: "scores",
            detail: format!("candidate '{}' has score {s}", ld.rows().name(i)),
        });
    }
    // stable sort keeps catalog order among equal scores
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(candidates
        .into_iter()
        .take(top_k)
        .enumerate()
        .map(|(r, (i, score))| RankedCandidate {
            rank: r + 1,
            lnc: ld.rows().name(i).to_string(),
            disease: ld.cols().name(j).to_string(),
            score,
        })
        .collect())
}

/// Scores every unobserved pair of the named diseases; all other entries
/// are NaN.
pub fn candidate_scores(
    model: &TrainedModel,
    source: &EmbeddingSource,
    ld: &AssociationMatrix,
    diseases: &[&str],
) -> Result<Array2<f64>> {
    let mut out = Array2::from_elem(ld.shape(), f64::NAN);
    for name in diseases {
        let j = disease_index(ld, name)?;
        let pairs: Vec<(usize, usize)> = (0..ld.shape().0).filter(|&i| !ld.is_set(i, j)).map(|i| (i, j)).collect();
        for (&(i, j), s) in pairs.iter().zip(score_pairs(model, source, &pairs)?) {
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// `rank lncRNA disease score` TSV.
pub fn rankings_tsv(rows: &[RankedCandidate]) -> String {
    let mut out = String::from("rank\tlncRNA\tdisease\tscore\n");
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{:.6}", r.rank, r.lnc, r.disease, r.score).unwrap();
    }
    out
}
