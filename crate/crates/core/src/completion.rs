//! Completion of the lncRNA-disease matrix through the miRNA layer and
//! assembly of per-pair embeddings.

use ndarray::{s, Array1, Array2};

use crate::data::{AssociationMatrix, EntityCatalog};
use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

/// Real-valued lncRNA x disease matrix with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletedMatrix {
    rows: EntityCatalog,
    cols: EntityCatalog,
    values: Array2<f64>,
}

impl CompletedMatrix {
    pub fn rows(&self) -> &EntityCatalog {
        &self.rows
    }

    pub fn cols(&self) -> &EntityCatalog {
        &self.cols
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.dim()
    }
}

impl From<&AssociationMatrix> for CompletedMatrix {
    fn from(m: &AssociationMatrix) -> Self {
        Self {
            rows: m.rows().clone(),
            cols: m.cols().clone(),
            values: m.values().clone(),
        }
    }
}

/// Inferred lncRNA-disease scores: shared miRNAs divided by the sum of the
/// lncRNA's miRNA count and the disease's miRNA count (0 when both are 0).
pub fn geometric_complement(lm: &AssociationMatrix, md: &AssociationMatrix) -> Result<CompletedMatrix> {
    if !lm.cols().same_as(md.rows()) {
        return Err(Error::Shape(
            "lncRNA-miRNA columns and miRNA-disease rows use different miRNA catalogs".into(),
        ));
    }
    let shared = lm.values().dot(md.values());
    let lnc_degree: Array1<f64> = lm.values().sum_axis(ndarray::Axis(1));
    let dis_degree: Array1<f64> = md.values().sum_axis(ndarray::Axis(0));
    let mut values = shared;
    for ((i, j), v) in values.indexed_iter_mut() {
        let denom = lnc_degree[i] + dis_degree[j];
        *v = if denom == 0.0 { 0.0 } else { *v / denom };
    }
    Ok(CompletedMatrix {
        rows: lm.rows().clone(),
        cols: md.cols().clone(),
        values,
    })
}

/// Elementwise maximum of the known associations and the inferred scores.
pub fn fuse_associations(ld: &AssociationMatrix, lmd: &CompletedMatrix) -> Result<CompletedMatrix> {
    if !ld.rows().same_as(&lmd.rows) || !ld.cols().same_as(&lmd.cols) {
        return Err(Error::Shape(format!(
            "association matrix {:?} and completion {:?} disagree",
            ld.shape(),
            lmd.shape()
        )));
    }
    let values = ndarray::Zip::from(ld.values())
        .and(&lmd.values)
        .map_collect(|&a, &b| a.max(b));
    Ok(CompletedMatrix {
        rows: lmd.rows.clone(),
        cols: lmd.cols.clone(),
        values,
    })
}

/// 2 x F input for one lncRNA-disease pair, `F = n_diseases + n_lncrnas`.
///
/// Row 0 is the lncRNA's completed association row followed by its fused
/// similarity row; row 1 is the disease's completed association column
/// followed by its fused similarity column.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEmbedding {
    pub matrix: Array2<f64>,
    pub lnc: usize,
    pub disease: usize,
}

impl PairEmbedding {
    pub fn width(&self) -> usize {
        self.matrix.ncols()
    }
}

/// The three matrices embeddings are cut from, checked once for consistency.
#[derive(Debug, Clone)]
pub struct EmbeddingSource {
    ld_new: CompletedMatrix,
    lfs: SimilarityMatrix,
    ds: SimilarityMatrix,
}

impl EmbeddingSource {
    pub fn new(ld_new: CompletedMatrix, lfs: SimilarityMatrix, ds: SimilarityMatrix) -> Result<Self> {
        if !ld_new.rows.same_as(lfs.catalog()) {
            return Err(Error::Shape("lncRNA similarity catalog differs from matrix rows".into()));
        }
        if !ld_new.cols.same_as(ds.catalog()) {
            return Err(Error::Shape("disease similarity catalog differs from matrix columns".into()));
        }
        Ok(Self { ld_new, lfs, ds })
    }

    pub fn ld_new(&self) -> &CompletedMatrix {
        &self.ld_new
    }

    pub fn lfs(&self) -> &SimilarityMatrix {
        &self.lfs
    }

    pub fn ds(&self) -> &SimilarityMatrix {
        &self.ds
    }

    pub fn n_lnc(&self) -> usize {
        self.lfs.len()
    }

    pub fn n_disease(&self) -> usize {
        self.ds.len()
    }

    pub fn width(&self) -> usize {
        self.n_lnc() + self.n_disease()
    }

    pub fn embed(&self, lnc: usize, disease: usize) -> Result<PairEmbedding> {
        let (nl, nd) = (self.n_lnc(), self.n_disease());
        if lnc >= nl || disease >= nd {
            return Err(Error::OutOfRange(format!(
                "pair ({lnc}, {disease}) outside {nl}x{nd}"
            )));
        }
        let mut matrix = Array2::zeros((2, nd + nl));
        matrix
            .slice_mut(s![0, ..nd])
            .assign(&self.ld_new.values.row(lnc));
        matrix.slice_mut(s![0, nd..]).assign(&self.lfs.row(lnc));
        matrix
            .slice_mut(s![1, ..nl])
            .assign(&self.ld_new.values.column(disease));
        matrix
            .slice_mut(s![1, nl..])
            .assign(&self.ds.values().column(disease));
        Ok(PairEmbedding {
            matrix,
            lnc,
            disease,
        })
    }
}

pub fn build_pair_embedding(
    lnc: usize,
    disease: usize,
    ld_new: &CompletedMatrix,
    lfs: &SimilarityMatrix,
    ds: &SimilarityMatrix,
) -> Result<PairEmbedding> {
    EmbeddingSource::new(ld_new.clone(), lfs.clone(), ds.clone())?.embed(lnc, disease)
}
