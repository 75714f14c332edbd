//! Cross-validated pipeline with per-fold recomputation of every structure
//! derived from lncRNA-disease labels.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metrics::{evaluate, MetricSummary, MetricsReport, DEFAULT_THRESHOLD};
use super::sampling::{kfold_split, sample_negatives, LabeledPairSet, Provenance};
use crate::cnn::{self, extract_features, NetworkParams, TrainConfig};
use crate::completion::{fuse_associations, geometric_complement, CompletedMatrix, EmbeddingSource, PairEmbedding};
use crate::config::{PipelineConfig, SeedTree, Stage, FULL_DATA_FOLD};
use crate::data::{apply_mask, load_associations, load_dag, AssociationMatrix, DiseaseDag, EntityCatalog, EntityKind, FoldMask};
use crate::error::{Error, Result};
use crate::gbdt::{self, predict_proba, BoostedEnsemble, GbdtConfig};
use crate::similarity::{
    disease_semantic_similarity, fuse_max, gip_kernel, lncrna_functional_similarity, GipConfig, ProfileAxis,
    SimilarityMatrix,
};

/// The four inputs over aligned catalogs. lncRNAs and diseases come from
/// the LD file; miRNAs are the union of those named in MD and ML.
#[derive(Debug, Clone)]
pub struct Dataset {
    ld: AssociationMatrix,
    lm: AssociationMatrix,
    md: AssociationMatrix,
    dag: DiseaseDag,
}

impl Dataset {
    /// `md` is miRNA x disease, `ml` is lncRNA x miRNA. Entries naming
    /// lncRNAs or diseases absent from `ld` are dropped.
    pub fn new(ld: AssociationMatrix, md: AssociationMatrix, ml: AssociationMatrix, dag: DiseaseDag) -> Result<Self> {
        if ld.rows().kind() != EntityKind::LncRna || ld.cols().kind() != EntityKind::Disease {
            return Err(Error::Shape("LD must be lncRNA x disease".into()));
        }
        if md.rows().kind() != EntityKind::MiRna || ml.cols().kind() != EntityKind::MiRna {
            return Err(Error::Shape("MD rows and ML columns must be miRNAs".into()));
        }
        let mirnas = EntityCatalog::from_names(
            EntityKind::MiRna,
            md.rows().names().iter().chain(ml.cols().names()),
        );
        let lm = ml.reindex(ld.rows(), &mirnas);
        let md = md.reindex(&mirnas, ld.cols());
        Ok(Self { ld, lm, md, dag })
    }

    pub fn load(ld: impl AsRef<Path>, md: impl AsRef<Path>, ml: impl AsRef<Path>, dag: impl AsRef<Path>) -> Result<Self> {
        Self::new(
            load_associations(ld, EntityKind::LncRna, EntityKind::Disease)?,
            load_associations(md, EntityKind::MiRna, EntityKind::Disease)?,
            load_associations(ml, EntityKind::LncRna, EntityKind::MiRna)?,
            load_dag(dag)?,
        )
    }

    pub fn ld(&self) -> &AssociationMatrix {
        &self.ld
    }

    pub fn lm(&self) -> &AssociationMatrix {
        &self.lm
    }

    pub fn md(&self) -> &AssociationMatrix {
        &self.md
    }

    pub fn dag(&self) -> &DiseaseDag {
        &self.dag
    }

    pub fn lncrnas(&self) -> &EntityCatalog {
        self.ld.rows()
    }

    pub fn diseases(&self) -> &EntityCatalog {
        self.ld.cols()
    }
}

/// Structures that do not depend on lncRNA-disease labels, computed once.
#[derive(Debug, Clone)]
pub struct SharedStructures {
    pub semantic: SimilarityMatrix,
    pub lmd: CompletedMatrix,
}

pub fn shared_structures(data: &Dataset, cfg: &PipelineConfig) -> Result<SharedStructures> {
    Ok(SharedStructures {
        semantic: disease_semantic_similarity(data.dag(), data.diseases(), cfg.delta),
        lmd: geometric_complement(data.lm(), data.md())?,
    })
}

/// Every similarity and the completed matrix recomputed from `ld`.
#[derive(Debug, Clone)]
pub struct SimilaritySet {
    pub functional: SimilarityMatrix,
    pub gip_lnc: SimilarityMatrix,
    pub gip_disease: SimilarityMatrix,
    pub lfs: SimilarityMatrix,
    pub ds: SimilarityMatrix,
    pub ld_new: CompletedMatrix,
}

pub fn similarity_set(ld: &AssociationMatrix, shared: &SharedStructures, cfg: &PipelineConfig) -> Result<SimilaritySet> {
    let functional = lncrna_functional_similarity(ld, &shared.semantic)?;
    let gip_lnc = gip_kernel(ld, ProfileAxis::Rows, GipConfig::new(cfg.gamma_prime_l)?);
    let gip_disease = gip_kernel(ld, ProfileAxis::Cols, GipConfig::new(cfg.gamma_prime_d)?);
    Ok(SimilaritySet {
        lfs: fuse_max(&functional, &gip_lnc)?,
        ds: fuse_max(&shared.semantic, &gip_disease)?,
        ld_new: fuse_associations(ld, &shared.lmd)?,
        functional,
        gip_lnc,
        gip_disease,
    })
}

pub fn embedding_source(ld: &AssociationMatrix, shared: &SharedStructures, cfg: &PipelineConfig) -> Result<EmbeddingSource> {
    let s = similarity_set(ld, shared, cfg)?;
    EmbeddingSource::new(s.ld_new, s.lfs, s.ds)
}

/// Everything one fold trains and tests on, before any model is fit.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    pub mask: FoldMask,
    pub masked_ld: AssociationMatrix,
    pub train: LabeledPairSet,
    /// Training targets; a permutation of the true labels when
    /// `pipeline.shuffle_labels` is set.
    pub train_targets: Vec<f64>,
    pub test: LabeledPairSet,
}

impl FoldPlan {
    pub fn fold_id(&self) -> usize {
        self.mask.fold_id
    }

    /// Audits the plan against the full LD matrix.
    pub fn leak_check(&self, ld: &AssociationMatrix) -> LeakReport {
        let train = self.train.pair_set();
        let held_out = &self.mask.held_out;
        LeakReport {
            fold_id: self.fold_id(),
            in_masked_ld: held_out.iter().filter(|&&(i, j)| self.masked_ld.is_set(i, j)).count(),
            in_training: held_out.iter().filter(|p| train.contains(p)).count(),
            test_pairs_in_training: self
                .test
                .pairs()
                .iter()
                .filter(|p| train.contains(&(p.lnc, p.disease)))
                .count(),
            masked_ones: self.masked_ld.count_ones(),
            expected_ones: ld.count_ones() - held_out.len(),
        }
    }
}

/// Counts of held-out information reaching a fold's training side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeakReport {
    pub fold_id: usize,
    /// Held-out positives still set in the masked matrix.
    pub in_masked_ld: usize,
    /// Held-out positives among training pairs, either label.
    pub in_training: usize,
    /// Test pairs (positive or negative) among training pairs.
    pub test_pairs_in_training: usize,
    pub masked_ones: usize,
    pub expected_ones: usize,
}

impl LeakReport {
    pub fn violations(&self) -> usize {
        self.in_masked_ld
            + self.in_training
            + self.test_pairs_in_training
            + usize::from(self.masked_ones != self.expected_ones)
    }

    fn into_result(self) -> Result<Self> {
        if self.violations() == 0 {
            return Ok(self);
        }
        Err(Error::Leak {
            fold: self.fold_id,
            detail: format!("{self:?}"),
        })
    }
}

fn shuffled(labels: &[f64], seed: u64) -> Vec<f64> {
    let mut out = labels.to_vec();
    // separate stream of the negatives seed, so sampling is unaffected
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    out.shuffle(&mut rng);
    out
}

/// Splits positives into folds and samples both negative sets. Training
/// negatives avoid held-out pairs; test negatives avoid training
/// negatives.
pub fn plan_folds(ld: &AssociationMatrix, cfg: &PipelineConfig) -> Result<Vec<FoldPlan>> {
    let seeds = cfg.seeds();
    let folds = kfold_split(&ld.positives(), cfg.folds, cfg.master_seed)?;
    folds
        .into_iter()
        .map(|mask| {
            let f = mask.fold_id as u64;
            let masked_ld = apply_mask(ld, &mask)?;
            let positives = masked_ld.positives();
            let held_out: HashSet<(usize, usize)> = mask.held_out.iter().copied().collect();
            let negatives = sample_negatives(&masked_ld, positives.len(), seeds.seed(f, Stage::Negatives), &held_out)?;
            let train = LabeledPairSet::from_parts(&positives, &negatives, Provenance::Fold(mask.fold_id))?;

            let test_pos: Vec<(usize, usize)> = mask.held_out.iter().copied().collect();
            let taken: HashSet<(usize, usize)> = negatives.iter().copied().collect();
            let test_neg = sample_negatives(ld, test_pos.len(), seeds.seed(f, Stage::TestNegatives), &taken)?;
            let test = LabeledPairSet::from_parts(&test_pos, &test_neg, Provenance::Fold(mask.fold_id))?;

            let targets: Vec<f64> = train.labels().iter().map(|&l| f64::from(u8::from(l))).collect();
            let train_targets = if cfg.shuffle_labels {
                shuffled(&targets, seeds.seed(f, Stage::Negatives))
            } else {
                targets
            };
            Ok(FoldPlan {
                mask,
                masked_ld,
                train,
                train_targets,
                test,
            })
        })
        .collect()
}

pub fn embed_pairs(source: &EmbeddingSource, set: &LabeledPairSet) -> Result<Vec<PairEmbedding>> {
    set.pairs().iter().map(|p| source.embed(p.lnc, p.disease)).collect()
}

fn cnn_config(cfg: &PipelineConfig, seeds: &SeedTree, fold: u64) -> TrainConfig {
    TrainConfig {
        init_seed: seeds.seed(fold, Stage::CnnInit),
        batch_seed: seeds.seed(fold, Stage::CnnBatches),
        ..cfg.train
    }
}

/// A fold after CNN training: hidden-layer features ready for boosting.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub plan: FoldPlan,
    pub leak: LeakReport,
    pub train_features: Array2<f64>,
    pub test_features: Array2<f64>,
    pub cnn_loss_trace: Vec<f64>,
}

fn prepare_fold(plan: FoldPlan, data: &Dataset, shared: &SharedStructures, cfg: &PipelineConfig) -> Result<PreparedFold> {
    let leak = plan.leak_check(data.ld()).into_result()?;
    let label_view = if cfg.leaky_similarities { data.ld() } else { &plan.masked_ld };
    let source = embedding_source(label_view, shared, cfg)?;
    let train_x = embed_pairs(&source, &plan.train)?;
    let test_x = embed_pairs(&source, &plan.test)?;
    let spec = cfg.cnn.spec_for(source.width());
    let tcfg = cnn_config(cfg, &cfg.seeds(), plan.fold_id() as u64);
    let outcome = cnn::train(spec, &tcfg, &train_x, &plan.train_targets)?;
    Ok(PreparedFold {
        train_features: extract_features(&outcome.params, &train_x)?,
        test_features: extract_features(&outcome.params, &test_x)?,
        cnn_loss_trace: outcome.loss_trace,
        leak,
        plan,
    })
}

/// Collects per-fold results in fold order; the first failing fold's error
/// wins regardless of scheduling.
fn in_order<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Plans every fold and trains its CNN. Folds run in parallel.
pub fn prepare_folds(data: &Dataset, cfg: &PipelineConfig) -> Result<Vec<PreparedFold>> {
    cfg.validate()?;
    let shared = shared_structures(data, cfg)?;
    let plans = plan_folds(data.ld(), cfg)?;
    in_order(
        plans
            .into_par_iter()
            .map(|plan| prepare_fold(plan, data, &shared, cfg))
            .collect(),
    )
}

#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold_id: usize,
    pub report: MetricsReport,
    pub scores: Vec<f64>,
    pub leak: LeakReport,
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub mean: MetricSummary,
}

impl CvReport {
    /// `fold auc aupr acc pre f1`, one row per fold then `mean`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("fold\tauc\taupr\tacc\tpre\tf1\n");
        let mut row = |name: &str, m: &MetricSummary| {
            writeln!(out, "{name}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}", m.auc, m.aupr, m.acc, m.pre, m.f1).unwrap();
        };
        for f in &self.folds {
            row(&f.fold_id.to_string(), &f.report.summary);
        }
        row("mean", &self.mean);
        out
    }
}

fn score_fold(fold: &PreparedFold, gbdt_cfg: &GbdtConfig) -> Result<FoldResult> {
    let test_labels = fold.plan.test.labels();
    let context = |e: Error| match e {
        Error::SingleClass(what) => Error::SingleClass(format!("fold {} ({what})", fold.plan.fold_id())),
        other => other,
    };
    let model = gbdt::train(&fold.train_features, &fold.plan.train_targets, gbdt_cfg).map_err(context)?;
    let scores = predict_proba(&model.ensemble, &fold.test_features)?;
    let report = evaluate(&scores, &test_labels, DEFAULT_THRESHOLD).map_err(context)?;
    Ok(FoldResult {
        fold_id: fold.plan.fold_id(),
        report,
        scores,
        leak: fold.leak,
    })
}

/// Boosts on prepared folds and averages the fold metrics.
pub fn evaluate_prepared(folds: &[PreparedFold], gbdt_cfg: &GbdtConfig) -> Result<CvReport> {
    let folds = in_order(folds.par_iter().map(|f| score_fold(f, gbdt_cfg)).collect())?;
    let summaries: Vec<MetricSummary> = folds.iter().map(|f| f.report.summary).collect();
    Ok(CvReport {
        mean: MetricSummary::mean(&summaries),
        folds,
    })
}

pub fn run_cv_pipeline(data: &Dataset, cfg: &PipelineConfig) -> Result<CvReport> {
    evaluate_prepared(&prepare_folds(data, cfg)?, &cfg.gbdt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub num_trees: usize,
    pub max_depth: usize,
    pub mean: MetricSummary,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Held-out pairs of each fold, shared by every grid point.
    pub folds: Vec<FoldMask>,
}

impl SweepTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("trees\tdepth\tauc\n");
        for r in &self.rows {
            writeln!(out, "{}\t{}\t{:.6}", r.num_trees, r.max_depth, r.mean.auc).unwrap();
        }
        out
    }
}

/// Re-boosts the same CNN features for each `(trees, depth)` grid point.
pub fn sweep_gbdt(data: &Dataset, cfg: &PipelineConfig, grid: &[(usize, usize)]) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::InvalidValue {
            key: "grid".into(),
            message: "sweep grid is empty".into(),
        });
    }
    let prepared = prepare_folds(data, cfg)?;
    let rows = grid
        .iter()
        .map(|&(num_trees, max_depth)| {
            let g = GbdtConfig {
                num_trees,
                max_depth,
                ..cfg.gbdt
            };
            g.validate()?;
            Ok(SweepRow {
                num_trees,
                max_depth,
                mean: evaluate_prepared(&prepared, &g)?.mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        rows,
        folds: prepared.into_iter().map(|f| f.plan.mask).collect(),
    })
}

/// CNN and boosted ensemble fit on every known association.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: PipelineConfig,
    pub cnn: NetworkParams,
    pub gbdt: BoostedEnsemble,
}

/// Embedding source over the full LD matrix, as used by a full-data model.
pub fn full_embedding_source(data: &Dataset, cfg: &PipelineConfig) -> Result<EmbeddingSource> {
    embedding_source(data.ld(), &shared_structures(data, cfg)?, cfg)
}

pub fn train_full(data: &Dataset, cfg: &PipelineConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    let seeds = cfg.seeds();
    let source = full_embedding_source(data, cfg)?;
    let positives = data.ld().positives();
    let negatives = sample_negatives(
        data.ld(),
        positives.len(),
        seeds.seed(FULL_DATA_FOLD, Stage::Negatives),
        &HashSet::new(),
    )?;
    let train = LabeledPairSet::from_parts(&positives, &negatives, Provenance::Full)?;
    let targets: Vec<f64> = train.labels().iter().map(|&l| f64::from(u8::from(l))).collect();
    let xs = embed_pairs(&source, &train)?;
    let tcfg = cnn_config(cfg, &seeds, FULL_DATA_FOLD);
    let cnn = cnn::train(cfg.cnn.spec_for(source.width()), &tcfg, &xs, &targets)?.params;
    let features = extract_features(&cnn, &xs)?;
    let gbdt = gbdt::train(&features, &targets, &cfg.gbdt)?.ensemble;
    Ok(TrainedModel {
        config: *cfg,
        cnn,
        gbdt,
    })
}

/// Association probabilities for `(lnc, disease)` index pairs.
pub fn score_pairs(model: &TrainedModel, source: &EmbeddingSource, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let xs = pairs
        .iter()
        .map(|&(i, j)| source.embed(i, j))
        .collect::<Result<Vec<_>>>()?;
    predict_proba(&model.gbdt, &extract_features(&model.cnn, &xs)?)
}
