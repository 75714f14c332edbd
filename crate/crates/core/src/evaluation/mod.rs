//! Negative sampling, folds, metrics and the cross-validated pipeline.

mod metrics;
mod pipeline;
mod ranking;
mod sampling;

pub use metrics::{
    evaluate, pr_auc, roc_auc, threshold_metrics, ConfusionCounts, MetricSummary, MetricsReport, ThresholdMetrics,
    DEFAULT_THRESHOLD,
};
pub use pipeline::{
    embed_pairs, embedding_source, evaluate_prepared, full_embedding_source, plan_folds, prepare_folds,
    run_cv_pipeline, score_pairs, shared_structures, similarity_set, sweep_gbdt, train_full, CvReport, Dataset,
    FoldPlan, FoldResult, LeakReport, PreparedFold, SharedStructures, SimilaritySet, SweepRow, SweepTable,
    TrainedModel,
};
pub use ranking::{candidate_scores, rank_candidates, rankings_tsv, RankedCandidate};
pub use sampling::{kfold_split, sample_negatives, LabeledPair, LabeledPairSet, Provenance};
