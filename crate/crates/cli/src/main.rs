use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hcnlda::cnn::{gradient_check, random_batch, NetworkParams};
use hcnlda::config::{load_config, PipelineConfig};
use hcnlda::data::load_name_pairs;
use hcnlda::evaluation::{
    candidate_scores, full_embedding_source, rank_candidates, rankings_tsv, run_cv_pipeline, score_pairs,
    similarity_set, shared_structures, sweep_gbdt, train_full, Dataset,
};
use hcnlda::export::{curve_csv, matrix_csv, write_text};
use hcnlda::persist::{load_model, save_model};
use hcnlda::similarity::SimilarityMatrix;
use hcnlda::synth::{generate, SynthParams};
use hcnlda::{Error, ErrorClass, Result};

#[derive(Parser)]
#[command(name = "hcnlda", version, about = "lncRNA-disease association prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write semantic, functional, GIP and fused similarity matrices as CSV.
    Similarity(Common),
    /// Write the miRNA-completed lncRNA-disease matrix as CSV.
    Complete(Common),
    /// Cross-validate the full pipeline; writes metrics.tsv and curves.
    Cv(Common),
    /// Fit the network and the ensemble on all known associations.
    Train(Common),
    /// Score lncRNA/disease pairs with a saved model.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Model file written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// TSV of `lncRNA<TAB>disease` pairs to score.
        #[arg(long)]
        pairs: PathBuf,
    },
    /// Rank unobserved lncRNAs per disease.
    Rank {
        #[command(flatten)]
        common: Common,
        /// Model file; trained on the fly when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Disease to rank for (repeatable); all diseases when absent.
        #[arg(long)]
        disease: Vec<String>,
        /// Candidates kept per disease.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Cross-validated AUC over a grid of tree counts and depths.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated tree counts.
        #[arg(long, value_delimiter = ',', default_value = "10,50,100,500")]
        trees: Vec<usize>,
        /// Comma-separated maximum depths.
        #[arg(long, value_delimiter = ',', default_value = "3,6,15")]
        depths: Vec<usize>,
    },
    /// Compare backpropagated and finite-difference network gradients.
    Gradcheck {
        /// Seed for weights, inputs and sampled entries.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Embedding width of the random inputs.
        #[arg(long, default_value_t = 64)]
        width: usize,
        /// Random inputs in the batch.
        #[arg(long, default_value_t = 4)]
        batch: usize,
        /// Failure threshold on the maximum relative error.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// `key=value` config override (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Generate planted-block LD/MD/ML/DAG files.
    Synth {
        #[arg(long, default_value = "synth")]
        out: PathBuf,
        #[arg(long, default_value_t = SynthParams::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = SynthParams::default().n_lnc)]
        lncrnas: usize,
        #[arg(long, default_value_t = SynthParams::default().n_disease)]
        diseases: usize,
        #[arg(long, default_value_t = SynthParams::default().n_mirna)]
        mirnas: usize,
        #[arg(long, default_value_t = SynthParams::default().blocks)]
        blocks: usize,
        /// Probability of flipping each matrix entry.
        #[arg(long, default_value_t = SynthParams::default().noise)]
        noise: f64,
        /// Density of miRNA links inside matching blocks.
        #[arg(long, default_value_t = SynthParams::default().mirna_density)]
        mirna_density: f64,
    },
}

#[derive(Args)]
struct Common {
    /// lncRNA-disease associations (`lncRNA<TAB>disease`).
    #[arg(long)]
    ld: PathBuf,
    /// miRNA-disease associations (`miRNA<TAB>disease`).
    #[arg(long)]
    md: PathBuf,
    /// lncRNA-miRNA associations (`lncRNA<TAB>miRNA`).
    #[arg(long)]
    ml: PathBuf,
    /// Disease ontology edges (`child<TAB>parent`).
    #[arg(long)]
    dag: PathBuf,
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed (overrides pipeline.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of folds (overrides pipeline.folds).
    #[arg(long)]
    folds: Option<usize>,
    /// `key=value` config override (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn resolve_config(path: Option<&Path>, overrides: &[String]) -> Result<PipelineConfig> {
    let mut cfg = match path {
        Some(p) => load_config(p)?,
        None => PipelineConfig::default(),
    };
    for kv in overrides {
        let (key, value) = kv.split_once('=').ok_or_else(|| Error::InvalidValue {
            key: kv.clone(),
            message: "expected --set key=value".into(),
        })?;
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Session {
    cfg: PipelineConfig,
    data: Dataset,
    out: PathBuf,
}

impl Common {
    fn open(&self) -> Result<Session> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("pipeline.seed={seed}"));
        }
        if let Some(folds) = self.folds {
            overrides.push(format!("pipeline.folds={folds}"));
        }
        let cfg = resolve_config(self.config.as_deref(), &overrides)?;
        let data = Dataset::load(&self.ld, &self.md, &self.ml, &self.dag)?;
        std::fs::create_dir_all(&self.out).map_err(|e| Error::Io {
            path: self.out.clone(),
            source: e,
        })?;
        let config_text = cfg.to_config_string();
        print!("{config_text}");
        write_text(self.out.join("config.cfg"), &config_text)?;
        Ok(Session {
            cfg,
            data,
            out: self.out.clone(),
        })
    }
}

fn write_similarity(out: &Path, file: &str, m: &SimilarityMatrix) -> Result<()> {
    let names = m.catalog().names();
    write_text(out.join(file), &matrix_csv(names, names, m.values())?)
}

fn similarity(common: &Common) -> Result<()> {
    let s = common.open()?;
    let shared = shared_structures(&s.data, &s.cfg)?;
    let set = similarity_set(s.data.ld(), &shared, &s.cfg)?;
    for (file, m) in [
        ("ds_semantic.csv", &shared.semantic),
        ("lfs_functional.csv", &set.functional),
        ("gip_lncrna.csv", &set.gip_lnc),
        ("gip_disease.csv", &set.gip_disease),
        ("lfs_fused.csv", &set.lfs),
        ("ds_fused.csv", &set.ds),
    ] {
        write_similarity(&s.out, file, m)?;
        println!("wrote {}", s.out.join(file).display());
    }
    Ok(())
}

fn complete(common: &Common) -> Result<()> {
    let s = common.open()?;
    let shared = shared_structures(&s.data, &s.cfg)?;
    let set = similarity_set(s.data.ld(), &shared, &s.cfg)?;
    for (file, m) in [("lmd.csv", &shared.lmd), ("ld_new.csv", &set.ld_new)] {
        let csv = matrix_csv(m.rows().names(), m.cols().names(), m.values())?;
        write_text(s.out.join(file), &csv)?;
        println!("wrote {}", s.out.join(file).display());
    }
    Ok(())
}

fn cv(common: &Common) -> Result<()> {
    let s = common.open()?;
    let report = run_cv_pipeline(&s.data, &s.cfg)?;
    let curves = s.out.join("curves");
    std::fs::create_dir_all(&curves).map_err(|e| Error::Io {
        path: curves.clone(),
        source: e,
    })?;
    for f in &report.folds {
        write_text(
            curves.join(format!("roc_fold{}.csv", f.fold_id)),
            &curve_csv(("fpr", "tpr"), &f.report.roc_points),
        )?;
        write_text(
            curves.join(format!("pr_fold{}.csv", f.fold_id)),
            &curve_csv(("recall", "precision"), &f.report.pr_points),
        )?;
    }
    let tsv = report.to_tsv();
    write_text(s.out.join("metrics.tsv"), &tsv)?;
    print!("\n{tsv}");
    Ok(())
}

fn train(common: &Common) -> Result<()> {
    let s = common.open()?;
    let model = train_full(&s.data, &s.cfg)?;
    let path = s.out.join("model.json");
    save_model(&path, &model)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn check_model_config(model_cfg: &PipelineConfig, cfg: &PipelineConfig) {
    if model_cfg != cfg {
        eprintln!("note: scoring with the configuration stored in the model file");
    }
}

fn predict(common: &Common, model_path: &Path, pairs_path: &Path) -> Result<()> {
    let s = common.open()?;
    let model = load_model(model_path)?;
    check_model_config(&model.config, &s.cfg);
    let source = full_embedding_source(&s.data, &model.config)?;
    let names = load_name_pairs(pairs_path)?;
    let index = names
        .iter()
        .map(|(l, d)| {
            let i = s.data.lncrnas().position(l).ok_or_else(|| Error::UnknownName {
                kind: "lncRNA",
                name: l.clone(),
            })?;
            let j = s.data.diseases().position(d).ok_or_else(|| Error::UnknownName {
                kind: "disease",
                name: d.clone(),
            })?;
            Ok((i, j))
        })
        .collect::<Result<Vec<_>>>()?;
    let scores = score_pairs(&model, &source, &index)?;
    let mut tsv = String::from("lncRNA\tdisease\tscore\n");
    for (&(i, j), score) in index.iter().zip(&scores) {
        tsv.push_str(&format!(
            "{}\t{}\t{score:.6}\n",
            s.data.lncrnas().name(i),
            s.data.diseases().name(j)
        ));
    }
    write_text(s.out.join("predictions.tsv"), &tsv)?;
    print!("\n{tsv}");
    Ok(())
}

fn rank(common: &Common, model_path: Option<&Path>, diseases: &[String], top: usize) -> Result<()> {
    let s = common.open()?;
    let model = match model_path {
        Some(p) => {
            let m = load_model(p)?;
            check_model_config(&m.config, &s.cfg);
            m
        }
        None => train_full(&s.data, &s.cfg)?,
    };
    let source = full_embedding_source(&s.data, &model.config)?;
    let wanted: Vec<&str> = if diseases.is_empty() {
        s.data.diseases().names().iter().map(String::as_str).collect()
    } else {
        diseases.iter().map(String::as_str).collect()
    };
    let ld = s.data.ld();
    let scores = candidate_scores(&model, &source, ld, &wanted)?;
    let mut rows = Vec::new();
    for d in &wanted {
        rows.extend(rank_candidates(ld, &scores, d, top)?);
    }
    let tsv = rankings_tsv(&rows);
    write_text(s.out.join("rankings.tsv"), &tsv)?;
    print!("\n{tsv}");
    Ok(())
}

fn sweep(common: &Common, trees: &[usize], depths: &[usize]) -> Result<()> {
    let s = common.open()?;
    let grid: Vec<(usize, usize)> = trees
        .iter()
        .flat_map(|&t| depths.iter().map(move |&d| (t, d)))
        .collect();
    let table = sweep_gbdt(&s.data, &s.cfg, &grid)?;
    let tsv = table.to_tsv();
    write_text(s.out.join("sweep.tsv"), &tsv)?;
    print!("\n{tsv}");
    Ok(())
}

fn gradcheck(seed: u64, width: usize, batch: usize, tolerance: f64, cfg: &PipelineConfig) -> Result<()> {
    let spec = cfg.cnn.spec_for(width);
    let params = NetworkParams::init(spec, seed)?;
    let (xs, ys) = random_batch(&spec, batch.max(1), seed);
    let report = gradient_check(&params, &xs, &ys, cfg.train.l2, seed)?;
    for (layer, err) in &report.per_layer {
        eprintln!("{layer}\t{err:.3e}");
    }
    println!("{:.6e}", report.max_rel_error);
    if report.passed(tolerance) {
        Ok(())
    } else {
        Err(Error::Tolerance(format!(
            "max relative gradient error {:.3e} exceeds {tolerance:e}",
            report.max_rel_error
        )))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Similarity(c) => similarity(&c),
        Command::Complete(c) => complete(&c),
        Command::Cv(c) => cv(&c),
        Command::Train(c) => train(&c),
        Command::Predict { common, model, pairs } => predict(&common, &model, &pairs),
        Command::Rank {
            common,
            model,
            disease,
            top,
        } => rank(&common, model.as_deref(), &disease, top),
        Command::Sweep { common, trees, depths } => sweep(&common, &trees, &depths),
        Command::Gradcheck {
            seed,
            width,
            batch,
            tolerance,
            config,
            overrides,
        } => {
            let cfg = resolve_config(config.as_deref(), &overrides)?;
            gradcheck(seed, width, batch, tolerance, &cfg)
        }
        Command::Synth {
            out,
            seed,
            lncrnas,
            diseases,
            mirnas,
            blocks,
            noise,
            mirna_density,
        } => {
            let params = SynthParams {
                n_lnc: lncrnas,
                n_disease: diseases,
                n_mirna: mirnas,
                blocks,
                noise,
                mirna_density,
                seed,
            };
            generate(&params)?.write_to(&out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Data => 2,
                ErrorClass::Numerical => 3,
            })
        }
    }
}
