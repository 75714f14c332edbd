use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SUBCOMMANDS: [&str; 9] = ["similarity", "complete", "cv", "train", "predict", "rank", "sweep", "gradcheck", "synth"];

const FAST: [&str; 8] = [
    "--set", "cnn.epochs=2",
    "--set", "cnn.hidden_units=8",
    "--set", "gbdt.num_trees=10",
    "--set", "gbdt.max_depth=3",
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcnlda")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Small synthetic inputs written to `dir`.
fn synth(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    let out = run(&[
        "synth", "--out", data.to_str().unwrap(),
        "--lncrnas", "20", "--diseases", "24", "--mirnas", "12",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    data
}

fn inputs(data: &Path) -> Vec<String> {
    ["ld", "md", "ml", "dag"]
        .iter()
        .flat_map(|k| [format!("--{k}"), data.join(format!("{k}.tsv")).display().to_string()])
        .collect()
}

fn run_on(sub: &str, data: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args: Vec<String> = vec![sub.into()];
    args.extend(inputs(data));
    args.extend(["--out".into(), out.display().to_string()]);
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

#[test]
fn help_works_for_every_subcommand() {
    assert_eq!(code(&run(&["--help"])), 0);
    for sub in SUBCOMMANDS {
        let out = run(&[sub, "--help"]);
        assert_eq!(code(&out), 0, "{sub}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("--"), "{sub}: {text}");
    }
    let cv = String::from_utf8(run(&["cv", "--help"]).stdout).unwrap();
    for flag in ["--ld", "--md", "--ml", "--dag", "--config", "--out", "--seed", "--folds", "--set"] {
        assert!(cv.contains(flag), "cv help lacks {flag}");
    }
    let rank = String::from_utf8(run(&["rank", "--help"]).stdout).unwrap();
    assert!(rank.contains("--top") && rank.contains("--disease") && rank.contains("[default: 10]"));
}

#[test]
fn exit_codes_follow_error_class() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["cv", "--bogus"])), 1);

    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let out = run_on("cv", &data, &dir.path().join("o"), &["--set", "no.such_key=1"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));

    let missing = dir.path().join("missing");
    let out = run_on("complete", &missing, &dir.path().join("o"), &[]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run(&["gradcheck", "--tolerance", "0"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn gradcheck_prints_a_small_error() {
    let out = run(&["gradcheck", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let err: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(err < 1e-4, "{err}");
}

#[test]
fn similarity_and_complete_write_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let out_dir = dir.path().join("o");
    for sub in ["similarity", "complete"] {
        let out = run_on(sub, &data, &out_dir, &[]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["ds_semantic", "lfs_functional", "gip_lncrna", "gip_disease", "lfs_fused", "ds_fused", "lmd", "ld_new"] {
        let text = fs::read_to_string(out_dir.join(format!("{name}.csv"))).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        let expected_rows = if name.starts_with("ds") || name == "gip_disease" { 24 } else { 20 };
        assert_eq!(rows.len(), expected_rows + 1, "{name}");
    }
    let config = fs::read_to_string(out_dir.join("config.cfg")).unwrap();
    assert!(config.lines().any(|l| l.starts_with("pipeline.seed")), "{config}");
}

#[test]
fn cv_is_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let mut tables = Vec::new();
    for run_id in 0..2 {
        let out_dir = dir.path().join(format!("cv{run_id}"));
        let out = run_on("cv", &data, &out_dir, &FAST);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let table = fs::read_to_string(out_dir.join("metrics.tsv")).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "fold\tauc\taupr\tacc\tpre\tf1");
        assert_eq!(lines.len(), 1 + 5 + 1);
        assert!(lines[6].starts_with("mean\t"));
        for f in 0..5 {
            assert!(out_dir.join(format!("curves/roc_fold{f}.csv")).exists());
            assert!(out_dir.join(format!("curves/pr_fold{f}.csv")).exists());
        }
        tables.push(table);
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn train_predict_rank_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let out_dir = dir.path().join("o");
    let out = run_on("train", &data, &out_dir, &FAST);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let model = out_dir.join("model.json");
    assert!(model.exists());

    let pairs = dir.path().join("pairs.tsv");
    fs::write(&pairs, "lnc-001\tdisease-001\nLNC-002\tdisease-024\n").unwrap();
    let model_arg = model.display().to_string();
    let pairs_arg = pairs.display().to_string();
    let out = run_on("predict", &data, &out_dir, &["--model", &model_arg, "--pairs", &pairs_arg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let predictions = fs::read_to_string(out_dir.join("predictions.tsv")).unwrap();
    let rows: Vec<&str> = predictions.lines().collect();
    assert_eq!(rows.len(), 3, "{predictions}");
    for row in &rows[1..] {
        let score: f64 = row.rsplit('\t').next().unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&score));
    }

    let out = run_on(
        "rank", &data, &out_dir,
        &["--model", &model_arg, "--disease", "disease-003", "--top", "5"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let ranking = fs::read_to_string(out_dir.join("rankings.tsv")).unwrap();
    let rows: Vec<&str> = ranking.lines().collect();
    assert_eq!(rows[0], "rank\tlncRNA\tdisease\tscore");
    assert!(rows.len() <= 6 && rows.len() > 1, "{ranking}");
    let scores: Vec<f64> = rows[1..].iter().map(|r| r.rsplit('\t').next().unwrap().parse().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));

    let out = run_on("rank", &data, &out_dir, &["--model", &model_arg, "--disease", "no-such-disease"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn sweep_writes_one_row_per_setting() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let out_dir = dir.path().join("o");
    let mut args = FAST.to_vec();
    args.extend(["--trees", "5,10", "--depths", "2,3"]);
    let out = run_on("sweep", &data, &out_dir, &args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = fs::read_to_string(out_dir.join("sweep.tsv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "trees\tdepth\tauc");
    assert_eq!(rows.len(), 5);
}

#[test]
fn synth_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = run(&["synth", "--out", d.to_str().unwrap(), "--seed", "9"]);
        assert_eq!(code(&out), 0);
    }
    for f in ["ld.tsv", "md.tsv", "ml.tsv", "dag.tsv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}
