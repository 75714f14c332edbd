//! Planted-block synthetic data.
//!
//! Every entity is assigned to one of `blocks` groups by position. An LD
//! entry is 1 when its lncRNA and disease share a group; miRNA links are
//! drawn inside matching groups at `mirna_density`. Each entry of every
//! matrix is then flipped with probability `noise`. Disease groups hang
//! off a shared root through two intermediate terms each; every fifth
//! disease is left out of the DAG.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{parse_associations, parse_dag, EntityKind};
use crate::error::{Error, Result};
use crate::evaluation::Dataset;
use crate::export::write_text;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub n_lnc: usize,
    pub n_disease: usize,
    pub n_mirna: usize,
    pub blocks: usize,
    pub noise: f64,
    pub mirna_density: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_lnc: 60,
            n_disease: 80,
            n_mirna: 40,
            blocks: 4,
            noise: 0.05,
            mirna_density: 0.5,
            seed: 42,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |message: &str| {
            Err(Error::InvalidValue {
                key: "synth".into(),
                message: message.into(),
            })
        };
        if self.blocks == 0 || self.n_lnc < self.blocks || self.n_disease < self.blocks || self.n_mirna < self.blocks {
            return bad("every entity kind needs at least one member per block");
        }
        if !(0.0..=0.5).contains(&self.noise) {
            return bad("noise must lie in [0, 0.5]");
        }
        if !(0.0..=1.0).contains(&self.mirna_density) {
            return bad("mirna_density must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Generated inputs as the TSV text of the four files.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub ld: String,
    pub md: String,
    pub ml: String,
    pub dag: String,
}

fn block(pos: usize, n: usize, blocks: usize) -> usize {
    pos * blocks / n
}

pub fn lnc_name(i: usize) -> String {
    format!("lnc-{:03}", i + 1)
}

pub fn disease_name(j: usize) -> String {
    format!("disease-{:03}", j + 1)
}

pub fn mirna_name(m: usize) -> String {
    format!("mir-{:03}", m + 1)
}

/// Pairs of a block-structured matrix, flipped at `noise`, as TSV.
fn matrix_tsv(
    rng: &mut ChaCha8Rng,
    header: &str,
    (rows, row_name): (usize, fn(usize) -> String),
    (cols, col_name): (usize, fn(usize) -> String),
    blocks: usize,
    density: f64,
    noise: f64,
) -> String {
    let mut out = format!("# {header}\n");
    for i in 0..rows {
        for j in 0..cols {
            let same = block(i, rows, blocks) == block(j, cols, blocks);
            let planted = same && rng.gen::<f64>() < density;
            let flipped = rng.gen::<f64>() < noise;
            if planted != flipped {
                writeln!(out, "{}\t{}", row_name(i), col_name(j)).unwrap();
            }
        }
    }
    out
}

pub fn generate(params: &SynthParams) -> Result<SynthData> {
    params.validate()?;
    let p = params;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let ld = matrix_tsv(
        &mut rng,
        "lncRNA\tdisease",
        (p.n_lnc, lnc_name),
        (p.n_disease, disease_name),
        p.blocks,
        1.0,
        p.noise,
    );
    let md = matrix_tsv(
        &mut rng,
        "miRNA\tdisease",
        (p.n_mirna, mirna_name),
        (p.n_disease, disease_name),
        p.blocks,
        p.mirna_density,
        p.noise,
    );
    let ml = matrix_tsv(
        &mut rng,
        "lncRNA\tmiRNA",
        (p.n_lnc, lnc_name),
        (p.n_mirna, mirna_name),
        p.blocks,
        p.mirna_density,
        p.noise,
    );

    let mut dag = String::from("# child\tparent\n");
    for b in 0..p.blocks {
        writeln!(dag, "group-{}\troot", b + 1).unwrap();
        for g in 0..2 {
            writeln!(dag, "group-{}.{}\tgroup-{}", b + 1, g + 1, b + 1).unwrap();
        }
    }
    for j in (0..p.n_disease).filter(|j| j % 5 != 4) {
        let b = block(j, p.n_disease, p.blocks);
        writeln!(dag, "{}\tgroup-{}.{}", disease_name(j), b + 1, j % 2 + 1).unwrap();
    }
    Ok(SynthData { ld, md, ml, dag })
}

impl SynthData {
    pub const FILE_NAMES: [&'static str; 4] = ["ld.tsv", "md.tsv", "ml.tsv", "dag.tsv"];

    pub fn dataset(&self) -> Result<Dataset> {
        let parse = |text: &str, name: &str, rk, ck| parse_associations(text.as_bytes(), Path::new(name), rk, ck);
        Dataset::new(
            parse(&self.ld, "ld.tsv", EntityKind::LncRna, EntityKind::Disease)?,
            parse(&self.md, "md.tsv", EntityKind::MiRna, EntityKind::Disease)?,
            parse(&self.ml, "ml.tsv", EntityKind::LncRna, EntityKind::MiRna)?,
            parse_dag(self.dag.as_bytes(), Path::new("dag.tsv"))?,
        )
    }

    /// Writes `ld.tsv`, `md.tsv`, `ml.tsv` and `dag.tsv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in Self::FILE_NAMES.iter().zip([&self.ld, &self.md, &self.ml, &self.dag]) {
            write_text(dir.join(name), text)?;
        }
        Ok(())
    }
}
