//! Entity catalogs, association matrices, the disease DAG and fold masks.
//!
//! Every file format handled here is a UTF-8 TSV with `#` comment lines. Entity
//! names are matched after trimming and lower-casing, but catalogs keep the
//! spelling of the first appearance for output.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    LncRna,
    Disease,
    MiRna,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::LncRna => "lncRNA",
            EntityKind::Disease => "disease",
            EntityKind::MiRna => "miRNA",
        })
    }
}

/// Lookup key for an entity name.
pub fn normalize_name(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Ordered, duplicate-free list of entity names of one kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityCatalog {
    kind: EntityKind,
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl EntityCatalog {
    pub fn new(kind: EntityKind) -> Self {
        Self {
            kind,
            names: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Builds a catalog from names in order; repeated names (after
    /// normalization) keep their first position.
    pub fn from_names<I, S>(kind: EntityKind, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut catalog = Self::new(kind);
        for name in names {
            catalog.intern(name.as_ref());
        }
        catalog
    }

    /// Returns the position of `name`, appending it if new.
    pub fn intern(&mut self, name: &str) -> usize {
        let key = normalize_name(name);
        if let Some(&pos) = self.index.get(&key) {
            return pos;
        }
        let pos = self.names.len();
        self.names.push(name.trim().to_string());
        self.index.insert(key, pos);
        pos
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(&normalize_name(name)).copied()
    }

    pub fn kind(&self) -> EntityKind {
        self.kind
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, pos: usize) -> &str {
        &self.names[pos]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Same kind and same names in the same order.
    pub fn same_as(&self, other: &EntityCatalog) -> bool {
        self.kind == other.kind && self.index == other.index
    }
}

/// Binary incidence matrix between two entity kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMatrix {
    rows: EntityCatalog,
    cols: EntityCatalog,
    values: Array2<f64>,
}

impl AssociationMatrix {
    pub fn new(rows: EntityCatalog, cols: EntityCatalog, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (rows.len(), cols.len()) {
            return Err(Error::Shape(format!(
                "matrix is {:?} but catalogs are {}x{}",
                values.dim(),
                rows.len(),
                cols.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(Error::Shape(format!("association entry {v} is not 0 or 1")));
        }
        Ok(Self { rows, cols, values })
    }

    /// Builds the matrix from index pairs; duplicates are idempotent.
    pub fn from_pairs(
        rows: EntityCatalog,
        cols: EntityCatalog,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut values = Array2::zeros((rows.len(), cols.len()));
        for (i, j) in pairs {
            let cell = values.get_mut((i, j)).ok_or_else(|| {
                Error::OutOfRange(format!("pair ({i}, {j}) outside {}x{}", rows.len(), cols.len()))
            })?;
            *cell = 1.0;
        }
        Ok(Self { rows, cols, values })
    }

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

    pub fn is_set(&self, row: usize, col: usize) -> bool {
        self.values[(row, col)] == 1.0
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1.0).count()
    }

    /// All 1-entries in row-major order.
    pub fn positives(&self) -> Vec<(usize, usize)> {
        self.values
            .indexed_iter()
            .filter(|(_, &v)| v == 1.0)
            .map(|(ij, _)| ij)
            .collect()
    }

    /// Re-expresses the matrix over other catalogs. Names absent from the
    /// target catalogs are dropped; target names absent here get empty rows
    /// or columns.
    pub fn reindex(&self, rows: &EntityCatalog, cols: &EntityCatalog) -> AssociationMatrix {
        let mut values = Array2::zeros((rows.len(), cols.len()));
        let row_map: Vec<Option<usize>> =
            self.rows.names().iter().map(|n| rows.position(n)).collect();
        let col_map: Vec<Option<usize>> =
            self.cols.names().iter().map(|n| cols.position(n)).collect();
        for ((i, j), &v) in self.values.indexed_iter() {
            if v == 1.0 {
                if let (Some(r), Some(c)) = (row_map[i], col_map[j]) {
                    values[(r, c)] = 1.0;
                }
            }
        }
        AssociationMatrix {
            rows: rows.clone(),
            cols: cols.clone(),
            values,
        }
    }

    pub fn transpose(&self) -> AssociationMatrix {
        AssociationMatrix {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            values: self.values.t().to_owned(),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Yields `(line_number, first_field, second_field)` for every data line.
fn read_pairs(reader: impl BufRead, path: &Path) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let first = fields.next().map(str::trim).unwrap_or("");
        let second = fields.next().map(str::trim).unwrap_or("");
        if first.is_empty() || second.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: "expected two non-empty tab-separated fields".into(),
            });
        }
        out.push((line_no, first.to_string(), second.to_string()));
    }
    if out.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok(out)
}

pub fn load_associations(
    path: impl AsRef<Path>,
    row_kind: EntityKind,
    col_kind: EntityKind,
) -> Result<AssociationMatrix> {
    let path = path.as_ref();
    parse_associations(open(path)?, path, row_kind, col_kind)
}

/// Reads `first<TAB>second` name pairs in file order, skipping comments and
/// blank lines.
pub fn load_name_pairs(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    Ok(read_pairs(open(path)?, path)?
        .into_iter()
        .map(|(_, a, b)| (a, b))
        .collect())
}

/// Parses `row<TAB>col` lines; catalogs follow first appearance.
pub fn parse_associations(
    reader: impl BufRead,
    path: &Path,
    row_kind: EntityKind,
    col_kind: EntityKind,
) -> Result<AssociationMatrix> {
    let lines = read_pairs(reader, path)?;
    let mut rows = EntityCatalog::new(row_kind);
    let mut cols = EntityCatalog::new(col_kind);
    let pairs: Vec<(usize, usize)> = lines
        .iter()
        .map(|(_, r, c)| (rows.intern(r), cols.intern(c)))
        .collect();
    AssociationMatrix::from_pairs(rows, cols, pairs)
}

/// Disease ontology: each node lists its parents.
#[derive(Debug, Clone)]
pub struct DiseaseDag {
    nodes: EntityCatalog,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    // Every node appears after all of its children.
    bottom_up: Vec<usize>,
}

impl DiseaseDag {
    /// Validates acyclicity and self-loops. Parent lists are deduplicated.
    pub fn new(nodes: EntityCatalog, parents: Vec<Vec<usize>>) -> Result<Self> {
        let n = nodes.len();
        if parents.len() != n {
            return Err(Error::Shape(format!(
                "{} parent lists for {} nodes",
                parents.len(),
                n
            )));
        }
        let mut clean = Vec::with_capacity(n);
        let mut children = vec![Vec::new(); n];
        for (child, ps) in parents.into_iter().enumerate() {
            let set: BTreeSet<usize> = ps.into_iter().collect();
            for &p in &set {
                if p >= n {
                    return Err(Error::OutOfRange(format!("parent index {p} of {n} nodes")));
                }
                if p == child {
                    return Err(Error::SelfLoop(nodes.name(child).to_string()));
                }
                children[p].push(child);
            }
            clean.push(set.into_iter().collect::<Vec<_>>());
        }

        // Kahn's algorithm, releasing a node once all of its children are done.
        let mut pending: Vec<usize> = children.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| pending[v] == 0).collect();
        let mut bottom_up = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            bottom_up.push(v);
            for &p in &clean[v] {
                pending[p] -= 1;
                if pending[p] == 0 {
                    queue.push_back(p);
                }
            }
        }
        if bottom_up.len() < n {
            // Walk unfinished children until a node repeats; that node lies on a cycle.
            let mut seen = vec![false; n];
            let mut v = (0..n).find(|&v| pending[v] > 0).expect("unfinished node");
            while !seen[v] {
                seen[v] = true;
                v = *children[v]
                    .iter()
                    .find(|&&c| pending[c] > 0)
                    .expect("unfinished node has an unfinished child");
            }
            return Err(Error::Cycle(nodes.name(v).to_string()));
        }

        Ok(Self {
            nodes,
            parents: clean,
            children,
            bottom_up,
        })
    }

    /// Builds the graph from `(child, parent)` name pairs.
    pub fn from_edges<I, S>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut nodes = EntityCatalog::new(EntityKind::Disease);
        let mut links = Vec::new();
        for (child, parent) in edges {
            let c = nodes.intern(child.as_ref());
            let p = nodes.intern(parent.as_ref());
            if c == p {
                return Err(Error::SelfLoop(nodes.name(c).to_string()));
            }
            links.push((c, p));
        }
        let mut parents = vec![Vec::new(); nodes.len()];
        for (c, p) in links {
            parents[c].push(p);
        }
        Self::new(nodes, parents)
    }

    pub fn nodes(&self) -> &EntityCatalog {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    /// Node order in which every node follows all of its children.
    pub fn bottom_up_order(&self) -> &[usize] {
        &self.bottom_up
    }

    /// The node itself and all of its ancestors, ascending by index.
    pub fn ancestors(&self, node: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![node];
        seen[node] = true;
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        (0..self.len()).filter(|&v| seen[v]).collect()
    }
}

pub fn load_dag(path: impl AsRef<Path>) -> Result<DiseaseDag> {
    let path = path.as_ref();
    parse_dag(open(path)?, path)
}

/// Parses `child<TAB>parent` lines.
pub fn parse_dag(reader: impl BufRead, path: &Path) -> Result<DiseaseDag> {
    let lines = read_pairs(reader, path)?;
    DiseaseDag::from_edges(lines.into_iter().map(|(_, c, p)| (c, p)))
}

/// Held-out positives of one cross-validation fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldMask {
    pub fold_id: usize,
    pub held_out: BTreeSet<(usize, usize)>,
}

impl FoldMask {
    pub fn new(fold_id: usize, held_out: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            fold_id,
            held_out: held_out.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.held_out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.held_out.is_empty()
    }

    pub fn contains(&self, pair: &(usize, usize)) -> bool {
        self.held_out.contains(pair)
    }
}

/// Copy of `ld` with the held-out positives zeroed.
pub fn apply_mask(ld: &AssociationMatrix, mask: &FoldMask) -> Result<AssociationMatrix> {
    let (nr, nc) = ld.shape();
    let mut out = ld.clone();
    for &(i, j) in &mask.held_out {
        if i >= nr || j >= nc {
            return Err(Error::InvalidMask(format!(
                "pair ({i}, {j}) outside {nr}x{nc}"
            )));
        }
        if !ld.is_set(i, j) {
            return Err(Error::InvalidMask(format!(
                "pair ({i}, {j}) is not a known association"
            )));
        }
        out.values[(i, j)] = 0.0;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ld(text: &str) -> Result<AssociationMatrix> {
        parse_associations(
            text.as_bytes(),
            Path::new("test.tsv"),
            EntityKind::LncRna,
            EntityKind::Disease,
        )
    }

    #[test]
    fn identity_incidence() {
        let m = parse_ld("A\tX\nB\tY\n").unwrap();
        assert_eq!(m.values(), &ndarray::array![[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.rows().names(), ["A", "B"]);
    }

    #[test]
    fn duplicates_are_idempotent() {
        let once = parse_ld("A\tX\nB\tY\n").unwrap();
        let twice = parse_ld("A\tX\nA\tX\nB\tY\n").unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn names_are_trimmed_and_case_folded() {
        let m = parse_ld("# header\nMALAT1\tLung Cancer\n malat1 \tlung cancer\n\n").unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert_eq!(m.rows().name(0), "MALAT1");
        assert_eq!(m.rows().position("Malat1"), Some(0));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse_ld("A\tX\n# c\nbroken\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_ld("A\t\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(parse_ld("# nothing\n\n"), Err(Error::EmptyFile(_))));
        assert!(matches!(parse_ld(""), Err(Error::EmptyFile(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        let r = load_associations("/nonexistent/ld.tsv", EntityKind::LncRna, EntityKind::Disease);
        assert!(matches!(r, Err(Error::Io { .. })));
    }

    #[test]
    fn reindex_drops_unknown_names() {
        let m = parse_ld("A\tX\nB\tY\nC\tZ\n").unwrap();
        let rows = EntityCatalog::from_names(EntityKind::LncRna, ["c", "a", "q"]);
        let cols = EntityCatalog::from_names(EntityKind::Disease, ["x", "z"]);
        let r = m.reindex(&rows, &cols);
        assert_eq!(r.values(), &ndarray::array![[0.0, 1.0], [1.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn single_edge_dag() {
        let dag = parse_dag("d\tp\n".as_bytes(), Path::new("dag")).unwrap();
        assert_eq!(dag.len(), 2);
        let d = dag.nodes().position("d").unwrap();
        let p = dag.nodes().position("p").unwrap();
        assert_eq!(dag.parents(d), [p]);
        assert!(dag.parents(p).is_empty());
    }

    #[test]
    fn diamond_ancestors() {
        let dag = DiseaseDag::from_edges([("d", "p"), ("p", "g"), ("d", "q"), ("q", "g")]).unwrap();
        let d = dag.nodes().position("d").unwrap();
        let names: BTreeSet<&str> = dag.ancestors(d).into_iter().map(|v| dag.nodes().name(v)).collect();
        assert_eq!(names, BTreeSet::from(["d", "p", "q", "g"]));
        // children before parents
        let order = dag.bottom_up_order();
        let pos = |name: &str| order.iter().position(|&v| dag.nodes().name(v) == name).unwrap();
        assert!(pos("d") < pos("p") && pos("p") < pos("g") && pos("q") < pos("g"));
    }

    #[test]
    fn cycle_is_rejected() {
        match DiseaseDag::from_edges([("a", "b"), ("b", "a")]) {
            Err(Error::Cycle(name)) => assert!(name == "a" || name == "b"),
            other => panic!("unexpected {other:?}"),
        }
        // cycle reached from an acyclic tail names a node on the cycle itself
        match DiseaseDag::from_edges([("t", "a"), ("a", "b"), ("b", "c"), ("c", "a")]) {
            Err(Error::Cycle(name)) => assert!(["a", "b", "c"].contains(&name.as_str())),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn self_loop_is_rejected() {
        assert!(matches!(DiseaseDag::from_edges([("a", "A ")]), Err(Error::SelfLoop(_))));
    }

    #[test]
    fn mask_edge_cases() {
        let ld = parse_ld("A\tX\nB\tY\n").unwrap();
        assert_eq!(apply_mask(&ld, &FoldMask::new(0, [])).unwrap(), ld);

        let single = parse_ld("A\tX\n").unwrap();
        let masked = apply_mask(&single, &FoldMask::new(0, [(0, 0)])).unwrap();
        assert_eq!(masked.count_ones(), 0);
        assert_eq!(single.count_ones(), 1);

        assert!(matches!(
            apply_mask(&ld, &FoldMask::new(0, [(0, 1)])),
            Err(Error::InvalidMask(_))
        ));
        assert!(matches!(
            apply_mask(&ld, &FoldMask::new(0, [(5, 0)])),
            Err(Error::InvalidMask(_))
        ));
    }
}
