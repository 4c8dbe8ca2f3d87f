//! Random graph generation, edge-list dataset loading, and model
//! statistics.
//!
//! The random generator identity is pinned: entries are drawn from
//! ChaCha8 seeded by the spec's 64-bit seed, one uniform `f64` per entry
//! in row-major order. That makes every generated matrix reproducible
//! from `(n, p_e, seed)` alone, across platforms and releases, which the
//! benchmark harness relies on.

use crate::front::{parse_facts, ConstantTable, FactFormat, FrontError, PredicateTable};
use crate::matrix::BitMatrix;
use crate::solve::Model;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::error::Error;
use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Parameters of a directed Erdős–Rényi-style random adjacency matrix:
/// every entry (self-loops included) is 1 independently with probability
/// `p_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSpec {
    pub n: usize,
    pub p_e: f64,
    pub seed: u64,
}

/// Samples the adjacency matrix described by `spec`. Same spec, same
/// matrix — see the module docs for the pinned generator.
pub fn random_adjacency(spec: &GraphSpec) -> BitMatrix {
    assert!(spec.n >= 1, "graph needs at least one node");
    assert!(
        (0.0..=1.0).contains(&spec.p_e),
        "edge probability must lie in [0,1], got {}",
        spec.p_e
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut m = BitMatrix::zeros(spec.n);
    for i in 0..spec.n {
        for j in 0..spec.n {
            // random::<f64>() is uniform on [0,1), so p_e = 1 always
            // fires and p_e = 0 never does.
            if rng.random::<f64>() < spec.p_e {
                m.set(i, j, true);
            }
        }
    }
    m
}

/// A binary relation loaded from an edge-list file, with the size
/// figures datasets are usually tabulated by.
#[derive(Debug, Clone)]
pub struct LoadedRelation {
    pub predicate: String,
    pub matrix: BitMatrix,
    pub constants: ConstantTable,
    /// Distinct pairs — the relation's cardinality.
    pub edges: usize,
    /// Input rows beyond the first occurrence of their pair.
    pub duplicates: usize,
}

impl LoadedRelation {
    /// Number of constants (matrix dimension).
    pub fn nodes(&self) -> usize {
        self.matrix.n()
    }
}

#[derive(Debug)]
pub enum LoadError {
    Io { path: PathBuf, source: io::Error },
    Parse { source: FrontError },
    /// No edges at all: every line blank or a comment.
    Empty,
    /// The atoms format names its own predicates and is handled by the
    /// program parser; edge-list loading needs a tabular format.
    NotTabular,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io { path, source } => {
                write!(f, "cannot read {}: {source}", path.display())
            }
            LoadError::Parse { source } => write!(f, "{source}"),
            LoadError::Empty => write!(f, "edge list contains no edges"),
            LoadError::NotTabular => {
                write!(f, "edge-list loading expects the tsv or konect format")
            }
        }
    }
}

impl Error for LoadError {
    fn source(&self) -> Option<&(dyn Error + 'static)> {
        match self {
            LoadError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Loads a single binary relation from edge-list text. Constants are
/// indexed lexicographically over the set discovered in the file, so
/// shuffling input lines changes nothing; duplicate edges collapse.
pub fn load_edge_list_text(
    text: &str,
    format: FactFormat,
    predicate: &str,
) -> Result<LoadedRelation, LoadError> {
    if format == FactFormat::Atoms {
        return Err(LoadError::NotTabular);
    }
    let pairs = parse_facts(text, format, Some(predicate))
        .map_err(|source| LoadError::Parse { source })?;
    if pairs.is_empty() {
        return Err(LoadError::Empty);
    }
    let constants = ConstantTable::from_names(
        pairs.iter().flat_map(|(_, (a, b))| [a.as_str(), b.as_str()]),
    );
    let mut matrix = BitMatrix::zeros(constants.len());
    let mut edges = 0usize;
    for (_, (a, b)) in &pairs {
        let i = constants.lookup(a).expect("constant was just registered");
        let j = constants.lookup(b).expect("constant was just registered");
        if !matrix.get(i.0 as usize, j.0 as usize) {
            matrix.set(i.0 as usize, j.0 as usize, true);
            edges += 1;
        }
    }
    Ok(LoadedRelation {
        predicate: predicate.to_string(),
        matrix,
        constants,
        edges,
        duplicates: pairs.len() - edges,
    })
}

/// [`load_edge_list_text`] applied to a file.
pub fn load_edge_list(
    path: &Path,
    format: FactFormat,
    predicate: &str,
) -> Result<LoadedRelation, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    load_edge_list_text(&text, format, predicate)
}

/// Writes per-relation nonzero counts plus any caller-supplied phase
/// timings, first as an aligned table for reading and then as
/// `key=value` records for scripts.
pub fn write_stats<W: Write>(
    out: &mut W,
    model: &Model,
    predicates: &PredicateTable,
    timings: &[(&str, f64)],
) -> io::Result<()> {
    let known: BTreeSet<_> = model.relations.keys().copied().collect();
    let rows: Vec<(&str, usize)> = predicates
        .ids_by_name()
        .into_iter()
        .filter(|p| known.contains(p))
        .map(|p| (predicates.name(p), model.relations[&p].count_ones()))
        .collect();

    let name_w = rows
        .iter()
        .map(|(n, _)| n.len())
        .chain(timings.iter().map(|(n, _)| n.len()))
        .max()
        .unwrap_or(0)
        .max("relation".len());
    writeln!(out, "{:name_w$}  nonzeros", "relation")?;
    for (name, count) in &rows {
        writeln!(out, "{name:name_w$}  {count}")?;
    }
    if !timings.is_empty() {
        writeln!(out)?;
        writeln!(out, "{:name_w$}  seconds", "phase")?;
        for (name, secs) in timings {
            writeln!(out, "{name:name_w$}  {secs:.6}")?;
        }
    }
    writeln!(out)?;
    for (name, count) in &rows {
        writeln!(out, "count.{name}={count}")?;
    }
    for (name, secs) in timings {
        writeln!(out, "time.{name}={secs:.6}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::front::parse_program;
    use crate::solve::{evaluate_program, SolveOptions};
    use std::collections::HashSet;

    #[test]
    fn probability_extremes_give_empty_and_full_matrices() {
        let zero = random_adjacency(&GraphSpec { n: 8, p_e: 0.0, seed: 1 });
        assert_eq!(zero.count_ones(), 0);
        let full = random_adjacency(&GraphSpec { n: 8, p_e: 1.0, seed: 1 });
        assert_eq!(full.count_ones(), 64);
    }

    #[test]
    fn edge_count_concentrates_around_its_mean() {
        // Mean p·N² = 1000, σ = √(N²p(1−p)) ≈ 31.6; four σ ≈ 126.
        let m = random_adjacency(&GraphSpec { n: 1000, p_e: 0.001, seed: 7 });
        let count = m.count_ones() as f64;
        assert!((count - 1000.0).abs() < 4.0 * 31.6, "count {count} strays too far");
    }

    #[test]
    fn generation_is_reproducible_and_seed_sensitive() {
        let spec = GraphSpec { n: 30, p_e: 0.1, seed: 99 };
        assert_eq!(random_adjacency(&spec), random_adjacency(&spec));
        let distinct: HashSet<Vec<u8>> = (0..10)
            .map(|seed| {
                random_adjacency(&GraphSpec { n: 30, p_e: 0.1, seed }).data().to_vec()
            })
            .collect();
        assert_eq!(distinct.len(), 10, "different seeds must give different matrices");
    }

    #[test]
    fn konect_text_loads_with_size_figures() {
        let rel =
            load_edge_list_text("% a comment\n1 2\n2 3\n", FactFormat::Konect, "r1").unwrap();
        assert_eq!(rel.nodes(), 3);
        assert_eq!(rel.edges, 2);
        assert_eq!(rel.duplicates, 0);
        // Constants sort lexicographically: 1, 2, 3.
        assert!(rel.matrix.get(0, 1) && rel.matrix.get(1, 2));
    }

    #[test]
    fn duplicate_edges_collapse_but_are_counted() {
        let rel = load_edge_list_text("1 2\n1 2\n2 3\n1 2\n", FactFormat::Konect, "r1").unwrap();
        assert_eq!(rel.edges, 2);
        assert_eq!(rel.duplicates, 2);
        assert_eq!(rel.matrix.count_ones(), 2);
    }

    #[test]
    fn loading_is_insensitive_to_line_order() {
        let a = load_edge_list_text("1 2\n2 3\n10 1\n", FactFormat::Konect, "r1").unwrap();
        let b = load_edge_list_text("10 1\n1 2\n2 3\n", FactFormat::Konect, "r1").unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.constants.names(), b.constants.names());
    }

    #[test]
    fn tsv_text_loads_named_constants() {
        let rel = load_edge_list_text("ann\tbob\nbob\tcarol\n", FactFormat::Tsv, "knows").unwrap();
        assert_eq!(rel.nodes(), 3);
        assert_eq!(rel.constants.names(), &["ann", "bob", "carol"]);
        assert!(rel.matrix.get(0, 1) && rel.matrix.get(1, 2));
    }

    #[test]
    fn empty_and_malformed_inputs_are_reported() {
        match load_edge_list_text("% nothing here\n\n", FactFormat::Konect, "r1") {
            Err(LoadError::Empty) => {}
            other => panic!("unexpected {other:?}"),
        }
        match load_edge_list_text("1 2\noops\n", FactFormat::Konect, "r1") {
            Err(LoadError::Parse { source: FrontError::MalformedLine { line: 2, .. } }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match load_edge_list_text("1\t2\n", FactFormat::Atoms, "r1") {
            Err(LoadError::NotTabular) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stats_report_counts_every_relation() {
        let program = crate::solve::fixtures::worked_program();
        let model = evaluate_program(&program, &SolveOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_stats(&mut buf, &model, &program.predicates, &[("solve", 0.25)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("count.r1=4"), "got:\n{text}");
        assert!(text.contains("count.r2=12"), "got:\n{text}");
        assert!(text.contains("time.solve=0.250000"), "got:\n{text}");
    }

    #[test]
    fn chain_closure_counts_three_pairs() {
        let program =
            parse_program("r2(X,Z) :- r1(X,Z).\nr2(X,Z) :- r1(X,Y), r2(Y,Z).\nr1(1,2). r1(2,3).")
                .unwrap();
        let model = evaluate_program(&program, &SolveOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_stats(&mut buf, &model, &program.predicates, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("count.r2=3"), "got:\n{text}");
    }

    #[test]
    fn empty_model_renders_headers_only() {
        let model = Model { relations: Default::default(), layers: Vec::new() };
        let table = PredicateTable::new();
        let mut buf = Vec::new();
        write_stats(&mut buf, &model, &table, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("relation  nonzeros"));
        assert!(!text.contains("count."));
    }
}
