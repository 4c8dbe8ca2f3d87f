//! Shared input handling: the program file plus optional fact files, a
//! generated random relation, and the built-in diagonal relation.

use clap::Args;
use matlog::data::{random_adjacency, GraphSpec};
use matlog::front::{parse_facts, parse_program, FactFormat, Program};
use matlog::matrix::BitMatrix;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// Failures are split by exit code: bad invocations and I/O problems
/// exit 2, everything the inputs themselves cause (validation, solver,
/// equality failures) exits 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Failed(msg) => write!(f, "{msg}"),
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Inputs shared by `solve` and `compare`: a program plus however the
/// extensional relations arrive.
#[derive(Debug, Args)]
pub struct InputOpts {
    /// Program file in clause syntax.
    pub program: PathBuf,

    /// Extra fact file merged into the program (repeatable).
    #[arg(long, value_name = "FILE")]
    pub facts: Vec<PathBuf>,

    /// Format of --facts files.
    #[arg(long, default_value = "atoms", value_parser = ["atoms", "tsv", "konect"])]
    pub format: String,

    /// Predicate that tsv/konect/generated facts belong to; defaults to
    /// the program's only extensional predicate.
    #[arg(long, value_name = "PRED")]
    pub bind: Option<String>,

    /// Merge a generated random relation with this many nodes.
    #[arg(long, value_name = "N")]
    pub gen: Option<usize>,

    /// Edge probability for --gen.
    #[arg(long, default_value_t = 0.1)]
    pub pe: f64,

    /// Seed for --gen.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Populate this built-in equality predicate with one (c,c) fact per
    /// constant, after all other inputs are loaded.
    #[arg(long, value_name = "NAME", num_args = 0..=1, default_missing_value = "diag")]
    pub builtin_diag: Option<String>,
}

/// Zero-padded node names for generated graphs, so the lexicographic
/// constant order matches node index order.
pub fn node_names(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("n{i:0width$}")).collect()
}

/// The `(name, name)` pairs of a generated adjacency matrix.
pub fn matrix_pairs(m: &BitMatrix, names: &[String]) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for i in 0..m.n() {
        for j in 0..m.n() {
            if m.get(i, j) {
                pairs.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    pairs
}

impl InputOpts {
    /// The predicate generated or tabular facts bind to.
    fn resolve_bind(&self, program: &Program) -> Result<String, CliError> {
        if let Some(name) = &self.bind {
            return Ok(name.clone());
        }
        let ext = program.extensional_predicates();
        match ext.as_slice() {
            [only] => Ok(program.predicates.name(*only).to_string()),
            [] => Err(CliError::Usage(
                "--bind required: the program has no extensional predicate".into(),
            )),
            many => Err(CliError::Usage(format!(
                "--bind required: {} extensional predicates ({})",
                many.len(),
                many.iter().map(|&p| program.predicates.name(p)).collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn load(&self) -> Result<Program, CliError> {
        let text = read_file(&self.program)?;
        let mut program = parse_program(&text)
            .map_err(|e| CliError::Failed(format!("{}: {e}", self.program.display())))?;
        program.recompute_kinds();

        let format = FactFormat::from_name(&self.format)
            .expect("clap restricts --format to known names");
        for path in &self.facts {
            let text = read_file(path)?;
            let bind = match format {
                FactFormat::Atoms => None,
                _ => Some(self.resolve_bind(&program)?),
            };
            let pairs = parse_facts(&text, format, bind.as_deref())
                .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
            // Group by predicate so each merge is one table rebuild.
            let mut grouped: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
            for (pred, pair) in pairs {
                grouped.entry(pred).or_default().push(pair);
            }
            for (pred, pairs) in grouped {
                program
                    .merge_fact_pairs(&pred, &pairs)
                    .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
            }
            program.recompute_kinds();
        }

        if let Some(n) = self.gen {
            if n == 0 {
                return Err(CliError::Usage("--gen needs at least one node".into()));
            }
            if !(0.0..=1.0).contains(&self.pe) {
                return Err(CliError::Usage(format!(
                    "--pe must lie in [0,1], got {}",
                    self.pe
                )));
            }
            let bind = self.resolve_bind(&program)?;
            let names = node_names(n);
            let m = random_adjacency(&GraphSpec { n, p_e: self.pe, seed: self.seed });
            program
                .ensure_constants(names.iter().cloned())
                .map_err(|e| CliError::Failed(e.to_string()))?;
            program
                .merge_fact_pairs(&bind, &matrix_pairs(&m, &names))
                .map_err(|e| CliError::Failed(e.to_string()))?;
            program.recompute_kinds();
        }

        if let Some(name) = &self.builtin_diag {
            program.add_diag_builtin(name);
            program.recompute_kinds();
        }
        Ok(program)
    }
}
