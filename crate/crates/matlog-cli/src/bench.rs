//! Benchmark harness: generates random instances of the two stock
//! tasks, asserts that every requested method produces the same answer,
//! then times compile and solve phases separately over repeated runs
//! with distinct seeds.

use crate::input::{matrix_pairs, node_names, CliError};
use matlog::analysis::{layer_program, LayerClass};
use matlog::compile::{compile_layer, EquationSystem};
use matlog::data::{random_adjacency, GraphSpec};
use matlog::front::{parse_program, PredId, Program};
use matlog::matrix::BitMatrix;
use matlog::solve::{solve_system, warshall_transitive_closure, Method, SolveOptions};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

/// The two stock benchmark programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    /// Transitive closure of a random edge relation.
    Trcl,
    /// Same-generation over a random parent relation.
    Sgen,
}

impl Task {
    pub fn from_name(name: &str) -> Option<Task> {
        match name {
            "trcl" => Some(Task::Trcl),
            "sgen" => Some(Task::Sgen),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Trcl => "trcl",
            Task::Sgen => "sgen",
        }
    }

    fn program_text(self) -> &'static str {
        match self {
            Task::Trcl => "r2(X,Z) :- r1(X,Z).\nr2(X,Z) :- r1(X,Y), r2(Y,Z).\n",
            Task::Sgen => "r2(X,W) :- diag(X,W).\nr2(X,W) :- r1(X,Y), r2(Y,Z), r1(W,Z).\n",
        }
    }

    pub fn default_methods(self) -> Vec<BenchMethod> {
        match self {
            Task::Trcl => {
                vec![BenchMethod::Solver(Method::Direct), BenchMethod::Solver(Method::Boolean)]
            }
            Task::Sgen => {
                vec![BenchMethod::Solver(Method::Sylvester), BenchMethod::Solver(Method::Boolean)]
            }
        }
    }
}

/// A method the harness can time: any solver strategy, or the plain
/// closure algorithm on the raw adjacency matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    Solver(Method),
    Warshall,
}

impl BenchMethod {
    pub fn from_name(name: &str) -> Option<BenchMethod> {
        if name == "warshall" {
            return Some(BenchMethod::Warshall);
        }
        Method::from_name(name).map(BenchMethod::Solver)
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Solver(m) => m.name(),
            BenchMethod::Warshall => "warshall",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub task: Task,
    pub n: usize,
    pub pe_list: Vec<f64>,
    pub repeat: usize,
    pub methods: Vec<BenchMethod>,
    /// Wall-clock budget in seconds for one (p_e, method) row's timed
    /// runs; the row is labeled instead of aborted mid-solve.
    pub timeout: f64,
    pub seed: u64,
    pub max_iters: Option<usize>,
}

/// One timed (p_e, method) row.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub pe: f64,
    pub method: &'static str,
    pub repeats_done: usize,
    pub compile_mean: f64,
    pub solve_mean: f64,
    pub nonzeros: usize,
    /// `ok`, `timeout`, or a skip/error note.
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
}

struct Instance {
    system: EquationSystem,
    class: LayerClass,
    /// Head predicate of the recursive layer.
    head: PredId,
    adjacency: BitMatrix,
}

fn generate(task: Task, n: usize, pe: f64, seed: u64) -> Result<(Program, BitMatrix), CliError> {
    let mut program = parse_program(task.program_text()).expect("stock program parses");
    let names = node_names(n);
    let adjacency = random_adjacency(&GraphSpec { n, p_e: pe, seed });
    program
        .ensure_constants(names.iter().cloned())
        .and_then(|_| program.merge_fact_pairs("r1", &matrix_pairs(&adjacency, &names)))
        .map_err(|e| CliError::Failed(e.to_string()))?;
    if task == Task::Sgen {
        program.add_diag_builtin("diag");
    }
    program.recompute_kinds();
    Ok((program, adjacency))
}

/// The compile phase as timed by the harness: layering, fact-matrix
/// assembly, and equation compilation for the recursive layer.
fn compile(program: &Program, adjacency: BitMatrix) -> Result<Instance, CliError> {
    let layered = layer_program(program).map_err(|e| CliError::Failed(e.to_string()))?;
    let n = program.domain_size();
    let facts = program.fact_set();
    let mut relations = BTreeMap::new();
    for layer in &layered.layers[..layered.layers.len() - 1] {
        for &p in &layer.predicates {
            relations.insert(p, facts.matrix(p, n));
        }
    }
    let top = layered.layers.last().expect("stock programs have layers");
    let system = compile_layer(program, top, &relations, None)
        .map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(Instance { system, class: top.class, head: top.predicates[0], adjacency })
}

fn solve_options(config: &BenchConfig, method: Method) -> SolveOptions {
    SolveOptions { method, max_iters: config.max_iters, ..SolveOptions::default() }
}

/// Runs one method on a prepared instance, returning the answer's
/// support; `Err` carries a row status label.
fn method_support(
    config: &BenchConfig,
    instance: &Instance,
    method: BenchMethod,
) -> Result<BitMatrix, String> {
    match method {
        BenchMethod::Warshall => Ok(warshall_transitive_closure(&instance.adjacency)),
        BenchMethod::Solver(m) => {
            match solve_system(&instance.system, instance.class, &solve_options(config, m)) {
                Ok(solution) => Ok(solution.support[&instance.head].clone()),
                Err(e @ matlog::solve::SolveError::Unsupported { .. }) => {
                    Err(format!("n/a: {e}"))
                }
                Err(e) => Err(format!("error: {e}")),
            }
        }
    }
}

/// First differing coordinates of two supports, for gate messages.
fn first_diffs(a: &BitMatrix, b: &BitMatrix, limit: usize) -> (usize, Vec<(usize, usize)>) {
    let mut count = 0;
    let mut coords = Vec::new();
    for i in 0..a.n() {
        for j in 0..a.n() {
            if a.get(i, j) != b.get(i, j) {
                count += 1;
                if coords.len() < limit {
                    coords.push((i, j));
                }
            }
        }
    }
    (count, coords)
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, CliError> {
    if config.repeat == 0 {
        return Err(CliError::Usage("--repeat must be at least 1".into()));
    }
    if config.pe_list.is_empty() {
        return Err(CliError::Usage("give at least one --pe".into()));
    }
    for &pe in &config.pe_list {
        if !(0.0..=1.0).contains(&pe) {
            return Err(CliError::Usage(format!("--pe must lie in [0,1], got {pe}")));
        }
    }
    if config.methods.contains(&BenchMethod::Warshall) && config.task != Task::Trcl {
        return Err(CliError::Usage("warshall only applies to the trcl task".into()));
    }

    let mut rows = Vec::new();
    for &pe in &config.pe_list {
        // Equality gate on the first seed's instance: every method that
        // runs at all must produce the same support before anything is
        // timed.
        let (program, adjacency) = generate(config.task, config.n, pe, config.seed)?;
        let instance = compile(&program, adjacency)?;
        let gate: Vec<(BenchMethod, Result<BitMatrix, String>)> = config
            .methods
            .iter()
            .map(|&m| (m, method_support(config, &instance, m)))
            .collect();
        let baseline = gate.iter().find_map(|(m, r)| r.as_ref().ok().map(|s| (*m, s)));
        if let Some((base_method, base)) = baseline {
            for (method, result) in &gate {
                if let Ok(support) = result {
                    let (count, coords) = first_diffs(base, support, 3);
                    if count > 0 {
                        return Err(CliError::Failed(format!(
                            "equality gate failed at p_e={pe}: {} and {} differ at \
                             {count} entries (first: {})",
                            base_method.name(),
                            method.name(),
                            coords
                                .iter()
                                .map(|(i, j)| format!("({i},{j})"))
                                .collect::<Vec<_>>()
                                .join(", ")
                        )));
                    }
                }
            }
        }

        for (method, gate_result) in gate {
            let nonzeros = match &gate_result {
                Ok(s) => s.count_ones(),
                Err(status) => {
                    rows.push(BenchRow {
                        pe,
                        method: method.name(),
                        repeats_done: 0,
                        compile_mean: 0.0,
                        solve_mean: 0.0,
                        nonzeros: 0,
                        status: status.clone(),
                    });
                    continue;
                }
            };

            let mut compile_total = 0.0;
            let mut solve_total = 0.0;
            let mut done = 0;
            let mut status = "ok".to_string();
            let row_start = Instant::now();
            for r in 0..config.repeat {
                let (program, adjacency) =
                    generate(config.task, config.n, pe, config.seed + r as u64)?;
                match method {
                    BenchMethod::Warshall => {
                        let t = Instant::now();
                        let closure = warshall_transitive_closure(&adjacency);
                        solve_total += t.elapsed().as_secs_f64();
                        std::hint::black_box(&closure);
                    }
                    BenchMethod::Solver(m) => {
                        let t = Instant::now();
                        let instance = compile(&program, adjacency)?;
                        compile_total += t.elapsed().as_secs_f64();
                        let t = Instant::now();
                        let solution =
                            solve_system(&instance.system, instance.class, &solve_options(config, m));
                        solve_total += t.elapsed().as_secs_f64();
                        if let Err(e) = solution {
                            status = format!("error: {e}");
                            break;
                        }
                    }
                }
                done += 1;
                if row_start.elapsed().as_secs_f64() > config.timeout && done < config.repeat {
                    status = "timeout".to_string();
                    break;
                }
            }
            let denom = done.max(1) as f64;
            rows.push(BenchRow {
                pe,
                method: method.name(),
                repeats_done: done,
                compile_mean: compile_total / denom,
                solve_mean: solve_total / denom,
                nonzeros,
                status,
            });
        }
    }
    Ok(BenchReport { config: config.clone(), rows })
}

impl BenchReport {
    fn row(&self, pe: f64, method: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.pe == pe && r.method == method)
    }

    /// Aligned table: one row per p_e, one solve-seconds column per
    /// method (status label where a method did not run clean).
    pub fn table(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(
            out,
            "task={} n={} repeat={} seed={} (mean solve seconds per method)",
            c.task.name(),
            c.n,
            c.repeat,
            c.seed
        );
        let width = 14usize;
        let _ = write!(out, "{:>10}", "p_e");
        for m in &c.methods {
            let _ = write!(out, "  {:>width$}", m.name());
        }
        let _ = writeln!(out, "  {:>10}", "nonzeros");
        for &pe in &c.pe_list {
            let _ = write!(out, "{pe:>10.6}");
            let mut nnz = 0;
            for m in &c.methods {
                let cell = match self.row(pe, m.name()) {
                    Some(r) if r.status == "ok" => {
                        nnz = r.nonzeros;
                        format!("{:.6}", r.solve_mean)
                    }
                    Some(r) if r.status == "timeout" => {
                        nnz = r.nonzeros;
                        "timeout".to_string()
                    }
                    Some(r) => r.status.split(':').next().unwrap_or("?").to_string(),
                    None => "-".to_string(),
                };
                let _ = write!(out, "  {cell:>width$}");
            }
            let _ = writeln!(out, "  {nnz:>10}");
        }
        out
    }

    /// Schema-stable CSV: same columns for every run.
    pub fn csv(&self) -> String {
        let mut out =
            String::from("task,n,p_e,method,repeats,compile_mean_s,solve_mean_s,nonzeros,status\n");
        for r in &self.rows {
            let (compile_s, solve_s) = if r.repeats_done == 0 {
                (String::new(), String::new())
            } else {
                (format!("{:.6}", r.compile_mean), format!("{:.6}", r.solve_mean))
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.config.task.name(),
                self.config.n,
                r.pe,
                r.method,
                r.repeats_done,
                compile_s,
                solve_s,
                r.nonzeros,
                // Commas in error detail would break the schema.
                r.status.replace(',', ";")
            );
        }
        out
    }
}
