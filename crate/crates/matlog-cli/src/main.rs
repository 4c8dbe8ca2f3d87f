//! Command-line front end: validate and classify programs, solve them
//! with a chosen strategy, benchmark methods on random instances, and
//! cross-check methods against each other.

mod bench;
mod input;

use bench::{run_bench, BenchConfig, BenchMethod, Task};
use clap::{Args, Parser, Subcommand};
use input::{read_file, CliError, InputOpts};
use matlog::analysis::{layer_program, normalize_clause, validate_clin};
use matlog::compile::compile_layer;
use matlog::data::write_stats;
use matlog::front::{parse_program, ConstId, PredId, Program};
use matlog::matrix::{write_matrix, BitMatrix, MatrixPayload};
use matlog::solve::{
    evaluate_program, solve_system, warshall_transitive_closure, EvalError, Method, Model,
    SolveError, SolveOptions,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "matlog", version, about = "Datalog evaluation over adjacency matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a program lies inside the supported chain fragment.
    Validate {
        /// Program file in clause syntax.
        program: PathBuf,
    },
    /// Print the layer structure, optionally with each layer's equations.
    Classify {
        /// Program file in clause syntax.
        program: PathBuf,
        /// Compile each layer (solving lower ones) and print its
        /// equation system symbolically.
        #[arg(long)]
        emit_equations: bool,
    },
    /// Evaluate a program and write its least model.
    Solve(SolveArgs),
    /// Time methods on generated random instances of a stock task.
    Bench(BenchArgs),
    /// Solve with every applicable method and report any differences.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputOpts,

    /// Solver method.
    #[arg(long, default_value = "auto")]
    method: String,

    /// Support threshold: solution entries strictly above it are facts.
    #[arg(long)]
    tau: Option<f64>,

    /// Replace each layer's computed scale factor (must stay within the
    /// admissible bound, else the run fails).
    #[arg(long)]
    epsilon: Option<f64>,

    /// Iteration/sweep cap override.
    #[arg(long)]
    max_iters: Option<usize>,

    /// Write the model to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Write every relation's 0/1 and solution matrices into this
    /// directory in the binary dump format.
    #[arg(long, value_name = "DIR")]
    dump_matrices: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark task.
    #[arg(long, value_parser = ["trcl", "sgen"])]
    task: String,

    /// Node count.
    #[arg(long)]
    n: usize,

    /// Edge probability (repeatable).
    #[arg(long = "pe", value_name = "P")]
    pe: Vec<f64>,

    /// Timed runs per (p_e, method) cell, using seeds seed, seed+1, ...
    #[arg(long, default_value_t = 5)]
    repeat: usize,

    /// Comma-separated methods (solver names plus `warshall`); defaults
    /// per task.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,

    /// Wall-clock budget in seconds for one row's timed runs.
    #[arg(long, default_value_t = 3600.0)]
    timeout: f64,

    /// Base seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Sweep-cap override for iterative solvers.
    #[arg(long)]
    max_iters: Option<usize>,

    /// Also write the rows as CSV to this file.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputOpts,

    /// Iteration/sweep cap override.
    #[arg(long)]
    max_iters: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { program } => cmd_validate(&program),
        Command::Classify { program, emit_equations } => cmd_classify(&program, emit_equations),
        Command::Solve(args) => cmd_solve(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Compare(args) => cmd_compare(&args),
    }
}

fn load_program_file(path: &Path) -> Result<Program, CliError> {
    let text = read_file(path)?;
    let mut program = parse_program(&text)
        .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
    program.recompute_kinds();
    Ok(program)
}

fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let program = load_program_file(path)?;
    let report = validate_clin(&program);
    for note in &report.notes {
        println!("note: {note}");
    }
    if !report.is_ok() {
        for v in &report.violations {
            println!("clause {} '{}': {}", v.clause_index, v.clause, v.reason);
        }
        return Err(CliError::Failed(format!(
            "program is outside the supported fragment ({} violating clause{})",
            report.violations.len(),
            if report.violations.len() == 1 { "" } else { "s" }
        )));
    }
    let layered = layer_program(&program).expect("validated program layers");
    println!(
        "ok: program is in the supported fragment ({} layers, {} predicates, {} clauses)",
        layered.layers.len(),
        program.predicates.len(),
        program.clauses.len()
    );
    Ok(())
}

fn cmd_classify(path: &Path, emit_equations: bool) -> Result<(), CliError> {
    let program = load_program_file(path)?;
    let layered = layer_program(&program).map_err(|e| {
        CliError::Failed(format!("{e}; run `matlog validate` for details"))
    })?;
    let mut relations: BTreeMap<PredId, BitMatrix> = BTreeMap::new();
    for (i, layer) in layered.layers.iter().enumerate() {
        let names: Vec<&str> =
            layer.predicates.iter().map(|&p| program.predicates.name(p)).collect();
        println!(
            "layer {i}: predicates=[{}] class={} clauses={}",
            names.join(", "),
            layer.class,
            layer.clauses.len()
        );
        if !emit_equations {
            continue;
        }
        let system = compile_layer(&program, layer, &relations, None)
            .map_err(|e| CliError::Failed(format!("layer {i}: {e}")))?;
        for line in system.render(&program.predicates).lines() {
            println!("  {line}");
        }
        // Solve so later layers see this one's relations. Facts layers
        // would otherwise leave their dependents uncompilable.
        let solution = solve_system(&system, layer.class, &SolveOptions::default())
            .map_err(|e| CliError::Failed(format!("layer {i}: {e}")))?;
        relations.extend(solution.support);
    }
    if !emit_equations {
        // Keep the fragment guarantee visible even without equations.
        println!("{} layers", layered.layers.len());
    }
    Ok(())
}

fn eval_failure(e: EvalError) -> CliError {
    match e {
        EvalError::Invalid(not_in) => {
            let mut msg = String::from("program is outside the supported fragment:");
            for v in not_in.report.violations.iter().take(3) {
                let _ = write!(msg, "\n  clause {} '{}': {}", v.clause_index, v.clause, v.reason);
            }
            if not_in.report.violations.len() > 3 {
                let _ = write!(msg, "\n  ... and {} more", not_in.report.violations.len() - 3);
            }
            CliError::Failed(msg)
        }
        other => CliError::Failed(other.to_string()),
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let method = Method::from_name(&args.method).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown method '{}'; expected one of {}",
            args.method,
            Method::all_names().join(", ")
        ))
    })?;
    let mut options = SolveOptions {
        method,
        epsilon_override: args.epsilon,
        max_iters: args.max_iters,
        ..SolveOptions::default()
    };
    if let Some(tau) = args.tau {
        if !(tau >= 0.0) {
            return Err(CliError::Usage(format!("--tau must be nonnegative, got {tau}")));
        }
        options.tau = tau;
    }
    let program = args.input.load()?;
    let started = Instant::now();
    let model = evaluate_program(&program, &options).map_err(eval_failure)?;
    let elapsed = started.elapsed().as_secs_f64();

    print!("{}", model.provenance_report(&program));
    let mut stats = Vec::new();
    write_stats(&mut stats, &model, &program.predicates, &[("evaluate", elapsed)])
        .expect("writing to a buffer");
    print!("{}", String::from_utf8_lossy(&stats));

    let rendered = model.render(&program);
    match &args.out {
        Some(path) => {
            std::fs::write(path, rendered)
                .map_err(|source| CliError::Io { path: path.clone(), source })?;
            println!("model written to {}", path.display());
        }
        None => print!("{rendered}"),
    }
    if let Some(dir) = &args.dump_matrices {
        dump_model_matrices(dir, &model, &program)?;
        println!("matrices written to {}", dir.display());
    }
    Ok(())
}

fn dump_model_matrices(dir: &Path, model: &Model, program: &Program) -> Result<(), CliError> {
    let as_io = |path: &Path, source: std::io::Error| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(|e| as_io(dir, e))?;
    let write_one = |name: String, payload: MatrixPayload| -> Result<(), CliError> {
        let path = dir.join(name);
        let file = std::fs::File::create(&path).map_err(|e| as_io(&path, e))?;
        let mut w = std::io::BufWriter::new(file);
        write_matrix(&mut w, &payload)
            .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
        w.flush().map_err(|e| as_io(&path, e))
    };
    for (&pred, bits) in &model.relations {
        let name = program.predicates.name(pred);
        write_one(format!("{name}.bits.mlmx"), MatrixPayload::Bit(bits.clone()))?;
    }
    for layer in &model.layers {
        for (&pred, mat) in &layer.scaled {
            let name = program.predicates.name(pred);
            write_one(format!("{name}.scaled.mlmx"), MatrixPayload::Real(mat.clone()))?;
        }
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let task = Task::from_name(&args.task).expect("clap restricts --task");
    if args.n == 0 {
        return Err(CliError::Usage("--n needs at least one node".into()));
    }
    let methods = if args.methods.is_empty() {
        task.default_methods()
    } else {
        args.methods
            .iter()
            .map(|name| {
                BenchMethod::from_name(name).ok_or_else(|| {
                    CliError::Usage(format!(
                        "unknown method '{name}'; expected warshall or one of {}",
                        Method::all_names().join(", ")
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    let pe_list = if args.pe.is_empty() { vec![0.1] } else { args.pe.clone() };
    let config = BenchConfig {
        task,
        n: args.n,
        pe_list,
        repeat: args.repeat,
        methods,
        timeout: args.timeout,
        seed: args.seed,
        max_iters: args.max_iters,
    };
    let report = run_bench(&config)?;
    print!("{}", report.table());
    if let Some(path) = &args.csv {
        std::fs::write(path, report.csv())
            .map_err(|source| CliError::Io { path: path.clone(), source })?;
        println!("csv written to {}", path.display());
    }
    Ok(())
}

/// Recognizes the plain transitive-closure shape — a copy rule plus one
/// linear chain-extension rule over a single edge relation — so the
/// closure oracle can join the comparison.
fn trcl_shape(program: &Program) -> Option<(PredId, PredId)> {
    let rules: Vec<_> = program.clauses.iter().filter(|c| !c.is_fact()).collect();
    let [a, b] = rules.as_slice() else {
        return None;
    };
    let head = a.head.predicate;
    if b.head.predicate != head {
        return None;
    }
    let mut copy_edge = None;
    let mut step_edge = None;
    for rule in [a, b] {
        let chain = normalize_clause(rule).ok()?;
        if chain.iter().any(|atom| atom.transposed) {
            return None;
        }
        let preds: Vec<PredId> =
            chain.iter().map(|atom| rule.body[atom.body_index].predicate).collect();
        match preds.as_slice() {
            [e] if *e != head => copy_edge = Some(*e),
            [e, h] if *h == head && *e != head => step_edge = Some(*e),
            _ => return None,
        }
    }
    match (copy_edge, step_edge) {
        (Some(e1), Some(e2)) if e1 == e2 => Some((e1, head)),
        _ => None,
    }
}

/// Flips one support bit when the hook variable is set; exists so the
/// integration tests can prove a planted disagreement is caught.
fn apply_fault_hook(method: &str, model: &mut Model, program: &Program) {
    let Ok(spec) = std::env::var("MATLOG_FAULT_FLIP") else {
        return;
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let [m, pred, i, j] = parts.as_slice() else {
        return;
    };
    if *m != method {
        return;
    }
    let (Some(p), Ok(i), Ok(j)) =
        (program.predicates.lookup(pred), i.parse::<usize>(), j.parse::<usize>())
    else {
        return;
    };
    if let Some(bits) = model.relations.get_mut(&p) {
        let old = bits.get(i, j);
        bits.set(i, j, !old);
    }
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let program = args.input.load()?;
    let methods =
        [Method::Boolean, Method::Direct, Method::Scaled, Method::Sylvester, Method::KronOracle];
    let mut solved: Vec<(&'static str, Model)> = Vec::new();
    let mut hard_errors = 0usize;
    for method in methods {
        let options = SolveOptions {
            method,
            max_iters: args.max_iters,
            ..SolveOptions::default()
        };
        match evaluate_program(&program, &options) {
            Ok(mut model) => {
                apply_fault_hook(method.name(), &mut model, &program);
                println!("{}: ok", method.name());
                solved.push((method.name(), model));
            }
            Err(EvalError::Solve { source: SolveError::Unsupported { detail, .. }, .. }) => {
                println!("{}: not applicable ({detail})", method.name());
            }
            Err(e) => {
                println!("{}: error ({e})", method.name());
                hard_errors += 1;
            }
        }
    }
    let Some((base_name, base)) = solved.first() else {
        return Err(CliError::Failed("no method could solve the program".into()));
    };

    let mut total_diffs = 0usize;
    let describe = |name: &str, relation: &str, ours: &BitMatrix, theirs: &BitMatrix| {
        let mut count = 0;
        let mut coords = Vec::new();
        for i in 0..ours.n() {
            for j in 0..ours.n() {
                if ours.get(i, j) != theirs.get(i, j) {
                    count += 1;
                    if coords.len() < 3 {
                        coords.push(format!(
                            "{relation}({},{})",
                            program.constants.name(ConstId(i as u32)),
                            program.constants.name(ConstId(j as u32))
                        ));
                    }
                }
            }
        }
        if count > 0 {
            println!(
                "{name} vs {base_name}: {relation} differs at {count} entr{}: {}",
                if count == 1 { "y" } else { "ies" },
                coords.join(", ")
            );
        }
        count
    };

    for (name, model) in &solved[1..] {
        for (&pred, bits) in &base.relations {
            let relation = program.predicates.name(pred);
            total_diffs += describe(name, relation, bits, &model.relations[&pred]);
        }
    }

    let mut participants = solved.len();
    if let Some((edge, head)) = trcl_shape(&program) {
        let closure = warshall_transitive_closure(&base.relations[&edge]);
        let relation = program.predicates.name(head);
        total_diffs += describe("warshall", relation, &base.relations[&head], &closure);
        println!("warshall: ok (closure oracle)");
        participants += 1;
    }

    if total_diffs == 0 && hard_errors == 0 {
        println!("{participants} methods, 0 differing entries");
        Ok(())
    } else if total_diffs == 0 {
        Err(CliError::Failed(format!(
            "{hard_errors} method(s) failed outright (0 differing entries among successes)"
        )))
    } else {
        Err(CliError::Failed(format!("{total_diffs} differing entries")))
    }
}
