//! Acceptance gate: seven end-to-end criteria, each reported as a single
//! pass/fail line with its tolerance and runtime budget pinned below.
//!
//! Run `cargo test --test acceptance -- --nocapture --test-threads=1` to
//! watch the lines print in order. The criteria serialize on a shared
//! lock regardless of the harness thread count, so the timed criteria
//! never race each other for the machine.

use matlog::analysis::{layer_program, LayerClass};
use matlog::compile::{compile_layer, EquationSystem};
use matlog::data::{load_edge_list, random_adjacency, GraphSpec};
use matlog::front::{parse_program, FactFormat, Program};
use matlog::matrix::{threshold_positive, BitMatrix, RealMatrix};
use matlog::solve::{
    boolean_iterates, evaluate_program, scaled_iterates, solve_boolean_iteration, solve_system,
    warshall_transitive_closure, Method, SolveOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Per-entry tolerance against the worked example's closed-form solution.
const WORKED_SCALED_TOL: f64 = 1e-3;
/// Agreement tolerance between the fixed-point and Kronecker solutions.
const KRON_AGREE_TOL: f64 = 1e-9;
/// Rounding slack above 1.0 allowed for scaled iterates.
const ITERATE_ONE_SLACK: f64 = 1e-9;
/// The direct closure must be at least this much faster than boolean
/// iteration at the large benchmark size.
const DIRECT_SPEEDUP_MIN: f64 = 1.0;
/// Largest allowed max/min ratio of direct-solve times across densities.
const DENSITY_SPREAD_MAX: f64 = 3.0;

const BUDGET_1: Duration = Duration::from_secs(1);
const BUDGET_2: Duration = Duration::from_secs(30);
const BUDGET_3: Duration = Duration::from_secs(60);
const BUDGET_4: Duration = Duration::from_secs(10);
const BUDGET_5: Duration = Duration::from_secs(30);
const BUDGET_6: Duration = Duration::from_secs(600);
/// Criterion 7 has no pinned budget; this cap only stops a runaway run.
const BUDGET_7: Duration = Duration::from_secs(600);

const TRCL_RULES: &str = "r2(X,Z) :- r1(X,Z).\nr2(X,Z) :- r1(X,Y), r2(Y,Z).\n";
const SGEN_RULES: &str = "r2(X,W) :- diag(X,W).\nr2(X,W) :- r1(X,Y), r2(Y,Z), r1(W,Z).\n";

static GATE: Mutex<()> = Mutex::new(());

fn run_criterion(
    number: u32,
    title: &str,
    budget: Duration,
    body: impl FnOnce() -> Result<String, String>,
) {
    let _guard = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let started = Instant::now();
    let outcome = body();
    let elapsed = started.elapsed();
    let outcome = outcome.and_then(|detail| {
        if elapsed <= budget {
            Ok(detail)
        } else {
            Err(format!(
                "over budget: {:.2}s > {:.0}s ({detail})",
                elapsed.as_secs_f64(),
                budget.as_secs_f64()
            ))
        }
    });
    match outcome {
        Ok(detail) => println!(
            "criterion {number} ({title}): pass — {detail} [{:.2}s of {:.0}s budget]",
            elapsed.as_secs_f64(),
            budget.as_secs_f64()
        ),
        Err(why) => {
            println!("criterion {number} ({title}): FAIL — {why}");
            panic!("criterion {number} ({title}): {why}");
        }
    }
}

fn options_for(method: Method) -> SolveOptions {
    SolveOptions { method, ..SolveOptions::default() }
}

/// Zero-padded node names so lexicographic order equals index order.
fn node_names(n: usize) -> Vec<String> {
    let width = (n.saturating_sub(1)).to_string().len();
    (0..n).map(|i| format!("n{i:0width$}")).collect()
}

fn matrix_pairs(m: &BitMatrix, names: &[String]) -> Vec<(String, String)> {
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

/// A program over `adjacency.n()` nodes: the given rules, `r1` facts from
/// the adjacency matrix, and optionally the built-in diagonal relation.
fn edge_program(rules: &str, adjacency: &BitMatrix, with_diag: bool) -> Program {
    let names = node_names(adjacency.n());
    let mut program = parse_program(rules).expect("fixed rules parse");
    program.ensure_constants(names.iter().cloned()).expect("within constant limit");
    program
        .merge_fact_pairs("r1", &matrix_pairs(adjacency, &names))
        .expect("within constant limit");
    if with_diag {
        program.add_diag_builtin("diag");
    }
    program.recompute_kinds();
    program
}

/// Compiles the last (top) layer against fact matrices for all earlier
/// layers, optionally overriding the scale factor.
fn top_system_with(program: &Program, epsilon_override: Option<f64>) -> (EquationSystem, LayerClass) {
    let layered = layer_program(program).expect("program in fragment");
    let n = program.domain_size();
    let facts = program.fact_set();
    let mut relations = BTreeMap::new();
    for layer in &layered.layers[..layered.layers.len() - 1] {
        for &p in &layer.predicates {
            relations.insert(p, facts.matrix(p, n));
        }
    }
    let top = layered.layers.last().expect("at least one layer");
    let system =
        compile_layer(program, top, &relations, epsilon_override).expect("layer compiles");
    (system, top.class)
}

fn top_system(program: &Program) -> (EquationSystem, LayerClass) {
    top_system_with(program, None)
}

/// A random forest as child->parent edges: every node after the first
/// attaches to an earlier node with probability 0.9, so each row of the
/// adjacency matrix has at most a single one.
fn random_forest(n: usize, seed: u64) -> BitMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = BitMatrix::zeros(n);
    for child in 1..n {
        if rng.random::<f64>() < 0.9 {
            let parent = rng.random_range(0..child);
            m.set(child, parent, true);
        }
    }
    m
}

fn seconds<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

#[test]
fn criterion_1_worked_example() {
    run_criterion(1, "worked example", BUDGET_1, || {
        let program = parse_program(&format!(
            "{TRCL_RULES}r1(e1,e2). r1(e2,e3). r1(e3,e1). r1(e4,e1).\n"
        ))
        .expect("worked example parses");
        let model = evaluate_program(&program, &options_for(Method::Direct))
            .map_err(|e| format!("evaluation failed: {e}"))?;
        let top = model.layers.last().expect("solved layers");
        if top.epsilon != 0.5 {
            return Err(format!("scale factor {} is not exactly 1/2", top.epsilon));
        }
        let r2 = program.predicates.lookup("r2").expect("r2 defined");
        let s = 1.0 / 7.0;
        let expected = RealMatrix::from_rows(&[
            vec![1.0 * s, 4.0 * s, 2.0 * s, 0.0],
            vec![2.0 * s, 1.0 * s, 4.0 * s, 0.0],
            vec![4.0 * s, 2.0 * s, 1.0 * s, 0.0],
            vec![4.0 * s, 2.0 * s, 1.0 * s, 0.0],
        ]);
        let diff = top.scaled[&r2].max_abs_diff(&expected).expect("same dimension");
        if diff > WORKED_SCALED_TOL {
            return Err(format!("scaled solution off by {diff:.3e} (> {WORKED_SCALED_TOL})"));
        }
        let support = BitMatrix::from_rows(&[
            vec![1, 1, 1, 0],
            vec![1, 1, 1, 0],
            vec![1, 1, 1, 0],
            vec![1, 1, 1, 0],
        ]);
        if model.relations[&r2] != support {
            return Err("thresholded support differs from the worked closure".to_string());
        }
        Ok(format!(
            "epsilon exactly 1/2, scaled solution within {WORKED_SCALED_TOL} \
             (max diff {diff:.1e}), support exact"
        ))
    });
}

#[test]
fn criterion_2_oracle_triangle() {
    run_criterion(2, "oracle triangle", BUDGET_2, || {
        let mut instances = 0usize;
        let mut fallbacks = 0usize;
        for &n in &[10usize, 50, 200] {
            for &p_e in &[0.01, 0.05, 0.2] {
                for seed in 0..5u64 {
                    let adj = random_adjacency(&GraphSpec { n, p_e, seed });
                    let program = edge_program(TRCL_RULES, &adj, false);
                    let r1 = program.predicates.lookup("r1").expect("r1 defined");
                    let r2 = program.predicates.lookup("r2").expect("r2 defined");
                    let tag = format!("n={n} p_e={p_e} seed={seed}");

                    let engine = evaluate_program(&program, &options_for(Method::Auto))
                        .map_err(|e| format!("{tag}: auto failed: {e}"))?;
                    let boolean = evaluate_program(&program, &options_for(Method::Boolean))
                        .map_err(|e| format!("{tag}: boolean failed: {e}"))?;
                    let closure = warshall_transitive_closure(&adj);

                    if engine.relations[&r1] != adj {
                        return Err(format!("{tag}: r1 does not round-trip"));
                    }
                    if engine.relations[&r2] != closure {
                        return Err(format!("{tag}: engine closure differs from warshall"));
                    }
                    if boolean.relations[&r2] != closure {
                        return Err(format!("{tag}: boolean closure differs from warshall"));
                    }
                    let top = engine.layers.last().expect("solved layers");
                    if !top.fallbacks.is_empty() {
                        fallbacks += 1;
                    }
                    instances += 1;
                }
            }
        }
        Ok(format!(
            "{instances} instances bit-identical across direct-first engine, boolean, \
             and warshall ({fallbacks} fell back to boolean for sub-threshold entries)"
        ))
    });
}

#[test]
fn criterion_3_same_generation() {
    run_criterion(3, "same generation", BUDGET_3, || {
        let mut instances = 0usize;
        for &n in &[10usize, 50, 200] {
            for seed in 0..5u64 {
                let forest = random_forest(n, seed);
                let program = edge_program(SGEN_RULES, &forest, true);
                let r2 = program.predicates.lookup("r2").expect("r2 defined");
                let tag = format!("n={n} seed={seed}");

                let sylvester = evaluate_program(&program, &options_for(Method::Sylvester))
                    .map_err(|e| format!("{tag}: sylvester failed: {e}"))?;
                let boolean = evaluate_program(&program, &options_for(Method::Boolean))
                    .map_err(|e| format!("{tag}: boolean failed: {e}"))?;
                if sylvester.relations[&r2] != boolean.relations[&r2] {
                    return Err(format!("{tag}: sylvester and boolean supports differ"));
                }
                let top = sylvester.layers.last().expect("solved layers");
                if top.method != "sylvester" {
                    return Err(format!("{tag}: solved by {} instead", top.method));
                }
                instances += 1;
            }
        }

        // Five people: children c1, c2 of a; grandchildren g1 of c1, g2 of
        // c2. Same generation: everyone with themselves, the two children
        // with each other, and the two grandchildren with each other.
        let program = parse_program(&format!(
            "{SGEN_RULES}r1(c1,a). r1(c2,a). r1(g1,c1). r1(g2,c2).\n"
        ))
        .map(|mut p| {
            p.add_diag_builtin("diag");
            p.recompute_kinds();
            p
        })
        .expect("tree program parses");
        let r2 = program.predicates.lookup("r2").expect("r2 defined");
        let model = evaluate_program(&program, &options_for(Method::Sylvester))
            .map_err(|e| format!("five-person tree: {e}"))?;
        // Constants sort as a, c1, c2, g1, g2.
        let mut expected = BitMatrix::identity(5);
        expected.set(1, 2, true);
        expected.set(2, 1, true);
        expected.set(3, 4, true);
        expected.set(4, 3, true);
        if model.relations[&r2] != expected {
            return Err("five-person tree support differs from the hand answer".to_string());
        }
        Ok(format!(
            "{instances} random forests agree bit-exactly with boolean iteration; \
             five-person tree matches the hand-derived relation"
        ))
    });
}

#[test]
fn criterion_4_kronecker_oracle() {
    run_criterion(4, "kronecker oracle", BUDGET_4, || {
        // The sweep cap must outlast slow contractions at these densities;
        // 5000 sweeps is plenty and still far under the budget.
        let sweep_options = SolveOptions {
            method: Method::Sylvester,
            max_iters: Some(5000),
            ..SolveOptions::default()
        };
        let oracle_options = options_for(Method::KronOracle);
        let mut worst = 0.0f64;
        let mut instances = 0usize;
        for &n in &[4usize, 6, 8, 10, 12] {
            for seed in 0..2u64 {
                let names = node_names(n);
                let a = random_adjacency(&GraphSpec { n, p_e: 0.3, seed });
                let b = random_adjacency(&GraphSpec { n, p_e: 0.25, seed: seed + 1000 });
                let c = random_adjacency(&GraphSpec { n, p_e: 0.25, seed: seed + 2000 });
                let mut program = parse_program(
                    "t(X,W) :- a0(X,W).\nt(X,W) :- b0(X,Y), t(Y,Z), c0(Z,W).\n",
                )
                .expect("two-sided rules parse");
                program.ensure_constants(names.iter().cloned()).expect("small domain");
                for (pred, m) in [("a0", &a), ("b0", &b), ("c0", &c)] {
                    program.merge_fact_pairs(pred, &matrix_pairs(m, &names)).expect("small domain");
                }
                program.recompute_kinds();
                let t = program.predicates.lookup("t").expect("t defined");
                let (system, class) = top_system(&program);
                let tag = format!("n={n} seed={seed}");

                let fixed = solve_system(&system, class, &sweep_options)
                    .map_err(|e| format!("{tag}: sweeps failed: {e}"))?;
                let oracle = solve_system(&system, class, &oracle_options)
                    .map_err(|e| format!("{tag}: oracle failed: {e}"))?;
                let diff =
                    fixed.scaled[&t].max_abs_diff(&oracle.scaled[&t]).expect("same dimension");
                if diff > KRON_AGREE_TOL {
                    return Err(format!("{tag}: solutions differ by {diff:.3e}"));
                }
                worst = worst.max(diff);
                instances += 1;
            }
        }
        Ok(format!(
            "{instances} two-sided instances agree within {KRON_AGREE_TOL:.0e} \
             (worst {worst:.1e})"
        ))
    });
}

#[test]
fn criterion_5_scaling_properties() {
    run_criterion(5, "scaling properties", BUDGET_5, || {
        let steps = 20usize;
        let mut programs: Vec<(String, Program)> = Vec::new();
        for seed in 0..4u64 {
            let p_e = 0.05 + 0.05 * seed as f64;
            let adj = random_adjacency(&GraphSpec { n: 20, p_e, seed });
            programs.push((format!("closure p_e={p_e}"), edge_program(TRCL_RULES, &adj, false)));
            let forest = random_forest(20, 100 + seed);
            programs.push((format!("generation seed={seed}"), edge_program(SGEN_RULES, &forest, true)));
        }

        let mut iterate_checks = 0usize;
        for (label, program) in &programs {
            let (system, class) = top_system(program);
            let scaled = scaled_iterates(&system, steps);
            let boolean = boolean_iterates(&system, steps);
            for k in 0..=steps {
                for (head, mat) in &scaled[k] {
                    // The correspondence concerns strict positivity, so the
                    // support here is thresholded at zero; tau only enters
                    // when a final model is extracted.
                    if threshold_positive(mat, 0.0) != boolean[k][head] {
                        return Err(format!("{label}: iterate {k} support mismatch"));
                    }
                    let peak = mat.max_entry();
                    if peak > 1.0 + ITERATE_ONE_SLACK {
                        return Err(format!("{label}: iterate {k} reaches {peak}"));
                    }
                    if k > 0 {
                        let prev = &scaled[k - 1][head];
                        for i in 0..system.n {
                            for j in 0..system.n {
                                if prev.get(i, j) > mat.get(i, j) {
                                    return Err(format!(
                                        "{label}: iterate {k} shrinks at ({i},{j})"
                                    ));
                                }
                            }
                        }
                    }
                    iterate_checks += 1;
                }
            }

            // Halving the scale factor must leave thresholded supports
            // unchanged (and both must equal the boolean fixpoint).
            let sweep_options = SolveOptions {
                method: Method::Scaled,
                max_iters: Some(2000),
                ..SolveOptions::default()
            };
            let base = solve_system(&system, class, &sweep_options)
                .map_err(|e| format!("{label}: scaled solve failed: {e}"))?;
            let (halved_system, _) = top_system_with(program, Some(system.epsilon / 2.0));
            let halved = solve_system(&halved_system, class, &sweep_options)
                .map_err(|e| format!("{label}: halved solve failed: {e}"))?;
            if base.support != halved.support {
                return Err(format!("{label}: halving the scale factor changed the support"));
            }
            let oracle = solve_boolean_iteration(&system)
                .map_err(|e| format!("{label}: boolean oracle failed: {e}"))?;
            for (head, support) in &base.support {
                if support != &oracle[head] {
                    return Err(format!("{label}: support differs from the boolean fixpoint"));
                }
            }
        }
        Ok(format!(
            "{iterate_checks} iterate checks: supports match boolean iterates, \
             growth is monotone, entries stay below one, halving preserves supports"
        ))
    });
}

#[test]
fn criterion_6_performance_direction() {
    run_criterion(6, "performance direction", BUDGET_6, || {
        // Direct closure vs boolean iteration at the large size. Timing
        // covers the solve phase only; both calls share one compile.
        let mut speedups = Vec::new();
        for &p_e in &[0.01, 0.1] {
            let adj = random_adjacency(&GraphSpec { n: 2000, p_e, seed: 0 });
            let program = edge_program(TRCL_RULES, &adj, false);
            let (system, class) = top_system(&program);
            let (direct, direct_s) =
                seconds(|| solve_system(&system, class, &options_for(Method::Direct)));
            let direct = direct.map_err(|e| format!("p_e={p_e}: direct failed: {e}"))?;
            let (boolean, boolean_s) =
                seconds(|| solve_system(&system, class, &options_for(Method::Boolean)));
            let boolean = boolean.map_err(|e| format!("p_e={p_e}: boolean failed: {e}"))?;
            if direct.support != boolean.support {
                return Err(format!("p_e={p_e}: methods disagree on the closure"));
            }
            let speedup = boolean_s / direct_s;
            if speedup < DIRECT_SPEEDUP_MIN {
                return Err(format!(
                    "p_e={p_e}: direct {direct_s:.2}s is not faster than boolean \
                     {boolean_s:.2}s (speedup {speedup:.2})"
                ));
            }
            speedups.push(format!("p_e={p_e}: {speedup:.1}x"));
        }

        // Density invariance of the direct solve at n=1000: best of two
        // runs per density to damp scheduler noise.
        let mut times = Vec::new();
        for &p_e in &[0.001, 0.01, 0.1] {
            let adj = random_adjacency(&GraphSpec { n: 1000, p_e, seed: 0 });
            let program = edge_program(TRCL_RULES, &adj, false);
            let (system, class) = top_system(&program);
            let mut best = f64::INFINITY;
            for _ in 0..2 {
                let (out, secs) =
                    seconds(|| solve_system(&system, class, &options_for(Method::Direct)));
                out.map_err(|e| format!("p_e={p_e}: direct failed: {e}"))?;
                best = best.min(secs);
            }
            times.push(best);
        }
        let slowest = times.iter().cloned().fold(0.0, f64::max);
        let fastest = times.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = slowest / fastest;
        if spread >= DENSITY_SPREAD_MAX {
            return Err(format!(
                "direct-solve times vary {spread:.2}x across densities at n=1000 \
                 (times {times:?})"
            ));
        }
        Ok(format!(
            "n=2000 speedups [{}]; n=1000 direct times spread {spread:.2}x \
             across three densities",
            speedups.join(", ")
        ))
    });
}

#[test]
fn criterion_7_dataset_shape() {
    let Some(path) = std::env::var_os("MATLOG_KONECT_FILE") else {
        println!(
            "criterion 7 (dataset shape): skip — set MATLOG_KONECT_FILE to a \
             KONECT edge list to run"
        );
        return;
    };
    let path = Path::new(&path).to_path_buf();
    run_criterion(7, "dataset shape", BUDGET_7, || {
        let loaded = load_edge_list(&path, FactFormat::Konect, "r1")
            .map_err(|e| format!("load failed: {e}"))?;
        let n = loaded.nodes();
        let edges = loaded.edges;
        let looks_like_moreno = path
            .file_name()
            .map(|f| f.to_string_lossy().to_lowercase().contains("moreno"))
            .unwrap_or(false);
        if looks_like_moreno && (n != 1224 || edges != 19025) {
            return Err(format!(
                "moreno-blogs shape mismatch: n={n} edges={edges} \
                 (expected n=1224 edges=19025)"
            ));
        }

        let program = edge_program(TRCL_RULES, &loaded.matrix, false);
        let (system, class) = top_system(&program);
        let (direct, matrix_s) =
            seconds(|| solve_system(&system, class, &options_for(Method::Direct)));
        let direct = direct.map_err(|e| format!("direct failed: {e}"))?;
        let (boolean, iteration_s) =
            seconds(|| solve_system(&system, class, &options_for(Method::Boolean)));
        let boolean = boolean.map_err(|e| format!("boolean failed: {e}"))?;
        let r2 = program.predicates.lookup("r2").expect("r2 defined");
        if direct.support[&r2] != boolean.support[&r2] {
            return Err("matrix and iteration closures differ".to_string());
        }
        let closure = direct.support[&r2].count_ones();
        Ok(format!(
            "n={n} r1={edges} trcl={closure} matrix={matrix_s:.3}s \
             iteration={iteration_s:.3}s (duplicates collapsed: {})",
            loaded.duplicates
        ))
    });
}
