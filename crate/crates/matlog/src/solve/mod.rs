//! Solver strategies for layer equation systems, and the whole-program
//! evaluator that runs them bottom-up.
//!
//! Five interchangeable strategies solve one layer's system:
//!
//! * `boolean` — saturating 0/1 sweeps; the reference semantics.
//! * `scaled` — sweeps of the scale-factor equation; same support.
//! * `direct` — one linear solve for trailing-recursion systems.
//! * `sylvester` — rewrites transposed unknowns away, then sweeps the
//!   two-sided equations jointly.
//! * `kron_oracle` — Kronecker/vectorized direct solve; exact but
//!   dimension-capped, kept as an independent check.
//!
//! `auto` picks per layer class (direct for trailing recursion,
//! rewrite + sylvester for the rest, boolean for non-recursive layers)
//! and falls back down the ladder on failure, logging each step. Any
//! non-boolean result is cross-checked with one boolean sweep: a
//! strict-subset support cannot be a fixpoint, so one sweep catches
//! entries lost under the support threshold (deep chains scale like
//! `epsilon^depth` and can sink below `tau`); on disagreement the layer
//! is re-solved with boolean iteration.

mod boolean;
mod direct;
mod rewrite;
mod scaled;
mod sweep;
mod sylvester;
mod warshall;

pub use boolean::{boolean_iterates, solve_boolean_iteration};
pub use direct::solve_tail_recursive_direct;
pub use rewrite::rewrite_transposed;
pub use scaled::{scaled_iterates, solve_scaled_iteration};
pub use sylvester::{solve_sylvester, solve_sylvester_kron_oracle};
pub use warshall::warshall_transitive_closure;

use crate::analysis::{layer_program, LayerClass, NotInFragment};
use crate::compile::{compile_layer, CompileError, EquationSystem};
use crate::front::{PredId, Program};
use crate::matrix::{threshold_positive, BitMatrix, MatrixError, RealMatrix};
use std::collections::BTreeMap;
use std::fmt;

/// Which solver to use; `Auto` selects per layer with fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Auto,
    Boolean,
    Scaled,
    Direct,
    Sylvester,
    KronOracle,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Boolean => "boolean",
            Method::Scaled => "scaled",
            Method::Direct => "direct",
            Method::Sylvester => "sylvester",
            Method::KronOracle => "kron_oracle",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Some(match name {
            "auto" => Method::Auto,
            "boolean" => Method::Boolean,
            "scaled" => Method::Scaled,
            "direct" => Method::Direct,
            "sylvester" => Method::Sylvester,
            "kron_oracle" => Method::KronOracle,
            _ => return None,
        })
    }

    pub fn all_names() -> &'static [&'static str] {
        &["auto", "boolean", "scaled", "direct", "sylvester", "kron_oracle"]
    }
}

/// Tunables shared by all strategies.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub method: Method,
    /// Support threshold: entries strictly above it count as present.
    pub tau: f64,
    /// Relative entrywise-change target for iterative strategies.
    pub residual_tol: f64,
    /// Sweep cap; `None` uses `n * equations + 1` for boolean and
    /// `10 * n` for the scaled/sylvester sweeps.
    pub max_iters: Option<usize>,
    /// Replaces each layer's computed scale factor (checked against the
    /// admissible ceiling at compile time).
    pub epsilon_override: Option<f64>,
    /// Largest dimension the Kronecker oracle accepts.
    pub kron_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Auto,
            tau: 1e-12,
            residual_tol: 1e-12,
            max_iters: None,
            epsilon_override: None,
            kron_cap: 16,
        }
    }
}

impl SolveOptions {
    pub(crate) fn boolean_cap(&self, n: usize, equations: usize) -> usize {
        self.max_iters.unwrap_or(n * equations + 1)
    }

    pub(crate) fn sweep_cap(&self, n: usize) -> usize {
        // The relative stopping rule needs ~41 sweeps at contraction 1/2
        // no matter the dimension, so the 10·n default gets a floor.
        self.max_iters.unwrap_or(10 * n.max(6))
    }
}

/// A strategy's raw answer for one system: the scaled matrix per
/// equation, in equation order (including any rewrite companions).
#[derive(Debug, Clone)]
pub struct RawSolution {
    pub scaled: Vec<RealMatrix>,
    pub iterations: usize,
    /// Last sweep's largest entrywise change; `None` for direct solves.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// The strategy does not apply to this system's shape.
    Unsupported { method: &'static str, shape: LayerClass, detail: String },
    /// A linear solve hit a singular matrix (scale factor too large).
    Singular { source: MatrixError },
    /// The sweep cap was reached before the stopping rule held.
    NoConvergence { method: &'static str, sweeps: usize, residual: f64 },
    /// The fixed-point contraction precondition failed.
    NotContracting { method: &'static str, margin: f64 },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Unsupported { method, shape, detail } => {
                write!(f, "method '{method}' does not handle a {shape} system ({detail})")
            }
            SolveError::Singular { source } => {
                write!(f, "linear solve failed: {source}")
            }
            SolveError::NoConvergence { method, sweeps, residual } => {
                write!(
                    f,
                    "method '{method}' did not converge in {sweeps} sweeps \
                     (last change {residual:.3e})"
                )
            }
            SolveError::NotContracting { method, margin } => {
                write!(
                    f,
                    "method '{method}' requires a contraction; term norms sum to {margin}"
                )
            }
        }
    }
}

impl std::error::Error for SolveError {}

/// One layer's solved state plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSolution {
    pub predicates: Vec<PredId>,
    pub class: LayerClass,
    pub epsilon: f64,
    pub method: &'static str,
    pub iterations: usize,
    pub residual: Option<f64>,
    /// Human-readable notes for every abandoned attempt, in order.
    pub fallbacks: Vec<String>,
    pub scaled: BTreeMap<PredId, RealMatrix>,
    pub support: BTreeMap<PredId, BitMatrix>,
}

/// The least model: one 0/1 relation matrix per predicate, plus the
/// per-layer provenance that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub relations: BTreeMap<PredId, BitMatrix>,
    pub layers: Vec<LayerSolution>,
}

impl Model {
    pub fn render(&self, program: &Program) -> String {
        crate::front::render_model(&self.relations, program)
    }

    /// Per-layer provenance: method, iterations, scale factor, residual,
    /// fallbacks. One line per layer.
    pub fn provenance_report(&self, program: &Program) -> String {
        let mut out = String::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let names: Vec<&str> =
                layer.predicates.iter().map(|&p| program.predicates.name(p)).collect();
            let residual = match layer.residual {
                Some(r) => format!("{r:.3e}"),
                None => "-".to_string(),
            };
            out.push_str(&format!(
                "layer {} [{}] class={} method={} iterations={} epsilon={:.6} residual={}\n",
                i,
                names.join(","),
                layer.class,
                layer.method,
                layer.iterations,
                layer.epsilon,
                residual,
            ));
            for note in &layer.fallbacks {
                out.push_str(&format!("  fallback: {note}\n"));
            }
        }
        out
    }
}

/// A solver algorithm usable through the common registry.
pub trait SolverStrategy {
    fn name(&self) -> &'static str;
    /// Whether this strategy can solve the given system at all.
    fn handles(&self, system: &EquationSystem, options: &SolveOptions) -> bool;
    fn solve(
        &self,
        system: &EquationSystem,
        options: &SolveOptions,
    ) -> Result<RawSolution, SolveError>;
}

struct BooleanStrategy;
struct ScaledStrategy;
struct DirectStrategy;
struct SylvesterStrategy;
struct KronOracleStrategy;

impl SolverStrategy for BooleanStrategy {
    fn name(&self) -> &'static str {
        "boolean"
    }
    fn handles(&self, _: &EquationSystem, _: &SolveOptions) -> bool {
        true
    }
    fn solve(
        &self,
        system: &EquationSystem,
        options: &SolveOptions,
    ) -> Result<RawSolution, SolveError> {
        boolean::solve_raw(system, options)
    }
}

impl SolverStrategy for ScaledStrategy {
    fn name(&self) -> &'static str {
        "scaled"
    }
    fn handles(&self, _: &EquationSystem, _: &SolveOptions) -> bool {
        true
    }
    fn solve(
        &self,
        system: &EquationSystem,
        options: &SolveOptions,
    ) -> Result<RawSolution, SolveError> {
        solve_scaled_iteration(system, options)
    }
}

impl SolverStrategy for DirectStrategy {
    fn name(&self) -> &'static str {
        "direct"
    }
    fn handles(&self, system: &EquationSystem, _: &SolveOptions) -> bool {
        system.shape() <= LayerClass::TailRecursive
    }
    fn solve(
        &self,
        system: &EquationSystem,
        options: &SolveOptions,
    ) -> Result<RawSolution, SolveError> {
        solve_tail_recursive_direct(system, options)
    }
}

impl SolverStrategy for SylvesterStrategy {
    fn name(&self) -> &'static str {
        "sylvester"
    }
    fn handles(&self, _: &EquationSystem, _: &SolveOptions) -> bool {
        true
    }
    fn solve(
        &self,
        system: &EquationSystem,
        options: &SolveOptions,
    ) -> Result<RawSolution, SolveError> {
        solve_sylvester(system, options)
    }
}

impl SolverStrategy for KronOracleStrategy {
    fn name(&self) -> &'static str {
        "kron_oracle"
    }
    fn handles(&self, system: &EquationSystem, options: &SolveOptions) -> bool {
        system.n <= options.kron_cap
            && system.equations.len() == 1
            && system.equations[0].terms.len() <= 1
            && system.equations[0].terms.iter().all(|t| !t.core.transposed)
    }
    fn solve(
        &self,
        system: &EquationSystem,
        options: &SolveOptions,
    ) -> Result<RawSolution, SolveError> {
        sylvester::solve_kron_raw(system, options)
    }
}

/// All strategies, in the fallback-ladder order used by `auto`.
pub fn registry() -> Vec<Box<dyn SolverStrategy>> {
    vec![
        Box::new(DirectStrategy),
        Box::new(SylvesterStrategy),
        Box::new(ScaledStrategy),
        Box::new(BooleanStrategy),
        Box::new(KronOracleStrategy),
    ]
}

/// The strategy implementing one explicit (non-auto) method.
pub fn strategy_for(method: Method) -> Option<Box<dyn SolverStrategy>> {
    Some(match method {
        Method::Auto => return None,
        Method::Boolean => Box::new(BooleanStrategy),
        Method::Scaled => Box::new(ScaledStrategy),
        Method::Direct => Box::new(DirectStrategy),
        Method::Sylvester => Box::new(SylvesterStrategy),
        Method::KronOracle => Box::new(KronOracleStrategy),
    })
}

#[derive(Debug)]
pub enum EvalError {
    /// The program failed validation.
    Invalid(NotInFragment),
    /// A layer failed to compile against its lower layers.
    Compile { layer: usize, heads: String, source: CompileError },
    /// Every attempted strategy failed on a layer.
    Solve { layer: usize, heads: String, source: SolveError },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Invalid(e) => write!(f, "{e}"),
            EvalError::Compile { layer, heads, source } => {
                write!(f, "layer {layer} [{heads}]: {source}")
            }
            EvalError::Solve { layer, heads, source } => {
                write!(f, "layer {layer} [{heads}]: {source}")
            }
        }
    }
}

impl std::error::Error for EvalError {}

/// The `auto` ladder for one layer class, strongest method first.
fn auto_ladder(class: LayerClass) -> Vec<Method> {
    match class {
        LayerClass::NonRecursive => vec![Method::Boolean],
        LayerClass::TailRecursive => vec![Method::Direct, Method::Scaled, Method::Boolean],
        LayerClass::Transposed | LayerClass::TwoSided => {
            vec![Method::Sylvester, Method::Scaled, Method::Boolean]
        }
    }
}

/// Assembles the per-predicate maps from a raw answer, dropping any
/// rewrite companions (their heads map through `base_of`).
fn finish_layer(
    system: &EquationSystem,
    raw: RawSolution,
    method: &'static str,
    class: LayerClass,
    fallbacks: Vec<String>,
    tau: f64,
) -> LayerSolution {
    let mut scaled = BTreeMap::new();
    let mut support = BTreeMap::new();
    let mut predicates = Vec::new();
    for (eq, mat) in system.equations.iter().zip(raw.scaled) {
        if system.base_of.contains_key(&eq.head) {
            continue;
        }
        support.insert(eq.head, threshold_positive(&mat, tau));
        scaled.insert(eq.head, mat);
        predicates.push(eq.head);
    }
    LayerSolution {
        predicates,
        class,
        epsilon: system.epsilon,
        method,
        iterations: raw.iterations,
        residual: raw.residual,
        fallbacks,
        scaled,
        support,
    }
}

/// One boolean sweep applied to a candidate support; equality means the
/// candidate is a fixpoint, and the least fixpoint is the only fixpoint
/// a subset of it could be, so agreement certifies the support.
fn support_is_fixpoint(system: &EquationSystem, solution: &LayerSolution) -> bool {
    let state = sweep::SweepState::from_supports(system, |p| {
        solution.support.get(&p).map(BitMatrix::to_real)
    });
    for eq in &system.equations {
        if system.base_of.contains_key(&eq.head) {
            continue;
        }
        let counts = sweep::rhs_counts(eq, &state);
        let next = threshold_positive(&counts, 0.0);
        if &next != solution.support.get(&eq.head).expect("solved head") {
            return false;
        }
    }
    true
}

/// Solves one compiled system with an explicit method (no fallback).
pub fn solve_system(
    system: &EquationSystem,
    class: LayerClass,
    options: &SolveOptions,
) -> Result<LayerSolution, SolveError> {
    match options.method {
        Method::Auto => solve_system_auto(system, class, options),
        explicit => {
            let strategy = strategy_for(explicit).expect("non-auto method");
            if !strategy.handles(system, options) {
                return Err(SolveError::Unsupported {
                    method: strategy.name(),
                    shape: system.shape(),
                    detail: "select a different --method or use auto".to_string(),
                });
            }
            let raw = strategy.solve(system, options)?;
            Ok(finish_layer(system, raw, strategy.name(), class, Vec::new(), options.tau))
        }
    }
}

/// The `auto` policy: walk the ladder for the class, cross-check any
/// non-boolean answer with one boolean sweep, and fall back to boolean
/// iteration if the check fails.
fn solve_system_auto(
    system: &EquationSystem,
    class: LayerClass,
    options: &SolveOptions,
) -> Result<LayerSolution, SolveError> {
    let mut fallbacks = Vec::new();
    let mut last_err = None;
    for method in auto_ladder(class) {
        let strategy = strategy_for(method).expect("ladder has no auto");
        if !strategy.handles(system, options) {
            continue;
        }
        match strategy.solve(system, options) {
            Err(e) => {
                fallbacks.push(format!("{}: {e}", strategy.name()));
                last_err = Some(e);
            }
            Ok(raw) => {
                let solution = finish_layer(
                    system,
                    raw,
                    strategy.name(),
                    class,
                    std::mem::take(&mut fallbacks),
                    options.tau,
                );
                if method == Method::Boolean || support_is_fixpoint(system, &solution) {
                    return Ok(solution);
                }
                // Thresholding lost entries (or worse); boolean sweeps
                // recover the exact support.
                let mut fb = solution.fallbacks;
                fb.push(format!(
                    "{}: support failed the one-sweep fixpoint check; \
                     re-solving with boolean iteration",
                    strategy.name()
                ));
                let raw = boolean::solve_raw(system, options)?;
                return Ok(finish_layer(system, raw, "boolean", class, fb, options.tau));
            }
        }
    }
    Err(last_err.unwrap_or(SolveError::Unsupported {
        method: "auto",
        shape: system.shape(),
        detail: "no applicable strategy".to_string(),
    }))
}

/// Evaluates a whole program bottom-up: validate, layer, compile each
/// layer against the supports of earlier ones, and solve. The model
/// holds every predicate's relation over the full constant domain.
pub fn evaluate_program(program: &Program, options: &SolveOptions) -> Result<Model, EvalError> {
    let layered = layer_program(program).map_err(EvalError::Invalid)?;
    let mut relations: BTreeMap<PredId, BitMatrix> = BTreeMap::new();
    let mut layers = Vec::with_capacity(layered.layers.len());
    for (idx, layer) in layered.layers.iter().enumerate() {
        let heads = || {
            layer
                .predicates
                .iter()
                .map(|&p| program.predicates.name(p))
                .collect::<Vec<_>>()
                .join(",")
        };
        let system = compile_layer(program, layer, &relations, options.epsilon_override)
            .map_err(|source| EvalError::Compile { layer: idx, heads: heads(), source })?;
        let solution = solve_system(&system, layer.class, options)
            .map_err(|source| EvalError::Solve { layer: idx, heads: heads(), source })?;
        for (&p, support) in &solution.support {
            relations.insert(p, support.clone());
        }
        layers.push(solution);
    }
    Ok(Model { relations, layers })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub const TRCL_RULES: &str = "r2(X,Z) :- r1(X,Z).\nr2(X,Z) :- r1(X,Y), r2(Y,Z).\n";
    pub const WORKED_FACTS: &str = "r1(e1,e2). r1(e2,e3). r1(e3,e1). r1(e4,e1).\n";

    /// The worked 4-constant example: facts plus the closure rules.
    pub fn worked_program() -> Program {
        crate::front::parse_program(&format!("{TRCL_RULES}{WORKED_FACTS}")).unwrap()
    }

    /// Exact closed-form solution of the worked example's equation
    /// (scale factor 1/2): rows of sevenths.
    pub fn worked_scaled() -> RealMatrix {
        let s = 1.0 / 7.0;
        RealMatrix::from_rows(&[
            vec![1.0 * s, 4.0 * s, 2.0 * s, 0.0],
            vec![2.0 * s, 1.0 * s, 4.0 * s, 0.0],
            vec![4.0 * s, 2.0 * s, 1.0 * s, 0.0],
            vec![4.0 * s, 2.0 * s, 1.0 * s, 0.0],
        ])
    }

    pub fn worked_support() -> BitMatrix {
        BitMatrix::from_rows(&[
            vec![1, 1, 1, 0],
            vec![1, 1, 1, 0],
            vec![1, 1, 1, 0],
            vec![1, 1, 1, 0],
        ])
    }

    /// Compiles the top (recursive) layer of a two-layer program whose
    /// lower layers are facts.
    pub fn top_system(program: &Program) -> (EquationSystem, LayerClass) {
        let layered = layer_program(program).unwrap();
        let n = program.domain_size();
        let facts = program.fact_set();
        let mut relations = BTreeMap::new();
        for layer in &layered.layers[..layered.layers.len() - 1] {
            for &p in &layer.predicates {
                relations.insert(p, facts.matrix(p, n));
            }
        }
        let top = layered.layers.last().unwrap();
        let system = compile_layer(program, top, &relations, None).unwrap();
        (system, top.class)
    }
}
