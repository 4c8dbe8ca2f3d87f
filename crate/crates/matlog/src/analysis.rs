//! Program analysis: predicate dependencies, strongly connected
//! components, stratification into layers, validation of the supported
//! fragment, and per-layer classification.
//!
//! The engine handles programs where every predicate is binary and every
//! rule body is a variable chain: atom `i` joins variables `x(i-1)` and
//! `x(i)` (in either argument order), all chain variables are distinct,
//! and the head relates the chain's two endpoints. At most one body atom
//! per rule may come from the head's own component (linear recursion).
//! Under those rules each component becomes one matrix equation whose
//! shape — and therefore cheapest solver — is decided here.

use crate::front::{Clause, PredId, Program, Term};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// Predicate dependency graph: an edge `head -> body` for every rule and
/// body atom. Facts contribute nodes only.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    /// Every predicate, in table order.
    pub nodes: Vec<PredId>,
    /// Outgoing edges per predicate (deduplicated, ascending).
    pub edges: BTreeMap<PredId, BTreeSet<PredId>>,
}

pub fn dependency_graph(program: &Program) -> DependencyGraph {
    let nodes: Vec<PredId> = program.predicates.ids().collect();
    let mut edges: BTreeMap<PredId, BTreeSet<PredId>> =
        nodes.iter().map(|&p| (p, BTreeSet::new())).collect();
    for clause in &program.clauses {
        for atom in &clause.body {
            edges.get_mut(&clause.head.predicate).expect("head registered").insert(atom.predicate);
        }
    }
    DependencyGraph { nodes, edges }
}

/// Strongly connected components of the dependency graph. Components are
/// emitted dependencies-first (a component appears after everything it
/// reaches), members sorted by predicate name; roots are visited in name
/// order so the output is reproducible.
pub fn tarjan_scc(program: &Program, graph: &DependencyGraph) -> Vec<Vec<PredId>> {
    struct State<'a> {
        graph: &'a DependencyGraph,
        index: HashMap<PredId, usize>,
        lowlink: HashMap<PredId, usize>,
        on_stack: BTreeSet<PredId>,
        stack: Vec<PredId>,
        next_index: usize,
        sccs: Vec<Vec<PredId>>,
    }

    fn strongconnect(state: &mut State, v: PredId) {
        state.index.insert(v, state.next_index);
        state.lowlink.insert(v, state.next_index);
        state.next_index += 1;
        state.stack.push(v);
        state.on_stack.insert(v);
        if let Some(succs) = state.graph.edges.get(&v) {
            for &w in succs.clone().iter() {
                if !state.index.contains_key(&w) {
                    strongconnect(state, w);
                    let low = state.lowlink[&w].min(state.lowlink[&v]);
                    state.lowlink.insert(v, low);
                } else if state.on_stack.contains(&w) {
                    let low = state.index[&w].min(state.lowlink[&v]);
                    state.lowlink.insert(v, low);
                }
            }
        }
        if state.lowlink[&v] == state.index[&v] {
            let mut scc = Vec::new();
            while let Some(w) = state.stack.pop() {
                state.on_stack.remove(&w);
                scc.push(w);
                if w == v {
                    break;
                }
            }
            state.sccs.push(scc);
        }
    }

    let mut state = State {
        graph,
        index: HashMap::new(),
        lowlink: HashMap::new(),
        on_stack: BTreeSet::new(),
        stack: Vec::new(),
        next_index: 0,
        sccs: Vec::new(),
    };
    for root in program.predicates.ids_by_name() {
        if !state.index.contains_key(&root) {
            strongconnect(&mut state, root);
        }
    }
    for scc in &mut state.sccs {
        scc.sort_by(|a, b| program.predicates.name(*a).cmp(program.predicates.name(*b)));
    }
    state.sccs
}

/// Solver class of a layer, ordered from cheapest to most general. A
/// layer's class is the strongest demand any of its clauses makes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LayerClass {
    /// No clause mentions the layer's own predicates in its body.
    NonRecursive,
    /// Every recursive atom is last in its chain and head-oriented:
    /// solvable by one linear solve.
    TailRecursive,
    /// Every recursive atom is last but reversed: solvable after rewriting
    /// with companion transposed unknowns.
    Transposed,
    /// A recursive atom has context on both sides: a discrete
    /// Sylvester-shaped equation.
    TwoSided,
}

impl fmt::Display for LayerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LayerClass::NonRecursive => "nonrecursive",
            LayerClass::TailRecursive => "tail_recursive",
            LayerClass::Transposed => "transposed",
            LayerClass::TwoSided => "two_sided",
        };
        f.write_str(s)
    }
}

/// One stratum: a strongly connected component plus the clauses whose
/// heads define it.
#[derive(Debug, Clone)]
pub struct Layer {
    /// Component members, sorted by predicate name.
    pub predicates: Vec<PredId>,
    /// Indices into `program.clauses` of clauses with heads in this layer.
    pub clauses: Vec<usize>,
    pub class: LayerClass,
}

/// The program split into layers, ascending: every body predicate of a
/// layer resolves in the same or an earlier layer.
#[derive(Debug, Clone)]
pub struct LayeredProgram {
    pub layers: Vec<Layer>,
}

impl LayeredProgram {
    /// Index of the layer defining each predicate.
    pub fn layer_of(&self) -> BTreeMap<PredId, usize> {
        let mut map = BTreeMap::new();
        for (i, layer) in self.layers.iter().enumerate() {
            for &p in &layer.predicates {
                map.insert(p, i);
            }
        }
        map
    }
}

/// A clause outside the supported fragment, with the reason.
#[derive(Debug, Clone)]
pub struct Violation {
    pub clause_index: usize,
    pub clause: String,
    pub reason: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// A rule (non-unit clause) mentions a constant.
    ConstantInRule { constant: String },
    /// The head of a rule must relate two distinct variables.
    HeadNotTwoDistinctVars,
    /// Body atoms do not form a variable chain between the head's
    /// endpoints in the written order.
    NotAChain,
    /// A chain variable occurs more than once.
    RepeatedVariable { variable: String },
    /// More than one body atom from the head's own component.
    NonLinear { recursive_atoms: usize },
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::ConstantInRule { constant } => {
                write!(f, "rule mentions constant '{constant}'")
            }
            ViolationKind::HeadNotTwoDistinctVars => {
                write!(f, "rule head must relate two distinct variables")
            }
            ViolationKind::NotAChain => {
                write!(f, "body atoms do not chain the head's variables")
            }
            ViolationKind::RepeatedVariable { variable } => {
                write!(f, "chain variable '{variable}' repeats")
            }
            ViolationKind::NonLinear { recursive_atoms } => {
                write!(f, "{recursive_atoms} body atoms from the head's own component (max 1)")
            }
        }
    }
}

/// Result of validating a program against the supported fragment.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Accepted-but-noteworthy constructs (e.g. recursive copy rules).
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Layering was attempted on a program that failed validation.
#[derive(Debug, Clone)]
pub struct NotInFragment {
    pub report: ValidationReport,
}

impl fmt::Display for NotInFragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "program is outside the supported fragment ({} violations)", self.report.violations.len())
    }
}

impl std::error::Error for NotInFragment {}

/// One body atom in chain order after normalization: its index in the
/// clause body and whether its arguments run against the chain direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainAtom {
    pub body_index: usize,
    pub transposed: bool,
}

/// Normalizes a clause so its body chains from the head's first argument
/// to its second. A body written against the head (`h(z,x) :- ...chain
/// from x to z...`) is reversed atom-by-atom with orientations flipped,
/// which denotes the same relation. Facts normalize to the empty chain.
pub fn normalize_clause(clause: &Clause) -> Result<Vec<ChainAtom>, ViolationKind> {
    if clause.is_fact() {
        return Ok(Vec::new());
    }
    for atom in std::iter::once(&clause.head).chain(clause.body.iter()) {
        for arg in &atom.args {
            if let Term::Const(_) = arg {
                // Rendering needs the table; the caller fills the name in.
                return Err(ViolationKind::ConstantInRule { constant: String::new() });
            }
        }
    }
    let h0 = clause.head.args[0].as_var().expect("checked above");
    let h1 = clause.head.args[1].as_var().expect("checked above");
    if h0 == h1 {
        return Err(ViolationKind::HeadNotTwoDistinctVars);
    }

    let forward = walk(clause, h0, h1, false);
    match forward {
        Ok(seq) => Ok(seq),
        Err(first_err) => match walk(clause, h1, h0, true) {
            Ok(seq) => Ok(seq),
            Err(_) => Err(first_err),
        },
    }
}

/// Walks the body in written order starting from `start`; succeeds if the
/// walk consumes every atom, visits distinct variables, and ends at `end`.
/// With `reverse` the resulting chain is flipped into head order.
fn walk(
    clause: &Clause,
    start: &str,
    end: &str,
    reverse: bool,
) -> Result<Vec<ChainAtom>, ViolationKind> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    seen.insert(start);
    let mut cur = start;
    let mut seq = Vec::with_capacity(clause.body.len());
    for (i, atom) in clause.body.iter().enumerate() {
        let a0 = atom.args[0].as_var().expect("constants rejected earlier");
        let a1 = atom.args[1].as_var().expect("constants rejected earlier");
        let (next, transposed) = if a0 == cur {
            (a1, false)
        } else if a1 == cur {
            (a0, true)
        } else {
            return Err(ViolationKind::NotAChain);
        };
        if !seen.insert(next) {
            return Err(ViolationKind::RepeatedVariable { variable: next.to_string() });
        }
        seq.push(ChainAtom { body_index: i, transposed });
        cur = next;
    }
    if cur != end {
        return Err(ViolationKind::NotAChain);
    }
    if reverse {
        seq.reverse();
        for atom in &mut seq {
            atom.transposed = !atom.transposed;
        }
    }
    Ok(seq)
}

/// Validates the whole program against the fragment; every offending
/// clause is listed with its first violated condition.
pub fn validate_clin(program: &Program) -> ValidationReport {
    let graph = dependency_graph(program);
    let sccs = tarjan_scc(program, &graph);
    let scc_of: BTreeMap<PredId, usize> = sccs
        .iter()
        .enumerate()
        .flat_map(|(i, scc)| scc.iter().map(move |&p| (p, i)))
        .collect();

    let mut report = ValidationReport::default();
    for (idx, clause) in program.clauses.iter().enumerate() {
        let reason = match normalize_clause(clause) {
            Err(ViolationKind::ConstantInRule { .. }) => {
                let constant = std::iter::once(&clause.head)
                    .chain(clause.body.iter())
                    .flat_map(|a| a.args.iter())
                    .find_map(|t| match t {
                        Term::Const(c) => Some(program.constants.name(*c).to_string()),
                        Term::Var(_) => None,
                    })
                    .unwrap_or_default();
                Some(ViolationKind::ConstantInRule { constant })
            }
            Err(other) => Some(other),
            Ok(chain) => {
                let head_scc = scc_of[&clause.head.predicate];
                let recursive = clause
                    .body
                    .iter()
                    .filter(|a| scc_of[&a.predicate] == head_scc)
                    .count();
                if recursive > 1 {
                    Some(ViolationKind::NonLinear { recursive_atoms: recursive })
                } else {
                    if recursive == 1 && chain.len() == 1 {
                        report.notes.push(format!(
                            "clause {}: recursive copy atom accepted as tail-recursive \
                             with empty context: {}",
                            idx,
                            program.render_clause(clause)
                        ));
                    }
                    None
                }
            }
        };
        if let Some(reason) = reason {
            report.violations.push(Violation {
                clause_index: idx,
                clause: program.render_clause(clause),
                reason,
            });
        }
    }
    report
}

/// Classifies one layer by the strongest demand among its clauses.
/// Requires a validated program.
pub fn classify_layer(program: &Program, layer_preds: &[PredId], clauses: &[usize]) -> LayerClass {
    let members: BTreeSet<PredId> = layer_preds.iter().copied().collect();
    let mut class = LayerClass::NonRecursive;
    for &ci in clauses {
        let clause = &program.clauses[ci];
        let chain = normalize_clause(clause).expect("classify requires a validated program");
        let rec_pos = chain
            .iter()
            .position(|c| members.contains(&clause.body[c.body_index].predicate));
        let clause_class = match rec_pos {
            None => LayerClass::NonRecursive,
            Some(p) => {
                let last = p + 1 == chain.len();
                if last && !chain[p].transposed {
                    LayerClass::TailRecursive
                } else if last {
                    LayerClass::Transposed
                } else {
                    LayerClass::TwoSided
                }
            }
        };
        class = class.max(clause_class);
    }
    class
}

/// Splits a validated program into ascending layers: one per strongly
/// connected component, ordered so dependencies come first, ties broken
/// by smallest predicate name.
pub fn layer_program(program: &Program) -> Result<LayeredProgram, NotInFragment> {
    let report = validate_clin(program);
    if !report.is_ok() {
        return Err(NotInFragment { report });
    }
    let graph = dependency_graph(program);
    let sccs = tarjan_scc(program, &graph);
    let scc_of: BTreeMap<PredId, usize> = sccs
        .iter()
        .enumerate()
        .flat_map(|(i, scc)| scc.iter().map(move |&p| (p, i)))
        .collect();

    // Condensation: which components each component depends on.
    let count = sccs.len();
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); count];
    for (&from, tos) in &graph.edges {
        for &to in tos {
            let (sf, st) = (scc_of[&from], scc_of[&to]);
            if sf != st {
                deps[sf].insert(st);
            }
        }
    }

    // Kahn's algorithm over the condensation with a name-keyed heap so the
    // order is fully deterministic.
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); count];
    let mut remaining: Vec<usize> = vec![0; count];
    for (i, d) in deps.iter().enumerate() {
        remaining[i] = d.len();
        for &t in d {
            dependents[t].push(i);
        }
    }
    let key = |i: usize| -> String {
        // Members are name-sorted, so the first is the smallest name.
        program.predicates.name(sccs[i][0]).to_string()
    };
    let mut ready: BTreeSet<(String, usize)> =
        (0..count).filter(|&i| remaining[i] == 0).map(|i| (key(i), i)).collect();
    let mut order = Vec::with_capacity(count);
    while let Some(entry) = ready.iter().next().cloned() {
        ready.remove(&entry);
        let i = entry.1;
        order.push(i);
        for &d in &dependents[i] {
            remaining[d] -= 1;
            if remaining[d] == 0 {
                ready.insert((key(d), d));
            }
        }
    }
    debug_assert_eq!(order.len(), count, "condensation is acyclic");

    let mut layers = Vec::with_capacity(count);
    for scc_idx in order {
        let predicates = sccs[scc_idx].clone();
        let members: BTreeSet<PredId> = predicates.iter().copied().collect();
        let clauses: Vec<usize> = program
            .clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| members.contains(&c.head.predicate))
            .map(|(i, _)| i)
            .collect();
        let class = classify_layer(program, &predicates, &clauses);
        layers.push(Layer { predicates, clauses, class });
    }
    Ok(LayeredProgram { layers })
}
