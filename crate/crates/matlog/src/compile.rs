//! Compiles one layer of a validated program into a matrix fixpoint
//! equation per head predicate.
//!
//! Relations over a domain of `n` constants are `n x n` matrices. A fact
//! contributes a unit entry to its predicate's constant matrix; a
//! non-recursive rule contributes the product of its body chain (each
//! factor the relation or its transpose, matching the atom's argument
//! order); a recursive rule splits its chain at the recursive atom into a
//! left coefficient, the unknown, and a right coefficient. Entries are
//! raw derivation counts and may exceed one — the boolean model is their
//! support, and keeping counts makes every fold a plain product.
//!
//! Each layer gets a single scale factor `epsilon` chosen so that if all
//! unknowns have entries at most one, the right-hand side
//! `epsilon * (A + sum_j B_j X C_j)` does too. Iterating from zero then
//! stays within `[0,1]`, derivable entries stay strictly positive, and
//! thresholding recovers the least model.

use crate::analysis::{normalize_clause, Layer, LayerClass, ViolationKind};
use crate::front::{PredId, PredicateTable, Program};
use crate::matrix::{matmul, BitMatrix, RealMatrix};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A reference to a relation, possibly transposed (the atom's arguments
/// run against the chain direction).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientedRef {
    pub predicate: PredId,
    pub transposed: bool,
}

/// A coefficient matrix in an equation term. Empty chain segments become
/// `Identity`, which multiplication elides.
#[derive(Debug, Clone)]
pub enum Coeff {
    Identity,
    Dense(RealMatrix),
}

impl Coeff {
    pub fn is_identity(&self) -> bool {
        matches!(self, Coeff::Identity)
    }

    /// `self * x`.
    pub fn matmul_left(&self, x: &RealMatrix) -> RealMatrix {
        match self {
            Coeff::Identity => x.clone(),
            Coeff::Dense(m) => matmul(m, x).expect("equation dimensions agree"),
        }
    }

    /// `x * self`.
    pub fn matmul_right(&self, x: &RealMatrix) -> RealMatrix {
        match self {
            Coeff::Identity => x.clone(),
            Coeff::Dense(m) => matmul(x, m).expect("equation dimensions agree"),
        }
    }

    pub fn to_real(&self, n: usize) -> RealMatrix {
        match self {
            Coeff::Identity => RealMatrix::identity(n),
            Coeff::Dense(m) => m.clone(),
        }
    }

    pub fn transposed(&self) -> Coeff {
        match self {
            Coeff::Identity => Coeff::Identity,
            Coeff::Dense(m) => Coeff::Dense(m.transpose()),
        }
    }

    fn row_sums(&self, n: usize) -> Vec<f64> {
        match self {
            Coeff::Identity => vec![1.0; n],
            Coeff::Dense(m) => (0..n).map(|i| (0..n).map(|j| m.get(i, j)).sum()).collect(),
        }
    }

    fn col_sums(&self, n: usize) -> Vec<f64> {
        match self {
            Coeff::Identity => vec![1.0; n],
            Coeff::Dense(m) => (0..n).map(|j| (0..n).map(|i| m.get(i, j)).sum()).collect(),
        }
    }

    pub fn inf_norm(&self, n: usize) -> f64 {
        match self {
            Coeff::Identity => {
                if n == 0 {
                    0.0
                } else {
                    1.0
                }
            }
            Coeff::Dense(m) => m.inf_norm(),
        }
    }

    pub fn one_norm(&self, n: usize) -> f64 {
        match self {
            Coeff::Identity => {
                if n == 0 {
                    0.0
                } else {
                    1.0
                }
            }
            Coeff::Dense(m) => m.one_norm(),
        }
    }
}

/// One recursive term `B * X * C` on an equation's right-hand side.
#[derive(Debug, Clone)]
pub struct EquationTerm {
    pub left: Coeff,
    pub core: OrientedRef,
    pub right: Coeff,
    /// The body atoms folded into `left`/`right`, kept for display.
    pub left_chain: Vec<OrientedRef>,
    pub right_chain: Vec<OrientedRef>,
}

/// The equation for one head predicate:
/// `X = epsilon * (constant + sum of terms)`.
#[derive(Debug, Clone)]
pub struct Equation {
    pub head: PredId,
    /// Summed contributions of facts and non-recursive rules (raw counts).
    pub constant: RealMatrix,
    pub terms: Vec<EquationTerm>,
    /// Number of fact clauses folded into `constant`, for display.
    pub fact_count: usize,
    /// Body chains of non-recursive rules folded into `constant`.
    pub constant_chains: Vec<Vec<OrientedRef>>,
}

/// The coupled equations of one layer, sharing a scale factor.
#[derive(Debug, Clone)]
pub struct EquationSystem {
    pub n: usize,
    pub epsilon: f64,
    pub equations: Vec<Equation>,
    /// For unknowns introduced by rewriting (transposed companions):
    /// maps the synthetic predicate to the one it mirrors. Empty after
    /// compilation; filled by the rewrite pass.
    pub base_of: BTreeMap<PredId, PredId>,
}

impl EquationSystem {
    /// The shape of the system, by the strongest demand of any term:
    /// no terms at all, all terms trailing (`C = I`) with the unknown in
    /// head orientation, trailing but transposed, or two-sided.
    pub fn shape(&self) -> LayerClass {
        let mut class = LayerClass::NonRecursive;
        for eq in &self.equations {
            for term in &eq.terms {
                let t = if term.right.is_identity() && !term.core.transposed {
                    LayerClass::TailRecursive
                } else if term.right.is_identity() && term.left.is_identity() {
                    LayerClass::Transposed
                } else if term.right.is_identity() {
                    LayerClass::Transposed
                } else {
                    LayerClass::TwoSided
                };
                class = class.max(t);
            }
        }
        class
    }

    /// Display name for an unknown, including rewrite companions.
    pub fn unknown_name(&self, table: &PredicateTable, id: PredId) -> String {
        match self.base_of.get(&id) {
            Some(&base) => format!("{}_t", table.name(base)),
            None => table.name(id).to_string(),
        }
    }

    /// Renders the system symbolically, one equation per line.
    pub fn render(&self, table: &PredicateTable) -> String {
        let chain_text = |chain: &[OrientedRef]| -> String {
            chain
                .iter()
                .map(|r| {
                    let mut s = self.unknown_name(table, r.predicate);
                    if r.transposed {
                        s.push('\'');
                    }
                    s
                })
                .collect::<Vec<_>>()
                .join("*")
        };
        let mut out = String::new();
        for eq in &self.equations {
            let mut parts = Vec::new();
            if eq.fact_count > 0 {
                parts.push(format!("facts({})", eq.fact_count));
            }
            for chain in &eq.constant_chains {
                parts.push(chain_text(chain));
            }
            for term in &eq.terms {
                let mut piece = String::new();
                if !term.left_chain.is_empty() {
                    piece.push_str(&chain_text(&term.left_chain));
                    piece.push('*');
                }
                piece.push_str(&format!("X[{}]", chain_text(&[term.core])));
                if !term.right_chain.is_empty() {
                    piece.push('*');
                    piece.push_str(&chain_text(&term.right_chain));
                }
                parts.push(piece);
            }
            if parts.is_empty() {
                parts.push("0".to_string());
            }
            out.push_str(&format!(
                "X[{}] = {:.6} * ({})\n",
                self.unknown_name(table, eq.head),
                self.epsilon,
                parts.join(" + ")
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub enum CompileError {
    /// A body predicate outside the layer has no solved relation yet.
    MissingRelation { predicate: String },
    /// The clause does not fit the supported fragment (the program was
    /// not validated first).
    OutsideFragment { clause: String, reason: ViolationKind },
    /// A requested scale factor would let right-hand sides exceed one.
    BadEpsilon { requested: f64, limit: f64 },
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompileError::MissingRelation { predicate } => {
                write!(f, "no solved relation for body predicate '{predicate}'")
            }
            CompileError::OutsideFragment { clause, reason } => {
                write!(f, "clause '{clause}' outside supported fragment: {reason}")
            }
            CompileError::BadEpsilon { requested, limit } => {
                write!(f, "epsilon {requested} exceeds the admissible limit {limit}")
            }
        }
    }
}

impl std::error::Error for CompileError {}

/// Multiplies the chain's relations in order; `None` for an empty chain.
pub fn fold_chain(
    refs: &[OrientedRef],
    relations: &BTreeMap<PredId, BitMatrix>,
    table: &PredicateTable,
) -> Result<Option<RealMatrix>, CompileError> {
    let mut acc: Option<RealMatrix> = None;
    for r in refs {
        let rel = relations.get(&r.predicate).ok_or_else(|| CompileError::MissingRelation {
            predicate: table.name(r.predicate).to_string(),
        })?;
        let mut m = rel.to_real();
        if r.transposed {
            m = m.transpose();
        }
        acc = Some(match acc {
            None => m,
            Some(prev) => matmul(&prev, &m).expect("relations share the domain size"),
        });
    }
    Ok(acc)
}

fn to_coeff(folded: Option<RealMatrix>) -> Coeff {
    match folded {
        None => Coeff::Identity,
        Some(m) => Coeff::Dense(m),
    }
}

/// Largest admissible scale factors for a set of equations:
/// `bound` is the default choice and `limit` the hard ceiling an override
/// must respect. Both derive from the exact entrywise maximum of
/// `A + sum_j B_j * ones * C_j` over all equations; the factored form
/// `rowsum_i(B_j) * colsum_k(C_j)` avoids materializing the product.
struct EpsilonBounds {
    bound: f64,
    limit: f64,
}

fn epsilon_bounds(equations: &[Equation], n: usize) -> EpsilonBounds {
    let mut max_constant: f64 = 0.0;
    let mut max_context: f64 = 0.0;
    let mut max_total: f64 = 0.0;
    for eq in equations {
        max_constant = max_constant.max(eq.constant.max_entry());
        let sums: Vec<(Vec<f64>, Vec<f64>)> = eq
            .terms
            .iter()
            .map(|t| (t.left.row_sums(n), t.right.col_sums(n)))
            .collect();
        for i in 0..n {
            for k in 0..n {
                let ctx: f64 = sums.iter().map(|(rs, cs)| rs[i] * cs[k]).sum();
                max_context = max_context.max(ctx);
                max_total = max_total.max(eq.constant.get(i, k) + ctx);
            }
        }
    }
    let bound = 1.0 / (max_constant.max(1.0) + max_context);
    let limit = if max_total == 0.0 { f64::INFINITY } else { 1.0 / max_total };
    EpsilonBounds { bound, limit }
}

/// Slack on the override ceiling, absorbing rounding in the bound itself.
const EPSILON_OVERRIDE_SLACK: f64 = 1e-9;

/// Compiles one layer against the already-solved relations of earlier
/// layers. `relations` must hold a matrix for every body predicate
/// outside the layer. An `epsilon_override`, if given, replaces the
/// computed scale factor after a safety check.
pub fn compile_layer(
    program: &Program,
    layer: &Layer,
    relations: &BTreeMap<PredId, BitMatrix>,
    epsilon_override: Option<f64>,
) -> Result<EquationSystem, CompileError> {
    let n = program.domain_size();
    let members: BTreeSet<PredId> = layer.predicates.iter().copied().collect();
    let mut equations: Vec<Equation> = layer
        .predicates
        .iter()
        .map(|&p| Equation {
            head: p,
            constant: RealMatrix::zeros(n),
            terms: Vec::new(),
            fact_count: 0,
            constant_chains: Vec::new(),
        })
        .collect();
    let slot: BTreeMap<PredId, usize> =
        layer.predicates.iter().enumerate().map(|(i, &p)| (p, i)).collect();

    for &ci in &layer.clauses {
        let clause = &program.clauses[ci];
        let chain = normalize_clause(clause).map_err(|reason| CompileError::OutsideFragment {
            clause: program.render_clause(clause),
            reason,
        })?;
        let eq = &mut equations[slot[&clause.head.predicate]];
        if clause.is_fact() {
            let a = clause.head.args[0].as_const().expect("facts are ground");
            let b = clause.head.args[1].as_const().expect("facts are ground");
            let (i, j) = (a.0 as usize, b.0 as usize);
            eq.constant.set(i, j, eq.constant.get(i, j) + 1.0);
            eq.fact_count += 1;
            continue;
        }
        let refs: Vec<OrientedRef> = chain
            .iter()
            .map(|c| OrientedRef {
                predicate: clause.body[c.body_index].predicate,
                transposed: c.transposed,
            })
            .collect();
        let rec_positions: Vec<usize> = refs
            .iter()
            .enumerate()
            .filter(|(_, r)| members.contains(&r.predicate))
            .map(|(i, _)| i)
            .collect();
        match rec_positions.as_slice() {
            [] => {
                let folded = fold_chain(&refs, relations, &program.predicates)?
                    .expect("rules have non-empty bodies");
                eq.constant = eq.constant.add(&folded).expect("same domain size");
                eq.constant_chains.push(refs);
            }
            [p] => {
                let p = *p;
                let left = to_coeff(fold_chain(&refs[..p], relations, &program.predicates)?);
                let right =
                    to_coeff(fold_chain(&refs[p + 1..], relations, &program.predicates)?);
                eq.terms.push(EquationTerm {
                    left,
                    core: refs[p],
                    right,
                    left_chain: refs[..p].to_vec(),
                    right_chain: refs[p + 1..].to_vec(),
                });
            }
            more => {
                return Err(CompileError::OutsideFragment {
                    clause: program.render_clause(clause),
                    reason: ViolationKind::NonLinear { recursive_atoms: more.len() },
                });
            }
        }
    }

    let bounds = epsilon_bounds(&equations, n);
    let epsilon = match epsilon_override {
        None => bounds.bound,
        Some(e) => {
            if !(e > 0.0) || e > bounds.limit * (1.0 + EPSILON_OVERRIDE_SLACK) {
                return Err(CompileError::BadEpsilon { requested: e, limit: bounds.limit });
            }
            e
        }
    };
    Ok(EquationSystem { n, epsilon, equations, base_of: BTreeMap::new() })
}

/// Invertibility margin for trailing-term elimination: the sum over each
/// equation's terms of `epsilon * |B|_inf * |C|_inf` must stay below one
/// for the eliminated blocks to be nonsingular and sweeps to contract.
pub fn contraction_margin(system: &EquationSystem) -> f64 {
    let n = system.n;
    system
        .equations
        .iter()
        .map(|eq| {
            eq.terms
                .iter()
                .map(|t| system.epsilon * t.left.inf_norm(n) * t.right.inf_norm(n))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}
