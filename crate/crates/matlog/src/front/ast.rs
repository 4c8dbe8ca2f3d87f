//! Core syntax: terms, binary atoms, clauses, programs, and fact sets.

use super::symbols::{ConstId, ConstantTable, PredId, PredicateKind, PredicateTable};
use super::FrontError;
use crate::matrix::BitMatrix;
use std::collections::{BTreeMap, BTreeSet};

/// Hard cap on the constant table. Relations are materialized as dense
/// N x N matrices, so anything near this bound is already far past what
/// the dense kernels are meant for (N up to roughly 10^4).
pub const MAX_CONSTANTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(ConstId),
}

impl Term {
    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<ConstId> {
        match self {
            Term::Var(_) => None,
            Term::Const(c) => Some(*c),
        }
    }
}

/// A binary atom: predicate plus exactly two arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub predicate: PredId,
    pub args: [Term; 2],
}

impl Atom {
    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }
}

/// A clause; an empty body means a fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }
}

/// Per-predicate sets of ground argument pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactSet {
    pub by_pred: BTreeMap<PredId, BTreeSet<(ConstId, ConstId)>>,
}

impl FactSet {
    pub fn insert(&mut self, pred: PredId, pair: (ConstId, ConstId)) -> bool {
        self.by_pred.entry(pred).or_default().insert(pair)
    }

    pub fn pairs(&self, pred: PredId) -> Option<&BTreeSet<(ConstId, ConstId)>> {
        self.by_pred.get(&pred)
    }

    pub fn count(&self, pred: PredId) -> usize {
        self.by_pred.get(&pred).map_or(0, BTreeSet::len)
    }

    /// Adjacency matrix of one predicate over a domain of `n` constants.
    pub fn matrix(&self, pred: PredId, n: usize) -> BitMatrix {
        let mut m = BitMatrix::zeros(n);
        if let Some(pairs) = self.by_pred.get(&pred) {
            for &(a, b) in pairs {
                m.set(a.0 as usize, b.0 as usize, true);
            }
        }
        m
    }
}

/// A parsed program: clauses plus its symbol tables.
#[derive(Debug, Clone)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub predicates: PredicateTable,
    pub constants: ConstantTable,
}

impl Program {
    /// Collects every ground unit clause into a [`FactSet`] (duplicates
    /// collapse).
    pub fn fact_set(&self) -> FactSet {
        let mut facts = FactSet::default();
        for clause in &self.clauses {
            if clause.is_fact() {
                if let [Term::Const(a), Term::Const(b)] = clause.head.args {
                    facts.insert(clause.head.predicate, (a, b));
                }
            }
        }
        facts
    }

    /// Domain size: the number of constants.
    pub fn domain_size(&self) -> usize {
        self.constants.len()
    }

    /// Merges externally loaded fact pairs into the program under the named
    /// predicate. New constants re-sort the constant table, so existing ids
    /// are remapped in place; duplicate facts are dropped.
    pub fn merge_fact_pairs<S: AsRef<str>>(
        &mut self,
        predicate: &str,
        pairs: &[(S, S)],
    ) -> Result<usize, FrontError> {
        let new_names = pairs
            .iter()
            .flat_map(|(a, b)| [a.as_ref().to_string(), b.as_ref().to_string()]);
        let (merged, remap) = self.constants.extended(new_names);
        if merged.len() > MAX_CONSTANTS {
            return Err(FrontError::ConstantLimit { limit: MAX_CONSTANTS, requested: merged.len() });
        }
        self.constants = merged;
        for clause in &mut self.clauses {
            remap_atom(&mut clause.head, &remap);
            for atom in &mut clause.body {
                remap_atom(atom, &remap);
            }
        }
        let pred = self.predicates.register(predicate);
        let mut existing: BTreeSet<(PredId, ConstId, ConstId)> = BTreeSet::new();
        for clause in &self.clauses {
            if clause.is_fact() {
                if let [Term::Const(a), Term::Const(b)] = clause.head.args {
                    existing.insert((clause.head.predicate, a, b));
                }
            }
        }
        let mut added = 0;
        for (a, b) in pairs {
            let ca = self.constants.lookup(a.as_ref()).expect("constant just merged");
            let cb = self.constants.lookup(b.as_ref()).expect("constant just merged");
            if existing.insert((pred, ca, cb)) {
                self.clauses.push(Clause {
                    head: Atom { predicate: pred, args: [Term::Const(ca), Term::Const(cb)] },
                    body: Vec::new(),
                });
                added += 1;
            }
        }
        Ok(added)
    }

    /// Registers constants that carry no facts of their own (isolated
    /// nodes of a generated graph, say) so the matrix domain still covers
    /// them. Existing ids are remapped as the table re-sorts.
    pub fn ensure_constants<I, S>(&mut self, names: I) -> Result<(), FrontError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let (merged, remap) = self.constants.extended(names);
        if merged.len() > MAX_CONSTANTS {
            return Err(FrontError::ConstantLimit { limit: MAX_CONSTANTS, requested: merged.len() });
        }
        self.constants = merged;
        for clause in &mut self.clauses {
            remap_atom(&mut clause.head, &remap);
            for atom in &mut clause.body {
                remap_atom(atom, &remap);
            }
        }
        Ok(())
    }

    /// Adds the built-in equality relation: one `diag(c,c)` fact for every
    /// constant currently in the table (skipping pairs already present).
    /// Call after all other inputs are loaded so the relation covers the
    /// full domain.
    pub fn add_diag_builtin(&mut self, name: &str) {
        let pred = self.predicates.register(name);
        let mut existing: BTreeSet<(ConstId, ConstId)> = BTreeSet::new();
        for clause in &self.clauses {
            if clause.is_fact() && clause.head.predicate == pred {
                if let [Term::Const(a), Term::Const(b)] = clause.head.args {
                    existing.insert((a, b));
                }
            }
        }
        for i in 0..self.constants.len() as u32 {
            let c = ConstId(i);
            if !existing.contains(&(c, c)) {
                self.clauses.push(Clause {
                    head: Atom { predicate: pred, args: [Term::Const(c), Term::Const(c)] },
                    body: Vec::new(),
                });
            }
        }
    }

    /// Recomputes predicate kinds: a predicate is extensional iff it is
    /// never the head of a rule (it is defined by ground unit clauses
    /// alone).
    pub fn recompute_kinds(&mut self) {
        for id in self.predicates.ids().collect::<Vec<_>>() {
            self.predicates.set_kind(id, PredicateKind::Extensional);
        }
        for clause in &self.clauses {
            if !clause.is_fact() {
                self.predicates.set_kind(clause.head.predicate, PredicateKind::Intensional);
            }
        }
    }

    /// Extensional predicates in name order.
    pub fn extensional_predicates(&self) -> Vec<PredId> {
        self.predicates
            .ids_by_name()
            .into_iter()
            .filter(|&id| self.predicates.kind(id) == PredicateKind::Extensional)
            .collect()
    }

    pub fn render_term(&self, term: &Term) -> String {
        match term {
            Term::Var(v) => v.clone(),
            Term::Const(c) => self.constants.name(*c).to_string(),
        }
    }

    pub fn render_atom(&self, atom: &Atom) -> String {
        format!(
            "{}({},{})",
            self.predicates.name(atom.predicate),
            self.render_term(&atom.args[0]),
            self.render_term(&atom.args[1])
        )
    }

    pub fn render_clause(&self, clause: &Clause) -> String {
        if clause.is_fact() {
            format!("{}.", self.render_atom(&clause.head))
        } else {
            let body: Vec<String> = clause.body.iter().map(|a| self.render_atom(a)).collect();
            format!("{} :- {}.", self.render_atom(&clause.head), body.join(", "))
        }
    }
}

fn remap_atom(atom: &mut Atom, remap: &[ConstId]) {
    for term in &mut atom.args {
        if let Term::Const(c) = term {
            *c = remap[c.0 as usize];
        }
    }
}
