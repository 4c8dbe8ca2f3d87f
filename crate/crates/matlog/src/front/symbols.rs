//! Symbol tables for predicates and constants.
//!
//! Constants get dense indices in lexicographic name order, so the index a
//! constant receives depends only on the final set of names, never on the
//! order inputs were read. That makes matrix layouts — rows and columns are
//! constant indices — reproducible across runs and input orderings.
//! Predicates keep first-occurrence order; anything user-visible sorts by
//! name instead of by id.

use std::collections::HashMap;

/// Index into a [`PredicateTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredId(pub u32);

/// Index into a [`ConstantTable`]; doubles as matrix row/column index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstId(pub u32);

/// How a predicate is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredicateKind {
    /// Defined only by ground unit clauses (never a rule head).
    Extensional,
    /// Appears as the head of at least one rule.
    Intensional,
}

/// All predicates are binary; the table tracks names and kinds.
#[derive(Debug, Clone, Default)]
pub struct PredicateTable {
    names: Vec<String>,
    kinds: Vec<PredicateKind>,
    index: HashMap<String, PredId>,
}

impl PredicateTable {
    pub fn new() -> Self {
        PredicateTable::default()
    }

    /// Returns the existing id for `name` or registers it (kind starts as
    /// extensional until a rule head proves otherwise).
    pub fn register(&mut self, name: &str) -> PredId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = PredId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.kinds.push(PredicateKind::Extensional);
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn lookup(&self, name: &str) -> Option<PredId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: PredId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn kind(&self, id: PredId) -> PredicateKind {
        self.kinds[id.0 as usize]
    }

    pub fn set_kind(&mut self, id: PredId, kind: PredicateKind) {
        self.kinds[id.0 as usize] = kind;
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = PredId> + '_ {
        (0..self.names.len() as u32).map(PredId)
    }

    /// Ids sorted by predicate name; the order used for reports and output.
    pub fn ids_by_name(&self) -> Vec<PredId> {
        let mut ids: Vec<PredId> = self.ids().collect();
        ids.sort_by(|a, b| self.name(*a).cmp(self.name(*b)));
        ids
    }
}

/// Constants with lexicographic dense indices.
#[derive(Debug, Clone, Default)]
pub struct ConstantTable {
    names: Vec<String>,
    index: HashMap<String, ConstId>,
}

impl ConstantTable {
    /// Builds a table from any iterator of names; duplicates collapse and
    /// the result is sorted, so two tables built from the same name set are
    /// identical regardless of iteration order.
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        names.sort();
        names.dedup();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), ConstId(i as u32)))
            .collect();
        ConstantTable { names, index }
    }

    pub fn lookup(&self, name: &str) -> Option<ConstId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: ConstId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Rebuilds the table with extra names and returns, alongside it, the
    /// translation from current ids to ids in the new table.
    pub fn extended<I, S>(&self, extra: I) -> (ConstantTable, Vec<ConstId>)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let merged = ConstantTable::from_names(
            self.names.iter().cloned().chain(extra.into_iter().map(Into::into)),
        );
        let remap = self
            .names
            .iter()
            .map(|n| merged.lookup(n).expect("old name present in merged table"))
            .collect();
        (merged, remap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_indices_are_lexicographic_and_order_insensitive() {
        let a = ConstantTable::from_names(["e2", "e1", "e4", "e3", "e2"]);
        let b = ConstantTable::from_names(["e4", "e3", "e2", "e1"]);
        assert_eq!(a.names(), b.names());
        assert_eq!(a.lookup("e1"), Some(ConstId(0)));
        assert_eq!(a.lookup("e4"), Some(ConstId(3)));
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn extending_remaps_existing_ids() {
        let a = ConstantTable::from_names(["b", "d"]);
        let (merged, remap) = a.extended(["a", "c"]);
        assert_eq!(merged.names(), &["a", "b", "c", "d"]);
        // "b" moves from index 0 to 1, "d" from 1 to 3.
        assert_eq!(remap, vec![ConstId(1), ConstId(3)]);
    }

    #[test]
    fn predicate_registration_is_idempotent() {
        let mut t = PredicateTable::new();
        let r1 = t.register("r1");
        let r2 = t.register("r2");
        assert_eq!(t.register("r1"), r1);
        assert_ne!(r1, r2);
        assert_eq!(t.name(r2), "r2");
        assert_eq!(t.kind(r1), PredicateKind::Extensional);
    }

    #[test]
    fn ids_by_name_sorts_lexicographically() {
        let mut t = PredicateTable::new();
        t.register("r2");
        t.register("diag");
        t.register("r1");
        let sorted: Vec<&str> = t.ids_by_name().into_iter().map(|id| t.name(id)).collect();
        assert_eq!(sorted, vec!["diag", "r1", "r2"]);
    }
}
