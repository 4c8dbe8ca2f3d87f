//! Rendering solved relations back to clause syntax.

use super::ast::Program;
use super::symbols::PredId;
use crate::matrix::BitMatrix;
use std::collections::BTreeMap;
use std::fmt::Write;

/// Renders relations as ground atoms, one per line, sorted by
/// (predicate name, first argument, second argument). Constant indices are
/// lexicographic by construction, so walking rows and columns in index
/// order yields name order, and the output re-parses to exactly the same
/// relations.
pub fn render_model(relations: &BTreeMap<PredId, BitMatrix>, program: &Program) -> String {
    let mut out = String::new();
    for pred in program.predicates.ids_by_name() {
        let Some(matrix) = relations.get(&pred) else { continue };
        let name = program.predicates.name(pred);
        let n = matrix.n();
        for i in 0..n {
            for j in 0..n {
                if matrix.get(i, j) {
                    let a = program.constants.name(super::symbols::ConstId(i as u32));
                    let b = program.constants.name(super::symbols::ConstId(j as u32));
                    writeln!(out, "{name}({a},{b}).").expect("writing to string");
                }
            }
        }
    }
    out
}
