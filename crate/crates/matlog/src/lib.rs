//! Datalog evaluation by linear algebra.
//!
//! The engine evaluates a restricted class of Datalog programs — binary
//! predicates, chain-shaped rule bodies, at most one recursive body atom
//! per rule — by encoding relations as adjacency matrices, compiling each
//! recursive stratum into a scaled linear matrix equation, solving that
//! equation (directly where the shape allows, iteratively otherwise), and
//! thresholding the solution back to relations. Boolean fixpoint iteration
//! and dedicated closure/Kronecker oracles are kept alongside the algebraic
//! solvers so every answer can be cross-checked.
//!
//! Pipeline: [`front`] parses programs and facts, [`analysis`] validates
//! the fragment and stratifies predicates, [`compile`] builds the per-layer
//! equations, [`solve`] runs a selected solver strategy per layer, and
//! [`data`] generates or loads the input graphs.

pub mod analysis;
pub mod compile;
pub mod data;
pub mod front;
pub mod matrix;
pub mod solve;
