//! Saturating 0/1 iteration: the reference bottom-up semantics.
//!
//! Each sweep recomputes every equation's right-hand side from the
//! previous sweep's relations and keeps only which entries are nonzero
//! (capping at one and thresholding at zero pick out the same support,
//! since all arithmetic is nonnegative). The operator is monotone, so
//! the sweeps grow until they reach the least fixpoint exactly.

use super::sweep::{rhs_counts, SweepState};
use super::{RawSolution, SolveError, SolveOptions};
use crate::compile::EquationSystem;
use crate::front::PredId;
use crate::matrix::{threshold_positive, BitMatrix, RealMatrix};
use std::collections::BTreeMap;

/// One sweep over all equations, reading `state` and returning the new
/// 0/1 relations.
fn step(system: &EquationSystem, state: &SweepState) -> Vec<RealMatrix> {
    system
        .equations
        .iter()
        .map(|eq| threshold_positive(&rhs_counts(eq, state), 0.0).to_real())
        .collect()
}

/// Runs sweeps from all-zero until nothing changes; returns the final
/// 0/1 matrices (in equation order) and the sweep count.
fn fixpoint(
    system: &EquationSystem,
    cap: usize,
) -> Result<(Vec<RealMatrix>, usize), SolveError> {
    let mut state = SweepState::zeros(system);
    for sweep in 1..=cap {
        let next = step(system, &state);
        if next == state.mats {
            return Ok((next, sweep));
        }
        state.replace(next);
    }
    // Unreachable for compiled systems: the iteration is monotone over a
    // finite lattice and the default cap exceeds its height.
    Err(SolveError::NoConvergence { method: "boolean", sweeps: cap, residual: f64::NAN })
}

pub(super) fn solve_raw(
    system: &EquationSystem,
    options: &SolveOptions,
) -> Result<RawSolution, SolveError> {
    let cap = options.boolean_cap(system.n, system.equations.len());
    let (mats, iterations) = fixpoint(system, cap)?;
    Ok(RawSolution { scaled: mats, iterations, residual: None })
}

/// The least-model relations of one compiled system.
pub fn solve_boolean_iteration(
    system: &EquationSystem,
) -> Result<BTreeMap<PredId, BitMatrix>, SolveError> {
    let cap = system.n * system.equations.len() + 1;
    let (mats, _) = fixpoint(system, cap)?;
    Ok(system
        .equations
        .iter()
        .zip(&mats)
        .map(|(eq, m)| (eq.head, threshold_positive(m, 0.0)))
        .collect())
}

/// The first `steps + 1` iterates (starting from the all-zero iterate 0),
/// for property checks against the scaled iteration.
pub fn boolean_iterates(
    system: &EquationSystem,
    steps: usize,
) -> Vec<BTreeMap<PredId, BitMatrix>> {
    let mut state = SweepState::zeros(system);
    let snapshot = |s: &SweepState| {
        system
            .equations
            .iter()
            .zip(&s.mats)
            .map(|(eq, m)| (eq.head, threshold_positive(m, 0.0)))
            .collect::<BTreeMap<_, _>>()
    };
    let mut out = vec![snapshot(&state)];
    for _ in 0..steps {
        let next = step(system, &state);
        state.replace(next);
        out.push(snapshot(&state));
    }
    out
}
