//! Scaled fixpoint sweeps: iterate `X <- epsilon * (A + sum B X° C)`
//! from zero. With the compiled scale factor the iterates grow
//! monotonically, stay within [0,1], and their positive entries match
//! the boolean iterates step for step, so the limit's support is the
//! least model. Stops when the support pattern survives a full sweep
//! unchanged and the largest entrywise change is below the relative
//! residual target.

use super::sweep::{rhs_counts, SweepState};
use super::{RawSolution, SolveError, SolveOptions};
use crate::compile::EquationSystem;
use crate::front::PredId;
use crate::matrix::{threshold_positive, BitMatrix, RealMatrix};
use std::collections::BTreeMap;

/// Sweeps until the stopping rule holds, attributing errors to `method`
/// (the sylvester strategy reuses this engine on rewritten systems).
pub(super) fn run_sweeps(
    system: &EquationSystem,
    options: &SolveOptions,
    method: &'static str,
) -> Result<RawSolution, SolveError> {
    let cap = options.sweep_cap(system.n);
    let mut state = SweepState::zeros(system);
    let mut support: Vec<BitMatrix> =
        state.mats.iter().map(|m| threshold_positive(m, options.tau)).collect();
    let mut last_delta = f64::NAN;
    for sweep in 1..=cap {
        let next: Vec<RealMatrix> = system
            .equations
            .iter()
            .map(|eq| rhs_counts(eq, &state).scale(system.epsilon))
            .collect();
        let mut delta = 0.0f64;
        let mut scale = 0.0f64;
        for (new, old) in next.iter().zip(&state.mats) {
            delta = delta.max(new.max_abs_diff(old).expect("same dimension"));
            scale = scale.max(new.max_entry());
        }
        let next_support: Vec<BitMatrix> =
            next.iter().map(|m| threshold_positive(m, options.tau)).collect();
        let stable = next_support == support;
        state.replace(next);
        support = next_support;
        last_delta = delta;
        if stable && delta <= options.residual_tol * scale {
            return Ok(RawSolution {
                scaled: state.mats,
                iterations: sweep,
                residual: Some(delta),
            });
        }
    }
    Err(SolveError::NoConvergence { method, sweeps: cap, residual: last_delta })
}

/// Solves by plain scaled iteration on the system as compiled
/// (transposed unknowns are read through a transpose each sweep).
pub fn solve_scaled_iteration(
    system: &EquationSystem,
    options: &SolveOptions,
) -> Result<RawSolution, SolveError> {
    run_sweeps(system, options, "scaled")
}

/// The first `steps + 1` scaled iterates (iterate 0 is all zero), for
/// property checks against the boolean iterates.
pub fn scaled_iterates(
    system: &EquationSystem,
    steps: usize,
) -> Vec<BTreeMap<PredId, RealMatrix>> {
    let mut state = SweepState::zeros(system);
    let snapshot = |s: &SweepState| {
        system
            .equations
            .iter()
            .zip(&s.mats)
            .map(|(eq, m)| (eq.head, m.clone()))
            .collect::<BTreeMap<_, _>>()
    };
    let mut out = vec![snapshot(&state)];
    for _ in 0..steps {
        let next = system
            .equations
            .iter()
            .map(|eq| rhs_counts(eq, &state).scale(system.epsilon))
            .collect();
        state.replace(next);
        out.push(snapshot(&state));
    }
    out
}
