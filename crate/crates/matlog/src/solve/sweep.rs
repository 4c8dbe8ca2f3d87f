//! Shared sweep machinery: the per-unknown state vector and one
//! right-hand-side application. Every iterative strategy reads the
//! previous sweep's state for all unknowns (Jacobi style), which keeps
//! results independent of equation order.

use crate::compile::{Equation, EquationSystem};
use crate::front::PredId;
use crate::matrix::RealMatrix;
use std::collections::BTreeMap;

pub(crate) struct SweepState {
    index: BTreeMap<PredId, usize>,
    pub mats: Vec<RealMatrix>,
}

impl SweepState {
    pub fn zeros(system: &EquationSystem) -> SweepState {
        let index =
            system.equations.iter().enumerate().map(|(i, eq)| (eq.head, i)).collect();
        let mats = vec![RealMatrix::zeros(system.n); system.equations.len()];
        SweepState { index, mats }
    }

    /// Builds a state from per-head matrices; heads the provider skips
    /// start at zero.
    pub fn from_supports(
        system: &EquationSystem,
        provider: impl Fn(PredId) -> Option<RealMatrix>,
    ) -> SweepState {
        let mut state = SweepState::zeros(system);
        for (i, eq) in system.equations.iter().enumerate() {
            if let Some(m) = provider(eq.head) {
                state.mats[i] = m;
            }
        }
        state
    }

    pub fn get(&self, p: PredId) -> &RealMatrix {
        let i = self.index[&p];
        &self.mats[i]
    }

    pub fn replace(&mut self, mats: Vec<RealMatrix>) {
        self.mats = mats;
    }
}

/// `constant + sum_j B_j X°_j C_j` for one equation, unscaled.
pub(crate) fn rhs_counts(eq: &Equation, state: &SweepState) -> RealMatrix {
    let mut acc = eq.constant.clone();
    for term in &eq.terms {
        let x = state.get(term.core.predicate);
        let oriented = if term.core.transposed { x.transpose() } else { x.clone() };
        let left = term.left.matmul_left(&oriented);
        let full = term.right.matmul_right(&left);
        acc = acc.add(&full).expect("equations share one dimension");
    }
    acc
}
