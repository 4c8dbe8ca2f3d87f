//! Direct solve for trailing recursion: every term is `B X` with the
//! unknown last and head-oriented, so each equation is affine in the
//! unknowns, `X_h = e_h + sum_j M_hj X_j` with `e_h = epsilon A_h` and
//! `M_hj = epsilon B`. One block forward-elimination pass in layer order
//! plus back-substitution solves all mutually recursive unknowns — for a
//! single equation this is exactly `X = (I - eps B)^-1 eps A`.
//!
//! The compiled scale factor keeps every row-sum of the `M` blocks below
//! one, which elimination preserves, so the eliminated diagonals stay
//! nonsingular; a singular factor therefore signals an out-of-range
//! scale override and surfaces as an error for the caller to fall back.

use super::{RawSolution, SolveError, SolveOptions};
use crate::compile::EquationSystem;
use crate::matrix::{matmul, LuFactors, RealMatrix};
use std::collections::BTreeMap;

pub fn solve_tail_recursive_direct(
    system: &EquationSystem,
    _options: &SolveOptions,
) -> Result<RawSolution, SolveError> {
    let n = system.n;
    let m = system.equations.len();
    let index: BTreeMap<_, _> =
        system.equations.iter().enumerate().map(|(i, eq)| (eq.head, i)).collect();

    let mut rhs: Vec<RealMatrix> = Vec::with_capacity(m);
    let mut blocks: BTreeMap<(usize, usize), RealMatrix> = BTreeMap::new();
    for (h, eq) in system.equations.iter().enumerate() {
        rhs.push(eq.constant.scale(system.epsilon));
        for term in &eq.terms {
            if term.core.transposed || !term.right.is_identity() {
                return Err(SolveError::Unsupported {
                    method: "direct",
                    shape: system.shape(),
                    detail: "the unknown must be the trailing factor".to_string(),
                });
            }
            let j = index[&term.core.predicate];
            let b = term.left.to_real(n).scale(system.epsilon);
            blocks
                .entry((h, j))
                .and_modify(|acc| *acc = acc.add(&b).expect("same dimension"))
                .or_insert(b);
        }
    }

    let singular = |source| SolveError::Singular { source };

    // Forward elimination: after step h, unknown h is expressed in
    // unknowns above it (`solved_rhs` and `solved_blocks`), and every
    // later equation no longer references it.
    let mut solved_blocks: Vec<BTreeMap<usize, RealMatrix>> = vec![BTreeMap::new(); m];
    for h in 0..m {
        debug_assert!((0..h).all(|j| !blocks.contains_key(&(h, j))));
        if let Some(self_block) = blocks.remove(&(h, h)) {
            let lhs = RealMatrix::identity(n)
                .add(&self_block.scale(-1.0))
                .expect("same dimension");
            let lu = LuFactors::factor(&lhs).map_err(singular)?;
            rhs[h] = lu.solve(&rhs[h]).map_err(singular)?;
            for j in h + 1..m {
                if let Some(block) = blocks.remove(&(h, j)) {
                    solved_blocks[h].insert(j, lu.solve(&block).map_err(singular)?);
                }
            }
        } else {
            for j in h + 1..m {
                if let Some(block) = blocks.remove(&(h, j)) {
                    solved_blocks[h].insert(j, block);
                }
            }
        }
        for g in h + 1..m {
            if let Some(coupling) = blocks.remove(&(g, h)) {
                let update = matmul(&coupling, &rhs[h]).expect("same dimension");
                rhs[g] = rhs[g].add(&update).expect("same dimension");
                for (&j, w) in &solved_blocks[h] {
                    let update = matmul(&coupling, w).expect("same dimension");
                    blocks
                        .entry((g, j))
                        .and_modify(|acc| *acc = acc.add(&update).expect("same dimension"))
                        .or_insert(update);
                }
            }
        }
    }

    // Back-substitution: later unknowns are already final.
    for h in (0..m).rev() {
        let contributions: Vec<RealMatrix> = solved_blocks[h]
            .iter()
            .map(|(&j, w)| matmul(w, &rhs[j]).expect("same dimension"))
            .collect();
        for c in contributions {
            rhs[h] = rhs[h].add(&c).expect("same dimension");
        }
    }

    Ok(RawSolution { scaled: rhs, iterations: 0, residual: None })
}
