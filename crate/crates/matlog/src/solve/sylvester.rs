//! Two-sided ("discrete Sylvester") solving.
//!
//! `solve_sylvester` first rewrites transposed unknowns into mirror
//! unknowns, checks the fixed-point contraction bound, then runs the
//! joint Jacobi sweeps shared with the scaled strategy. Mutually
//! recursive equations are swept together; no closed form is attempted.
//!
//! `solve_sylvester_kron_oracle` solves a single equation
//! `X = eps (A + B X C)` exactly by vectorizing: `vec(B X C) =
//! (C' ⊗ B) vec(X)`, so `vec(X)` solves the dimension-`n²` linear
//! system `(I - eps (C' ⊗ B)) v = eps vec(A)`. Cubing `n²` makes this
//! O(n⁶) — usable only at toy sizes, which is exactly its role as an
//! independent oracle.

use super::scaled::run_sweeps;
use super::{rewrite_transposed, RawSolution, SolveError, SolveOptions};
use crate::compile::EquationSystem;
use crate::matrix::{kron, vec_cols, unvec_cols, LuFactors, RealMatrix};

/// Largest per-equation sum of `eps * |B|_inf * |C|_1` — below one the
/// sweep is a contraction and the fixed point is the unique solution.
fn sweep_margin(system: &EquationSystem) -> f64 {
    let n = system.n;
    system
        .equations
        .iter()
        .map(|eq| {
            eq.terms
                .iter()
                .map(|t| system.epsilon * t.left.inf_norm(n) * t.right.one_norm(n))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Joint fixed-point solve; the returned matrices cover the original
/// equations only (mirror unknowns are internal).
pub fn solve_sylvester(
    system: &EquationSystem,
    options: &SolveOptions,
) -> Result<RawSolution, SolveError> {
    let rewritten = rewrite_transposed(system);
    let margin = sweep_margin(&rewritten);
    if margin >= 1.0 {
        return Err(SolveError::NotContracting { method: "sylvester", margin });
    }
    let mut raw = run_sweeps(&rewritten, options, "sylvester")?;
    raw.scaled.truncate(system.equations.len());
    Ok(raw)
}

/// Exact single-equation solve via the Kronecker-product linear system.
pub fn solve_sylvester_kron_oracle(
    a: &RealMatrix,
    b: &RealMatrix,
    c: &RealMatrix,
    epsilon: f64,
) -> Result<RealMatrix, SolveError> {
    let n = a.n();
    let big = kron(&c.transpose(), b).scale(epsilon);
    let lhs = RealMatrix::identity(n * n).add(&big.scale(-1.0)).expect("same dimension");
    let lu = LuFactors::factor(&lhs).map_err(|source| SolveError::Singular { source })?;
    let rhs: Vec<f64> = vec_cols(a).iter().map(|v| v * epsilon).collect();
    let x = lu.solve_vec(&rhs).map_err(|source| SolveError::Singular { source })?;
    Ok(unvec_cols(&x, n))
}

/// Strategy entry for the oracle: single equation, at most one plain
/// two-sided term, dimension within the cap.
pub(super) fn solve_kron_raw(
    system: &EquationSystem,
    options: &SolveOptions,
) -> Result<RawSolution, SolveError> {
    let unsupported = |detail: &str| SolveError::Unsupported {
        method: "kron_oracle",
        shape: system.shape(),
        detail: detail.to_string(),
    };
    if system.n > options.kron_cap {
        return Err(unsupported(&format!(
            "dimension {} above the oracle cap {}",
            system.n, options.kron_cap
        )));
    }
    let [eq] = system.equations.as_slice() else {
        return Err(unsupported("only single-equation systems"));
    };
    let n = system.n;
    let x = match eq.terms.as_slice() {
        [] => eq.constant.scale(system.epsilon),
        [term] if !term.core.transposed => solve_sylvester_kron_oracle(
            &eq.constant,
            &term.left.to_real(n),
            &term.right.to_real(n),
            system.epsilon,
        )?,
        _ => return Err(unsupported("only one plain two-sided term")),
    };
    Ok(RawSolution { scaled: vec![x], iterations: 0, residual: None })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::solve_boolean_iteration;
    use super::*;
    use crate::compile::{Coeff, Equation, EquationTerm, OrientedRef};
    use crate::data::{random_adjacency, GraphSpec};
    use crate::front::{parse_program, PredId};
    use crate::matrix::threshold_positive;
    use std::collections::BTreeMap;

    #[test]
    fn scalar_oracle_matches_the_closed_form() {
        let a = RealMatrix::from_rows(&[vec![2.0]]);
        let b = RealMatrix::from_rows(&[vec![3.0]]);
        let c = RealMatrix::from_rows(&[vec![0.5]]);
        let x = solve_sylvester_kron_oracle(&a, &b, &c, 0.1).unwrap();
        let expect = 0.1 * 2.0 / (1.0 - 0.1 * 3.0 * 0.5);
        assert!((x.get(0, 0) - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_contexts_give_scaled_constant() {
        let a = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 3.0]]);
        let z = RealMatrix::zeros(2);
        let x = solve_sylvester_kron_oracle(&a, &z, &z, 0.25).unwrap();
        assert_eq!(x.max_abs_diff(&a.scale(0.25)), Ok(0.0));
    }

    #[test]
    fn oracle_reproduces_the_worked_solution_with_identity_right_side() {
        let program = worked_program();
        let (system, _) = top_system(&program);
        let eq = &system.equations[0];
        let x = solve_sylvester_kron_oracle(
            &eq.constant,
            &eq.terms[0].left.to_real(4),
            &RealMatrix::identity(4),
            system.epsilon,
        )
        .unwrap();
        assert!(x.max_abs_diff(&worked_scaled()).unwrap() < 1e-9);
    }

    #[test]
    fn five_person_tree_same_generation_support() {
        let text = "r2(X,W) :- diag(X,W).\nr2(X,W) :- r1(X,Y), r2(Y,Z), r1(W,Z).\n\
                    r1(c1,a). r1(c2,a). r1(g1,c1). r1(g2,c2).\n\
                    diag(a,a). diag(c1,c1). diag(c2,c2). diag(g1,g1). diag(g2,g2).\n";
        let program = parse_program(text).unwrap();
        let layered = crate::analysis::layer_program(&program).unwrap();
        let n = program.domain_size();
        let facts = program.fact_set();
        let mut relations = BTreeMap::new();
        for layer in &layered.layers[..layered.layers.len() - 1] {
            for &p in &layer.predicates {
                relations.insert(p, facts.matrix(p, n));
            }
        }
        let top = layered.layers.last().unwrap();
        let system =
            crate::compile::compile_layer(&program, top, &relations, None).unwrap();
        let raw = solve_sylvester(&system, &SolveOptions::default()).unwrap();
        let support = threshold_positive(&raw.scaled[0], 1e-12);
        // Constants sort to a, c1, c2, g1, g2: everyone shares their own
        // generation, the two children pair up, the two grandchildren
        // pair up, and nobody else.
        let mut expect = crate::matrix::BitMatrix::identity(5);
        expect.set(1, 2, true);
        expect.set(2, 1, true);
        expect.set(3, 4, true);
        expect.set(4, 3, true);
        assert_eq!(support, expect);
        // Boolean sweeps on the same system agree.
        let oracle = solve_boolean_iteration(&system).unwrap();
        assert_eq!(support, oracle[&system.equations[0].head]);
    }

    #[test]
    fn mirror_unknown_solves_to_the_exact_transpose() {
        let program = parse_program(
            "r2(X,Z) :- r1(X,Z).\nr2(X,Z) :- r1(X,Y), r2(Z,Y).\n\
             r1(e1,e2). r1(e2,e3). r1(e3,e1). r1(e4,e1).\n",
        )
        .unwrap();
        let (system, _) = top_system(&program);
        let rewritten = rewrite_transposed(&system);
        let raw = run_sweeps(&rewritten, &SolveOptions::default(), "sylvester").unwrap();
        assert_eq!(raw.scaled.len(), 2);
        let diff = raw.scaled[1].max_abs_diff(&raw.scaled[0].transpose()).unwrap();
        assert_eq!(diff, 0.0, "mirror must equal the transpose bit for bit");
        // And the overall answer matches boolean sweeps on the original.
        let support = threshold_positive(&raw.scaled[0], 1e-12);
        let oracle = solve_boolean_iteration(&system).unwrap();
        assert_eq!(support, oracle[&system.equations[0].head]);
    }

    /// A one-term two-sided system over random 0/1 matrices, with the
    /// scale factor from the same entrywise bound the compiler uses.
    fn random_system(n: usize, seed: u64) -> EquationSystem {
        let a = random_adjacency(&GraphSpec { n, p_e: 0.3, seed }).to_real();
        let b = random_adjacency(&GraphSpec { n, p_e: 0.25, seed: seed + 1000 }).to_real();
        let c = random_adjacency(&GraphSpec { n, p_e: 0.25, seed: seed + 2000 }).to_real();
        let rs = (0..n)
            .map(|i| (0..n).map(|j| b.get(i, j)).sum::<f64>())
            .fold(0.0, f64::max);
        let cs = (0..n)
            .map(|j| (0..n).map(|i| c.get(i, j)).sum::<f64>())
            .fold(0.0, f64::max);
        let epsilon = 1.0 / (a.max_entry().max(1.0) + rs * cs);
        EquationSystem {
            n,
            epsilon,
            equations: vec![Equation {
                head: PredId(0),
                constant: a,
                fact_count: 0,
                constant_chains: Vec::new(),
                terms: vec![EquationTerm {
                    left: Coeff::Dense(b),
                    core: OrientedRef { predicate: PredId(0), transposed: false },
                    right: Coeff::Dense(c),
                    left_chain: Vec::new(),
                    right_chain: Vec::new(),
                }],
            }],
            base_of: BTreeMap::new(),
        }
    }

    #[test]
    fn fixed_point_agrees_with_the_kronecker_oracle() {
        let options = SolveOptions { max_iters: Some(5000), ..SolveOptions::default() };
        for seed in 0..6 {
            let system = random_system(6, seed);
            let swept = solve_sylvester(&system, &options).unwrap();
            let exact = solve_kron_raw(&system, &options).unwrap();
            let diff = swept.scaled[0].max_abs_diff(&exact.scaled[0]).unwrap();
            assert!(diff < 1e-9, "seed {seed}: diff {diff:.3e}");
        }
    }

    #[test]
    fn oversized_scale_factor_is_rejected_as_non_contracting() {
        let mut system = random_system(6, 42);
        system.epsilon = 0.9;
        match solve_sylvester(&system, &SolveOptions::default()) {
            Err(SolveError::NotContracting { method: "sylvester", margin }) => {
                assert!(margin >= 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let system = random_system(6, 7);
        let options = SolveOptions { kron_cap: 4, ..SolveOptions::default() };
        match solve_kron_raw(&system, &options) {
            Err(SolveError::Unsupported { method: "kron_oracle", .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
