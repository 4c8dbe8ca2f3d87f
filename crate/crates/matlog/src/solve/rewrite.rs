//! Eliminates transposed unknowns by introducing mirror unknowns.
//!
//! A reference to `X'` (the transpose of in-layer unknown `X`) is
//! replaced by a fresh unknown defined by the transposed equation: if
//! `X = eps (A + sum B X° C)` then `X' = eps (A' + sum C' X°' B')`,
//! which again only mentions unknowns or their transposes, so a small
//! closure pass decides which mirrors are needed. Solving the enlarged
//! system gives the mirror exactly the transpose of its base unknown,
//! and the caller simply drops the mirrors afterwards.

use crate::compile::{Equation, EquationSystem, EquationTerm, OrientedRef};
use crate::front::PredId;
use std::collections::{BTreeMap, BTreeSet};

fn transpose_chain(chain: &[OrientedRef]) -> Vec<OrientedRef> {
    chain
        .iter()
        .rev()
        .map(|r| OrientedRef { predicate: r.predicate, transposed: !r.transposed })
        .collect()
}

/// Returns an equivalent system without transposed unknown references;
/// systems that have none come back unchanged. Added equations carry
/// synthetic head ids registered in `base_of`.
pub fn rewrite_transposed(system: &EquationSystem) -> EquationSystem {
    let any = system
        .equations
        .iter()
        .any(|eq| eq.terms.iter().any(|t| t.core.transposed));
    if !any {
        return system.clone();
    }

    let by_head: BTreeMap<PredId, &Equation> =
        system.equations.iter().map(|eq| (eq.head, eq)).collect();

    // Closure: a mirror is needed for every transposed reference in the
    // original equations, and for every plain reference inside an
    // equation being mirrored (its transpose references that unknown's
    // transpose in turn).
    let mut needed: BTreeSet<PredId> = system
        .equations
        .iter()
        .flat_map(|eq| eq.terms.iter())
        .filter(|t| t.core.transposed)
        .map(|t| t.core.predicate)
        .collect();
    loop {
        let mut grew = false;
        for j in needed.clone() {
            for term in &by_head[&j].terms {
                if !term.core.transposed && needed.insert(term.core.predicate) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }

    let max_id = system
        .equations
        .iter()
        .flat_map(|eq| {
            std::iter::once(eq.head.0)
                .chain(eq.terms.iter().map(|t| t.core.predicate.0))
                .chain(eq.terms.iter().flat_map(|t| {
                    t.left_chain.iter().chain(&t.right_chain).map(|r| r.predicate.0)
                }))
                .chain(eq.constant_chains.iter().flatten().map(|r| r.predicate.0))
        })
        .chain(system.base_of.keys().map(|p| p.0))
        .max()
        .unwrap_or(0);
    let mut base_of = system.base_of.clone();
    let mirror: BTreeMap<PredId, PredId> = needed
        .iter()
        .enumerate()
        .map(|(k, &p)| (p, PredId(max_id + 1 + k as u32)))
        .collect();
    for (&base, &m) in &mirror {
        base_of.insert(m, base);
    }

    // Any remaining transposed reference now names a mirror instead.
    let resolve = |r: OrientedRef| -> OrientedRef {
        if r.transposed {
            OrientedRef { predicate: mirror[&r.predicate], transposed: false }
        } else {
            r
        }
    };

    let mut equations: Vec<Equation> = system
        .equations
        .iter()
        .map(|eq| Equation {
            head: eq.head,
            constant: eq.constant.clone(),
            fact_count: eq.fact_count,
            constant_chains: eq.constant_chains.clone(),
            terms: eq
                .terms
                .iter()
                .map(|t| EquationTerm {
                    left: t.left.clone(),
                    core: resolve(t.core),
                    right: t.right.clone(),
                    left_chain: t.left_chain.clone(),
                    right_chain: t.right_chain.clone(),
                })
                .collect(),
        })
        .collect();

    for &base in &needed {
        let eq = by_head[&base];
        equations.push(Equation {
            head: mirror[&base],
            constant: eq.constant.transpose(),
            fact_count: eq.fact_count,
            constant_chains: eq.constant_chains.iter().map(|c| transpose_chain(c)).collect(),
            terms: eq
                .terms
                .iter()
                .map(|t| EquationTerm {
                    left: t.right.transposed(),
                    core: resolve(OrientedRef {
                        predicate: t.core.predicate,
                        transposed: !t.core.transposed,
                    }),
                    right: t.left.transposed(),
                    left_chain: transpose_chain(&t.right_chain),
                    right_chain: transpose_chain(&t.left_chain),
                })
                .collect(),
        });
    }

    EquationSystem { n: system.n, epsilon: system.epsilon, equations, base_of }
}
