//! Warshall's transitive-closure algorithm, kept as an independent
//! combinatorial oracle for the closure computed through the matrix
//! equations.

use crate::matrix::BitMatrix;

/// Reachability by a nonempty path: `(i, j)` is set when some sequence
/// of one or more edges leads from `i` to `j`. The diagonal is included
/// only for vertices on a cycle — there is no reflexive augmentation.
pub fn warshall_transitive_closure(r: &BitMatrix) -> BitMatrix {
    let n = r.n();
    let mut out = r.clone();
    for k in 0..n {
        for i in 0..n {
            if out.get(i, k) {
                for j in 0..n {
                    if out.get(k, j) {
                        out.set(i, j, true);
                    }
                }
            }
        }
    }
    out
}
