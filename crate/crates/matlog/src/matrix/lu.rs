//! LU factorization with partial pivoting, and the linear solves and
//! inversion built on it.
//!
//! The factorization is the textbook in-place algorithm: for each
//! elimination column the largest-magnitude candidate pivot is swapped into
//! place, and a pivot whose magnitude does not exceed
//! `SINGULAR_PIVOT_REL_TOL * inf_norm(a)` aborts with the failing column.
//! Multi-right-hand-side solves run row-oriented substitution so each
//! update is a contiguous axpy across all right-hand sides.

use super::{check_dims, MatrixError, RealMatrix, SINGULAR_PIVOT_REL_TOL};

/// Packed LU factors of a permuted square matrix: `P a = L U` with unit
/// lower-triangular `L` below the diagonal and `U` on and above it.
#[derive(Debug)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    /// `perm[i]` is the source row of factored row `i`.
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factors `a`, reporting the failing elimination column if no
    /// acceptable pivot exists.
    pub fn factor(a: &RealMatrix) -> Result<LuFactors, MatrixError> {
        let n = a.n();
        let mut lu = a.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let tol = SINGULAR_PIVOT_REL_TOL * a.inf_norm();
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_mag = lu[col * n + col].abs();
            for r in col + 1..n {
                let mag = lu[r * n + col].abs();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = r;
                }
            }
            if pivot_mag <= tol {
                return Err(MatrixError::Singular { pivot: col });
            }
            if pivot_row != col {
                for j in 0..n {
                    lu.swap(col * n + j, pivot_row * n + j);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = lu[col * n + col];
            // No skip on zero factors: the update is a value no-op then,
            // and uniform work keeps the runtime density-independent.
            for r in col + 1..n {
                let factor = lu[r * n + col] / pivot;
                lu[r * n + col] = factor;
                let (top, bottom) = lu.split_at_mut(r * n);
                let prow = &top[col * n + col + 1..col * n + n];
                let rrow = &mut bottom[col + 1..n];
                for (rv, &pv) in rrow.iter_mut().zip(prow) {
                    *rv -= factor * pv;
                }
            }
        }
        Ok(LuFactors { n, lu, perm })
    }

    /// Solves `a x = rhs` for a square multi-column right-hand side.
    pub fn solve(&self, rhs: &RealMatrix) -> Result<RealMatrix, MatrixError> {
        check_dims(self.n, rhs.n())?;
        let n = self.n;
        let mut x = vec![0.0f64; n * n];
        for (dst, &src) in self.perm.iter().enumerate() {
            x[dst * n..(dst + 1) * n].copy_from_slice(rhs.row(src));
        }
        // Forward substitution with unit lower factor. As in `factor`,
        // zero factors are not skipped.
        for i in 1..n {
            for k in 0..i {
                let factor = self.lu[i * n + k];
                let (top, bottom) = x.split_at_mut(i * n);
                let krow = &top[k * n..(k + 1) * n];
                let irow = &mut bottom[..n];
                for (iv, &kv) in irow.iter_mut().zip(krow) {
                    *iv -= factor * kv;
                }
            }
        }
        // Back substitution with the upper factor.
        for i in (0..n).rev() {
            for k in i + 1..n {
                let factor = self.lu[i * n + k];
                let (top, bottom) = x.split_at_mut(k * n);
                let irow = &mut top[i * n..(i + 1) * n];
                let krow = &bottom[..n];
                for (iv, &kv) in irow.iter_mut().zip(krow) {
                    *iv -= factor * kv;
                }
            }
            let diag = self.lu[i * n + i];
            for v in &mut x[i * n..(i + 1) * n] {
                *v /= diag;
            }
        }
        Ok(RealMatrix { n, data: x })
    }

    /// Solves `a x = rhs` for a single right-hand-side vector.
    pub fn solve_vec(&self, rhs: &[f64]) -> Result<Vec<f64>, MatrixError> {
        check_dims(self.n, rhs.len())?;
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&src| rhs[src]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for k in 0..i {
                acc -= self.lu[i * n + k] * x[k];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in i + 1..n {
                acc -= self.lu[i * n + k] * x[k];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        Ok(x)
    }
}

/// Solves `a x = rhs` by one factorization of `a`.
pub fn solve_linear(a: &RealMatrix, rhs: &RealMatrix) -> Result<RealMatrix, MatrixError> {
    LuFactors::factor(a)?.solve(rhs)
}

/// Inverts `a`, or reports the failing pivot column.
pub fn invert(a: &RealMatrix) -> Result<RealMatrix, MatrixError> {
    LuFactors::factor(a)?.solve(&RealMatrix::identity(a.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matmul;
    use proptest::prelude::*;

    #[test]
    fn inverts_identity_and_scaled_identity() {
        let id = RealMatrix::identity(4);
        assert!(invert(&id).unwrap().max_abs_diff(&id).unwrap() < 1e-15);
        let double = id.scale(2.0);
        let half = invert(&double).unwrap();
        assert!(half.max_abs_diff(&RealMatrix::identity(4).scale(0.5)).unwrap() < 1e-15);
    }

    #[test]
    fn reports_the_failing_pivot_column() {
        // Second column is a multiple of the first.
        let a = RealMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![2.0, 4.0, 1.0],
            vec![3.0, 6.0, 2.0],
        ]);
        match LuFactors::factor(&a) {
            Err(MatrixError::Singular { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
        assert!(matches!(invert(&a), Err(MatrixError::Singular { .. })));
    }

    #[test]
    fn zero_matrix_is_singular_at_the_first_column() {
        assert_eq!(
            LuFactors::factor(&RealMatrix::zeros(3)).err(),
            Some(MatrixError::Singular { pivot: 0 })
        );
    }

    #[test]
    fn solves_a_fixed_system_exactly_enough() {
        let a = RealMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let rhs = RealMatrix::from_rows(&[vec![5.0, 1.0], vec![10.0, 2.0]]);
        let x = solve_linear(&a, &rhs).unwrap();
        let back = matmul(&a, &x).unwrap();
        assert!(back.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    /// Random diagonally dominant matrices: comfortably invertible, so the
    /// residual bound below is about the solver, not the conditioning.
    fn dominant(n: usize) -> impl Strategy<Value = RealMatrix> {
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |mut data| {
            for i in 0..n {
                data[i * n + i] = n as f64 + 1.0;
            }
            RealMatrix { n, data }
        })
    }

    proptest! {
        #[test]
        fn inverse_residual_stays_small(a in (1usize..9).prop_flat_map(dominant)) {
            let n = a.n();
            let inv = invert(&a).unwrap();
            let residual = matmul(&a, &inv)
                .unwrap()
                .max_abs_diff(&RealMatrix::identity(n))
                .unwrap();
            prop_assert!(residual < 1e-9 * n as f64, "residual {residual}");
        }
    }
}
