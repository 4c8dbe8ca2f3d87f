//! Dense square matrices over `f64` and `{0,1}`, plus the handful of
//! operations the equation solvers need: products, transposes, the `min1`
//! cap, norms, Kronecker products, column-stacking `vec`/`unvec`, LU-based
//! inversion and linear solves, and positivity thresholding.
//!
//! Everything here is deterministic: products accumulate over the inner
//! index in ascending order for every output element, independent of input
//! sparsity, so repeated runs produce bit-identical floats. The kernels do
//! uniform dense work on purpose — method timings stay comparable across
//! input densities instead of rewarding whichever method happens to touch
//! sparser operands.

mod dump;
mod lu;

pub use dump::{read_matrix, write_matrix, DumpError, MatrixPayload};
pub use lu::{invert, solve_linear, LuFactors};

use std::fmt;

/// Relative pivot tolerance for LU factorization: a pivot whose magnitude
/// does not exceed `SINGULAR_PIVOT_REL_TOL * inf_norm(a)` stops the
/// factorization with [`MatrixError::Singular`].
pub const SINGULAR_PIVOT_REL_TOL: f64 = 1e-12;

/// Errors raised by matrix operations.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixError {
    /// Operand dimensions do not agree.
    DimMismatch { left: usize, right: usize },
    /// A pivot fell below the singularity tolerance during factorization;
    /// `pivot` is the zero-based elimination column that failed.
    Singular { pivot: usize },
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::DimMismatch { left, right } => {
                write!(f, "matrix dimension mismatch: {left} vs {right}")
            }
            MatrixError::Singular { pivot } => {
                write!(f, "matrix is singular (no acceptable pivot in column {pivot})")
            }
        }
    }
}

impl std::error::Error for MatrixError {}

/// Dense square `f64` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(n: usize) -> Self {
        RealMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RealMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from explicit rows; every row must have the same
    /// length as the row count. Intended for tests and small fixtures.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "from_rows requires square input");
            data.extend_from_slice(row);
        }
        RealMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> RealMatrix {
        let n = self.n;
        let mut out = RealMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    /// Scales every entry by `s`.
    pub fn scale(&self, s: f64) -> RealMatrix {
        RealMatrix { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// Elementwise sum.
    pub fn add(&self, other: &RealMatrix) -> Result<RealMatrix, MatrixError> {
        check_dims(self.n, other.n)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(RealMatrix { n: self.n, data })
    }

    /// Caps every entry at one: `min1(x) = 1 if x >= 1, else x`.
    pub fn min1(&self) -> RealMatrix {
        let data = self.data.iter().map(|&v| if v >= 1.0 { 1.0 } else { v }).collect();
        RealMatrix { n: self.n, data }
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        let n = self.n;
        let mut best = 0.0f64;
        for i in 0..n {
            let s: f64 = self.row(i).iter().map(|v| v.abs()).sum();
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let n = self.n;
        let mut sums = vec![0.0f64; n];
        for i in 0..n {
            let row = self.row(i);
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest entry (not absolute value; the engine's matrices are
    /// nonnegative). Returns 0 for an empty matrix.
    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Largest absolute entrywise difference; useful as a residual measure.
    pub fn max_abs_diff(&self, other: &RealMatrix) -> Result<f64, MatrixError> {
        check_dims(self.n, other.n)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

#[inline]
fn check_dims(left: usize, right: usize) -> Result<(), MatrixError> {
    if left == right {
        Ok(())
    } else {
        Err(MatrixError::DimMismatch { left, right })
    }
}

/// `a * b`. Accumulation order is the inner index ascending for every
/// output element; no sparsity shortcuts, so the flop count depends only
/// on the dimension.
pub fn matmul(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix, MatrixError> {
    check_dims(a.n, b.n)?;
    let n = a.n;
    let mut out = vec![0.0f64; n * n];
    for i in 0..n {
        let arow = &a.data[i * n..(i + 1) * n];
        let orow = &mut out[i * n..(i + 1) * n];
        for (k, &aik) in arow.iter().enumerate() {
            let brow = &b.data[k * n..(k + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += aik * bv;
            }
        }
    }
    Ok(RealMatrix { n, data: out })
}

/// Kronecker product of two square matrices; the result has dimension
/// `a.n() * b.n()`. Entry `((ia*nb + ib), (ja*nb + jb))` is
/// `a[ia,ja] * b[ib,jb]`.
pub fn kron(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let (na, nb) = (a.n, b.n);
    let n = na * nb;
    let mut out = RealMatrix::zeros(n);
    for ia in 0..na {
        for ja in 0..na {
            let av = a.get(ia, ja);
            if av == 0.0 {
                // Pure block fill; skipping zero blocks writes the same
                // zeros the multiplication would.
                continue;
            }
            for ib in 0..nb {
                let dst = (ia * nb + ib) * n + ja * nb;
                let src = ib * nb;
                for jb in 0..nb {
                    out.data[dst + jb] = av * b.data[src + jb];
                }
            }
        }
    }
    out
}

/// Column-stacking vectorization: `vec(A)[j*n + i] = A[i,j]`.
pub fn vec_cols(a: &RealMatrix) -> Vec<f64> {
    let n = a.n;
    let mut v = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            v.push(a.data[i * n + j]);
        }
    }
    v
}

/// Inverse of [`vec_cols`]: reshapes a length-`n*n` vector back into a
/// square matrix, reading columns first.
pub fn unvec_cols(v: &[f64], n: usize) -> RealMatrix {
    assert_eq!(v.len(), n * n, "unvec_cols requires n*n entries");
    let mut m = RealMatrix::zeros(n);
    for j in 0..n {
        for i in 0..n {
            m.data[i * n + j] = v[j * n + i];
        }
    }
    m
}

/// Entries strictly above `tau` become ones; everything else zeros.
pub fn threshold_positive(a: &RealMatrix, tau: f64) -> BitMatrix {
    let data = a.data.iter().map(|&v| u8::from(v > tau)).collect();
    BitMatrix { n: a.n, data }
}

/// Dense square 0/1 matrix, row-major, one byte per entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    data: Vec<u8>,
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        BitMatrix { n, data: vec![0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "from_rows requires square input");
            for &v in row {
                assert!(v <= 1, "bit matrix entries must be 0 or 1");
                data.push(v);
            }
        }
        BitMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.n + j] != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.data[i * self.n + j] = u8::from(v);
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    pub fn transpose(&self) -> BitMatrix {
        let n = self.n;
        let mut out = BitMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    /// Widens to a real matrix with the same 0/1 entries.
    pub fn to_real(&self) -> RealMatrix {
        RealMatrix { n: self.n, data: self.data.iter().map(|&v| f64::from(v)).collect() }
    }

    /// Product with exact witness counts: entry `(i,j)` is the number of
    /// `k` with `self[i,k] = other[k,j] = 1`. Counts are exact (they are
    /// bounded by the dimension, far below the `f64` integer range).
    pub fn count_product(&self, other: &BitMatrix) -> Result<RealMatrix, MatrixError> {
        check_dims(self.n, other.n)?;
        matmul(&self.to_real(), &other.to_real())
    }

    /// Boolean product: [`BitMatrix::count_product`] capped by `min1`.
    pub fn product_min1(&self, other: &BitMatrix) -> Result<BitMatrix, MatrixError> {
        Ok(threshold_positive(&self.count_product(other)?, 0.0))
    }

    /// Coordinates of entries that differ from `other`, in row-major order.
    pub fn diff_coords(&self, other: &BitMatrix) -> Result<Vec<(usize, usize)>, MatrixError> {
        check_dims(self.n, other.n)?;
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.data[i * self.n + j] != other.data[i * self.n + j] {
                    out.push((i, j));
                }
            }
        }
        Ok(out)
    }
}
