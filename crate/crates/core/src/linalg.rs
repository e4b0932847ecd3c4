//! Small dense linear-algebra kernel.
//!
//! Everything here is sized for desk-scale problems (a few hundred rows at
//! most): row-major storage, a cyclic Jacobi eigensolver for symmetric
//! matrices, and a Cholesky solver whose failure doubles as the
//! positive-definiteness test.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

/// Off-diagonal Frobenius norm, relative to the input norm, at which the
/// Jacobi iteration stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

/// Smallest admissible Cholesky pivot, relative to `1 + max diagonal`.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Asymmetry allowed by [`sym_eigenvalues`], relative to `1 + max |entry|`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// `data.len()` does not equal `rows * cols`.
    Shape {
        rows: usize,
        cols: usize,
        len: usize,
    },
    NonFinite,
    NotSquare {
        rows: usize,
        cols: usize,
    },
    NotSymmetric {
        max_asymmetry: f64,
    },
    /// Operand dimensions do not line up.
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    /// Cholesky hit a pivot at or below the floor.
    NotPositiveDefinite {
        pivot_index: usize,
        pivot: f64,
    },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Shape { rows, cols, len } => {
                write!(f, "{len} entries cannot form a {rows}x{cols} matrix")
            }
            Self::NonFinite => f.write_str("matrix has a non-finite entry"),
            Self::NotSquare { rows, cols } => write!(f, "expected a square matrix, got {rows}x{cols}"),
            Self::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (max |m_ij - m_ji| = {max_asymmetry:e})")
            }
            Self::DimensionMismatch { left, right } => write!(
                f,
                "dimension mismatch: {}x{} against {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Self::NotPositiveDefinite { pivot_index, pivot } => {
                write!(f, "matrix is not positive definite (pivot {pivot_index} = {pivot:e})")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// Row-major dense matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Column vector of ones, `1_n`.
    pub fn ones(n: usize) -> Self {
        Self {
            rows: n,
            cols: 1,
            data: vec![1.0; n],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::Shape {
                    rows: rows.len(),
                    cols,
                    len: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn column_vector(values: &[f64]) -> Result<Self, LinalgError> {
        Self::from_row_major(values.len(), 1, values.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if self.cols != x.len() {
            return Err(LinalgError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest `|m_ij - m_ji|`; infinite for non-square input.
    pub fn max_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// All eigenvalues of a symmetric matrix, ascending.
///
/// Cyclic Jacobi rotations; stops once the off-diagonal Frobenius norm drops
/// below [`JACOBI_TOLERANCE`] times the norm of the input.
pub fn sym_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let asym = m.max_asymmetry();
    if asym > SYMMETRY_TOLERANCE * (1.0 + m.max_abs()) {
        return Err(LinalgError::NotSymmetric { max_asymmetry: asym });
    }
    let n = m.rows;
    // Work on the exactly symmetrized copy.
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    let threshold = JACOBI_TOLERANCE * a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                rotate(&mut a, p, q, c, s);
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..a.rows {
        for j in 0..a.cols {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    libm::sqrt(s)
}

/// Applies `Jᵀ A J` for the Givens rotation in the (p, q) plane.
fn rotate(a: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}

/// Lower-triangular Cholesky factor `L` with `h = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: DenseMatrix,
}

impl Cholesky {
    pub fn factor(h: &DenseMatrix) -> Result<Self, LinalgError> {
        if !h.is_square() {
            return Err(LinalgError::NotSquare {
                rows: h.rows,
                cols: h.cols,
            });
        }
        let n = h.rows;
        let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max);
        let floor = PIVOT_FLOOR * (1.0 + scale);
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = h[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= floor || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite {
                    pivot_index: j,
                    pivot: d,
                });
            }
            let d = libm::sqrt(d);
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut v = h[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / d;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    /// Solves `h X = rhs` column by column.
    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        let n = self.lower.rows;
        if rhs.rows != n {
            return Err(LinalgError::DimensionMismatch {
                left: (n, n),
                right: (rhs.rows, rhs.cols),
            });
        }
        let l = &self.lower;
        let mut x = rhs.clone();
        for c in 0..rhs.cols {
            for i in 0..n {
                let mut v = x[(i, c)];
                for k in 0..i {
                    v -= l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = v / l[(i, i)];
            }
            for i in (0..n).rev() {
                let mut v = x[(i, c)];
                for k in (i + 1)..n {
                    v -= l[(k, i)] * x[(k, c)];
                }
                x[(i, c)] = v / l[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.lower.rows;
        self.solve(&DenseMatrix::identity(n))
            .expect("identity has matching rows")
    }
}

/// Solves `h X = rhs` for symmetric positive definite `h`.
///
/// Returns [`LinalgError::NotPositiveDefinite`] when the factorization breaks
/// down; for the composite matrix `H = L + Σ B^q` this is the signature of an
/// augmented graph that is not connected.
pub fn solve_spd(h: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    Cholesky::factor(h)?.solve(rhs)
}

/// True iff every entry is `>= -tol` and every row sums to `1 ± tol`.
pub fn is_row_stochastic(m: &DenseMatrix, tol: f64) -> bool {
    (0..m.rows).all(|i| {
        let row = m.row(i);
        row.iter().all(|&v| v >= -tol) && (row.iter().sum::<f64>() - 1.0).abs() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn kron_identity_with_ones() {
        let k = kron(&DenseMatrix::identity(2), &DenseMatrix::ones(2));
        assert_eq!(k, m(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]]));
    }

    #[test]
    fn kron_scalar_scales() {
        let b = m(&[&[1.0, -2.0], &[0.5, 3.0]]);
        assert_eq!(kron(&m(&[&[2.0]]), &b), b.scale(2.0));
    }

    #[test]
    fn eigenvalues_of_path_laplacian() {
        // Characteristic polynomial λ(λ² − 4λ + 3).
        let l = m(&[&[1.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 1.0]]);
        let eig = sym_eigenvalues(&l).unwrap();
        for (got, want) in eig.iter().zip([0.0, 1.0, 3.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn eigenvalues_trivial_cases() {
        assert_eq!(sym_eigenvalues(&DenseMatrix::zeros(3, 3)).unwrap(), [0.0, 0.0, 0.0]);
        assert_eq!(
            sym_eigenvalues(&DenseMatrix::from_diagonal(&[5.0, 2.0])).unwrap(),
            [2.0, 5.0]
        );
        assert!(sym_eigenvalues(&DenseMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn eigenvalues_reject_bad_input() {
        assert!(matches!(
            sym_eigenvalues(&DenseMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
        assert!(matches!(
            sym_eigenvalues(&m(&[&[1.0, 2.0], &[0.0, 1.0]])),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn solve_two_by_two() {
        // Inverse of [[2,-1],[-1,1]] is [[1,1],[1,2]].
        let h = m(&[&[2.0, -1.0], &[-1.0, 1.0]]);
        let x = solve_spd(&h, &DenseMatrix::column_vector(&[1.0, 0.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(x[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[(1, 0)], 1.0, epsilon = 1e-12);
        let inv = Cholesky::factor(&h).unwrap().inverse();
        for (got, want) in inv.as_slice().iter().zip([1.0, 1.0, 1.0, 2.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let rhs = m(&[&[1.5, -2.0], &[0.0, 7.0], &[3.0, 1e-3]]);
        assert_eq!(solve_spd(&DenseMatrix::identity(3), &rhs).unwrap(), rhs);
    }

    #[test]
    fn solve_singular_is_not_positive_definite() {
        let h = m(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        let err = solve_spd(&h, &DenseMatrix::ones(2)).unwrap_err();
        assert!(matches!(err, LinalgError::NotPositiveDefinite { pivot_index: 1, .. }));
    }

    #[test]
    fn solve_rejects_row_mismatch() {
        let err = solve_spd(&DenseMatrix::identity(2), &DenseMatrix::ones(3)).unwrap_err();
        assert!(matches!(err, LinalgError::DimensionMismatch { .. }));
    }

    #[test]
    fn row_stochastic_predicate() {
        assert!(is_row_stochastic(&m(&[&[0.5, 0.5], &[1.0, 0.0]]), 1e-9));
        assert!(!is_row_stochastic(&m(&[&[1.2, -0.2]]), 1e-9));
        assert!(!is_row_stochastic(&m(&[&[0.5, 0.4]]), 1e-9));
        // The chain equilibrium weights W = [1; 1].
        assert!(is_row_stochastic(&DenseMatrix::ones(2), 1e-9));
    }

    #[test]
    fn constructor_validation() {
        assert!(matches!(
            DenseMatrix::from_row_major(2, 2, vec![1.0; 3]),
            Err(LinalgError::Shape { .. })
        ));
        assert_eq!(
            DenseMatrix::from_row_major(1, 1, vec![f64::NAN]),
            Err(LinalgError::NonFinite)
        );
    }
}
