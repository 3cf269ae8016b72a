//! Complex matrix storage and the handful of dense kernels shared by the
//! spectral code: bilinear dots, SVD null spaces, minimum-norm solves.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, ColRef, Mat, MatRef};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Operators up to this dimension are stored densely.
pub const DENSE_LIMIT: usize = 4096;

pub type Vector = Col<C64>;
pub type SparseMat = SparseColMat<usize, C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Clone, Debug)]
pub enum Matrix {
    Dense(Mat<C64>),
    Sparse(SparseMat),
    /// Product of sparse factors; `apply` runs them first to last.
    Factored(Vec<SparseMat>),
}

impl Matrix {
    /// Sums duplicate entries. Storage is dense up to [`DENSE_LIMIT`].
    pub fn from_triplets(dim: usize, entries: &[(usize, usize, C64)]) -> Self {
        if dim <= DENSE_LIMIT {
            Matrix::Dense(dense_from_triplets(dim, entries))
        } else {
            Matrix::Sparse(sparse_from_triplets(dim, entries))
        }
    }

    pub fn identity(dim: usize) -> Self {
        let t: Vec<_> = (0..dim).map(|i| (i, i, ONE)).collect();
        Self::from_triplets(dim, &t)
    }

    pub fn dim(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.nrows(),
            Matrix::Sparse(s) => s.nrows(),
            Matrix::Factored(f) => f.first().map_or(0, |s| s.nrows()),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Matrix::Dense(_))
    }

    pub fn apply(&self, x: ColRef<'_, C64>) -> Vector {
        match self {
            Matrix::Dense(m) => m * x,
            Matrix::Sparse(s) => s * x,
            Matrix::Factored(fs) => {
                let mut y = x.to_owned();
                for f in fs {
                    y = f * &y;
                }
                y
            }
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Sparse(s) => s.to_dense(),
            Matrix::Factored(_) => {
                let n = self.dim();
                let mut out = Mat::zeros(n, n);
                for j in 0..n {
                    let mut e = Col::zeros(n);
                    e[j] = ONE;
                    let c = self.apply(e.as_ref());
                    out.col_mut(j).copy_from(&c);
                }
                out
            }
        }
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        match self {
            Matrix::Dense(m) => {
                let mut t = Vec::new();
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        let v = m[(i, j)];
                        if v != ZERO {
                            t.push((i, j, v));
                        }
                    }
                }
                t
            }
            Matrix::Sparse(s) => {
                let mut t = Vec::with_capacity(s.compute_nnz());
                for j in 0..s.ncols() {
                    let rows = s.row_idx_of_col_raw(j);
                    let vals = s.val_of_col(j);
                    for (&i, &v) in rows.iter().zip(vals) {
                        if v != ZERO {
                            t.push((i, j, v));
                        }
                    }
                }
                t
            }
            Matrix::Factored(_) => Matrix::Dense(self.to_dense()).triplets(),
        }
    }

    pub fn to_sparse(&self) -> SparseMat {
        match self {
            Matrix::Sparse(s) => s.clone(),
            _ => sparse_from_triplets(self.dim(), &self.triplets()),
        }
    }

    /// Frobenius norm (an upper bound for factored operators).
    pub fn norm(&self) -> f64 {
        match self {
            Matrix::Dense(m) => m.norm_l2(),
            Matrix::Sparse(s) => s.val().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
            Matrix::Factored(fs) => fs
                .iter()
                .map(|s| s.val().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
                .product(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.transpose().to_owned()),
            Matrix::Sparse(s) => {
                let t: Vec<_> = Matrix::Sparse(s.clone())
                    .triplets()
                    .into_iter()
                    .map(|(i, j, v)| (j, i, v))
                    .collect();
                Matrix::Sparse(sparse_from_triplets(s.nrows(), &t))
            }
            Matrix::Factored(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for f in fs.iter().rev() {
                    let t: Vec<_> = Matrix::Sparse(f.clone())
                        .triplets()
                        .into_iter()
                        .map(|(i, j, v)| (j, i, v))
                        .collect();
                    out.push(sparse_from_triplets(f.nrows(), &t));
                }
                Matrix::Factored(out)
            }
        }
    }

    /// `a * self + b * other`, keeping dense storage when both are dense.
    pub fn combine(&self, a: C64, other: &Matrix, b: C64) -> Matrix {
        match (self, other) {
            (Matrix::Dense(x), Matrix::Dense(y)) => Matrix::Dense(
                Mat::from_fn(x.nrows(), x.ncols(), |i, j| a * x[(i, j)] + b * y[(i, j)]),
            ),
            _ => {
                let mut t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (i, j, a * v)).collect();
                t.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, b * v)));
                Matrix::from_triplets(self.dim(), &t)
            }
        }
    }
}

pub fn dense_from_triplets(dim: usize, entries: &[(usize, usize, C64)]) -> Mat<C64> {
    let mut m = Mat::zeros(dim, dim);
    for &(i, j, v) in entries {
        m[(i, j)] += v;
    }
    m
}

pub fn sparse_from_triplets(dim: usize, entries: &[(usize, usize, C64)]) -> SparseMat {
    let t: Vec<_> = entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(dim, dim, &t).expect("triplet indices are in range")
}

/// Bilinear dot product: no complex conjugation.
pub fn dot(u: ColRef<'_, C64>, v: ColRef<'_, C64>) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}

pub fn col_from(values: &[C64]) -> Vector {
    Col::from_fn(values.len(), |i| values[i])
}

/// Right singular vectors whose singular value is below `rel_tol * s_max`,
/// together with the full singular value list (descending).
pub fn null_space(a: MatRef<'_, C64>, rel_tol: f64) -> Result<(Mat<C64>, Vec<f64>)> {
    let svd = a.svd().map_err(|e| Error::LinAlg(format!("svd: {e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|x| x.re).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let cut = rel_tol * smax.max(f64::MIN_POSITIVE);
    let n = a.ncols();
    let rank = s.iter().filter(|&&x| x > cut).count();
    let v = svd.V();
    let basis = Mat::from_fn(n, n - rank, |i, k| v[(i, rank + k)]);
    Ok((basis, s))
}

/// Minimum-Euclidean-norm least-squares solution of `a x = b`, dropping
/// singular values below `rel_tol * s_max`. Returns the solution and the
/// number of dropped singular values.
pub fn min_norm_solve(a: MatRef<'_, C64>, b: ColRef<'_, C64>, rel_tol: f64) -> Result<(Vector, usize)> {
    let svd = a.svd().map_err(|e| Error::LinAlg(format!("svd: {e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|x| x.re).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let cut = rel_tol * smax.max(f64::MIN_POSITIVE);
    let (u, v) = (svd.U(), svd.V());
    let mut x = Col::<C64>::zeros(a.ncols());
    let mut dropped = 0;
    for (k, &sk) in s.iter().enumerate() {
        if sk <= cut {
            dropped += 1;
            continue;
        }
        let coef: C64 = (0..a.nrows()).map(|i| u[(i, k)].conj() * b[i]).sum::<C64>() / sk;
        for i in 0..a.ncols() {
            x[i] += v[(i, k)] * coef;
        }
    }
    Ok((x, dropped))
}

/// Orthonormal basis for the column span of `m` (thin QR).
pub fn orthonormalize(m: MatRef<'_, C64>) -> Mat<C64> {
    m.qr().compute_thin_Q()
}

pub fn inverse(m: MatRef<'_, C64>) -> Result<Mat<C64>> {
    let n = m.nrows();
    let lu = m.full_piv_lu();
    let inv = lu.inverse();
    let resid = (m * &inv - Mat::<C64>::identity(n, n)).norm_max();
    if !resid.is_finite() || resid > 1e-6 {
        return Err(Error::Singular(format!("inverse residual {resid:.3e}")));
    }
    Ok(inv)
}

pub fn solve(m: MatRef<'_, C64>, b: ColRef<'_, C64>) -> Vector {
    m.partial_piv_lu().solve(b)
}

/// Identifies the basis an operator or form lives on; algebraic
/// combinations refuse to mix tags.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisTag(pub String);

impl BasisTag {
    pub fn new(s: impl Into<String>) -> Self {
        BasisTag(s.into())
    }

    pub fn ensure_same(&self, other: &BasisTag) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch(self.0.clone(), other.0.clone()))
        }
    }
}

impl std::fmt::Display for BasisTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug)]
pub struct Operator {
    pub matrix: Matrix,
    pub basis: BasisTag,
}

impl Operator {
    pub fn new(matrix: Matrix, basis: BasisTag) -> Self {
        Operator { matrix, basis }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn apply(&self, x: ColRef<'_, C64>) -> Vector {
        self.matrix.apply(x)
    }

    /// `a * self + b * other` on the same basis.
    pub fn combine(&self, a: C64, other: &Operator, b: C64) -> Result<Operator> {
        self.basis.ensure_same(&other.basis)?;
        Ok(Operator::new(self.matrix.combine(a, &other.matrix, b), self.basis.clone()))
    }
}

/// Largest entry modulus.
pub fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}
