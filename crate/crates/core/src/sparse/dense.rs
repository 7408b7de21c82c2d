use std::ops::{Index, IndexMut};

use super::SparseMatrix;
use crate::error::{Error, Result};

/// Default dimension cap for [`direct_small_solve`].
pub const DEFAULT_DIRECT_CAP: usize = 20_000;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![0.0; nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.ncols, b.nrows);
        let mut c = DenseMatrix::zeros(self.nrows, b.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..b.ncols {
                    c.data[i * b.ncols + j] += a * b.data[k * b.ncols + j];
                }
            }
        }
        c
    }

    pub fn max_abs_diff(&self, o: &DenseMatrix) -> f64 {
        assert_eq!((self.nrows, self.ncols), (o.nrows, o.ncols));
        self.data.iter().zip(&o.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct DenseLu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Factors `a`. A pivot smaller than `1e-14` times the infinity norm of its
    /// original row is reported as [`Error::SingularMatrix`].
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        let n = a.nrows;
        if a.ncols != n {
            return Err(Error::DimensionMismatch("LU needs a square matrix".into()));
        }
        let row_norms: Vec<f64> =
            (0..n).map(|i| a.row(i).iter().fold(0.0, |m: f64, v| m.max(v.abs()))).collect();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if !(pv >= 1e-14 * row_norms[perm[p]]) || pv == 0.0 {
                return Err(Error::SingularMatrix { row: k, pivot: pv });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                if f == 0.0 {
                    continue;
                }
                lu[(i, k)] = f;
                let (top, bottom) = lu.data.split_at_mut(i * n);
                let rk = &top[k * n + k + 1..k * n + n];
                let ri = &mut bottom[k + 1..n];
                for (x, y) in ri.iter_mut().zip(rk) {
                    *x -= f * y;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }
}

/// Dense LU solve of a sparse or dense system, refusing systems larger than `cap`.
pub fn direct_small_solve(a: &DenseMatrix, b: &[f64], cap: usize) -> Result<Vec<f64>> {
    if a.nrows() > cap {
        return Err(Error::SizeCap { size: a.nrows(), cap });
    }
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch("right-hand side length".into()));
    }
    Ok(DenseLu::factor(a)?.solve(b))
}

/// Convenience wrapper densifying a sparse matrix first.
pub fn direct_small_solve_sparse(a: &SparseMatrix, b: &[f64], cap: usize) -> Result<Vec<f64>> {
    if a.nrows() > cap {
        return Err(Error::SizeCap { size: a.nrows(), cap });
    }
    direct_small_solve(&a.to_dense(), b, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve_returns_rhs() {
        let b = [1.0, -2.0, 3.5];
        let x = direct_small_solve(&DenseMatrix::identity(3), &b, DEFAULT_DIRECT_CAP).unwrap();
        assert_eq!(x, b.to_vec());
    }

    #[test]
    fn hilbert_inverse_matches_exact_rational_inverse() {
        // Exact inverse entries of the n x n Hilbert matrix:
        // (-1)^(i+j) (i+j+1) C(n+i, n-j-1) C(n+j, n-i-1) C(i+j, i)^2.
        fn binom(n: i64, k: i64) -> i64 {
            if k < 0 || k > n {
                return 0;
            }
            (0..k).fold(1i64, |acc, t| acc * (n - t) / (t + 1))
        }
        let n = 5usize;
        let h = DenseMatrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64);
        let lu = DenseLu::factor(&h).unwrap();
        let ni = n as i64;
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = lu.solve(&e);
            for i in 0..n {
                let (ii, jj) = (i as i64, j as i64);
                let sign = if (ii + jj) % 2 == 0 { 1 } else { -1 };
                let exact = sign
                    * (ii + jj + 1)
                    * binom(ni + ii, ni - jj - 1)
                    * binom(ni + jj, ni - ii - 1)
                    * binom(ii + jj, ii).pow(2);
                let rel = (col[i] - exact as f64).abs() / (exact as f64).abs();
                assert!(rel < 1e-8, "entry ({i},{j}): {} vs {exact}", col[i]);
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = DenseMatrix::from_fn(3, 3, |i, j| (i + j) as f64);
        assert!(matches!(
            direct_small_solve(&a, &[1.0, 2.0, 3.0], DEFAULT_DIRECT_CAP),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn size_cap_is_enforced() {
        let a = DenseMatrix::identity(4);
        assert!(matches!(direct_small_solve(&a, &[0.0; 4], 3), Err(Error::SizeCap { .. })));
    }
}
