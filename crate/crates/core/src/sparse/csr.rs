use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Element type of a [`CsrMatrix`]. Implemented for `f64` and for `i64`, the
/// latter giving exact integer arithmetic for incidence matrices.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Compressed sparse row matrix with strictly increasing column indices per
/// row and no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T: Scalar = f64> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

pub type SparseMatrix = CsrMatrix<f64>;

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a matrix from raw CSR arrays, validating the structure.
    pub fn try_from_csr(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 || row_ptr[0] != 0 {
            return Err(Error::DimensionMismatch("row pointer length".into()));
        }
        if col_idx.len() != values.len() || *row_ptr.last().unwrap() != col_idx.len() {
            return Err(Error::DimensionMismatch("column/value arrays".into()));
        }
        for i in 0..nrows {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidArgument("row pointers not monotone".into()));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= ncols) {
                return Err(Error::InvalidArgument(format!("bad column indices in row {i}")));
            }
            if values[row_ptr[i]..row_ptr[i + 1]].iter().any(|&v| v == T::zero()) {
                return Err(Error::InvalidArgument(format!("explicit zero in row {i}")));
            }
        }
        Ok(Self { nrows, ncols, row_ptr, col_idx, values })
    }

    /// Assembles from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![T::zero(); triplets.len()];
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..nrows {
            let (lo, hi) = (counts[i], counts[i + 1]);
            order.clear();
            order.extend(lo..hi);
            order.sort_by_key(|&k| cols[k]);
            let mut k = 0;
            while k < order.len() {
                let c = cols[order[k]];
                let mut acc = vals[order[k]];
                k += 1;
                while k < order.len() && cols[order[k]] == c {
                    acc += vals[order[k]];
                    k += 1;
                }
                if acc != T::zero() {
                    col_idx.push(c);
                    values.push(acc);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let triplets: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Iterates over all stored `(row, col, value)` entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[T], y: &mut [T]) -> Result<()> {
        self.check_apply(x.len(), y.len())?;
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            *yi = acc;
        }
        Ok(())
    }

    /// Allocating form of [`spmv`](Self::spmv). Panics on dimension mismatch.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.spmv(x, &mut y).expect("mul_vec dimension mismatch");
        y
    }

    fn check_apply(&self, nx: usize, ny: usize) -> Result<()> {
        if nx != self.ncols || ny != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} applied to {} -> {}",
                self.nrows, self.ncols, nx, ny
            )));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                col_idx[next[c]] = i;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, row_ptr: counts, col_idx, values }
    }

    /// Sparse product `A B`. Entries that cancel to exactly zero are dropped.
    pub fn matmul(&self, b: &Self) -> Result<Self> {
        if self.ncols != b.nrows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.nrows, self.ncols, b.nrows, b.ncols
            )));
        }
        let mut acc = vec![T::zero(); b.ncols];
        let mut mark = vec![usize::MAX; b.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.nrows {
            touched.clear();
            let (ac, av) = self.row(i);
            for (&k, &a) in ac.iter().zip(av) {
                let (bc, bv) = b.row(k);
                for (&j, &bval) in bc.iter().zip(bv) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = T::zero();
                        touched.push(j);
                    }
                    acc[j] += a * bval;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != T::zero() {
                    col_idx.push(j);
                    values.push(acc[j]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { nrows: self.nrows, ncols: b.ncols, row_ptr, col_idx, values })
    }

    /// `diag(d) A`.
    pub fn scale_rows(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.nrows, "row scaling length");
        self.map_indexed(|i, _, v| d[i] * v)
    }

    /// `A diag(d)`.
    pub fn scale_cols(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.ncols, "column scaling length");
        self.map_indexed(|_, j, v| v * d[j])
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_indexed(|_, _, v| s * v)
    }

    fn map_indexed(&self, f: impl Fn(usize, usize, T) -> T) -> Self {
        let trip: Vec<_> = self.triplets().map(|(i, j, v)| (i, j, f(i, j, v))).collect();
        Self::from_triplets(self.nrows, self.ncols, &trip)
    }

    /// Entrywise conversion to another scalar type; zeros are dropped.
    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        let trip: Vec<_> = self.triplets().map(|(i, j, v)| (i, j, f(v))).collect();
        CsrMatrix::from_triplets(self.nrows, self.ncols, &trip)
    }

    /// `A + alpha B`.
    pub fn add_scaled(&self, b: &Self, alpha: T) -> Result<Self> {
        if self.nrows != b.nrows || self.ncols != b.ncols {
            return Err(Error::DimensionMismatch("matrix sum".into()));
        }
        let trip: Vec<_> = self
            .triplets()
            .chain(b.triplets().map(|(i, j, v)| (i, j, alpha * v)))
            .collect();
        Ok(Self::from_triplets(self.nrows, self.ncols, &trip))
    }

    /// Selects the rows listed in `rows` and renumbers columns through
    /// `col_map` (global column -> local column, `None` drops the column).
    pub fn submatrix(&self, rows: &[usize], col_map: &[Option<usize>], ncols: usize) -> Self {
        assert_eq!(col_map.len(), self.ncols, "column map length");
        let mut trip = Vec::new();
        for (li, &gi) in rows.iter().enumerate() {
            let (cols, vals) = self.row(gi);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Some(lc) = col_map[c] {
                    trip.push((li, lc, v));
                }
            }
        }
        Self::from_triplets(rows.len(), ncols, &trip)
    }

    /// Number of stored entries in each row.
    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }
}

impl CsrMatrix<f64> {
    /// `y += alpha A x`.
    pub fn spmv_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_apply(x.len(), y.len())?;
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            *yi += alpha * acc;
        }
        Ok(())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> super::DenseMatrix {
        let mut d = super::DenseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// Largest entrywise deviation from symmetry, `max |A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        self.add_scaled(&t, -1.0).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }
}
