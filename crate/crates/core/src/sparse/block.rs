use super::{LinearOperator, SparseMatrix};
use crate::error::{Error, Result};

/// One block of a [`BlockOperator`].
#[derive(Clone, Debug)]
pub enum Block {
    Sparse(SparseMatrix),
    ScaledIdentity(f64),
    Diagonal(Vec<f64>),
}

impl Block {
    fn shape_ok(&self, rows: usize, cols: usize) -> bool {
        match self {
            Block::Sparse(m) => m.nrows() == rows && m.ncols() == cols,
            Block::ScaledIdentity(_) => rows == cols,
            Block::Diagonal(d) => rows == cols && d.len() == rows,
        }
    }

    /// `y += self * x`.
    fn apply_add(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Block::Sparse(m) => m.spmv_add(1.0, x, y).expect("block shape checked on insert"),
            Block::ScaledIdentity(s) => y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += s * xi),
            Block::Diagonal(d) => {
                y.iter_mut().zip(x).zip(d).for_each(|((yi, xi), di)| *yi += di * xi)
            }
        }
    }

    pub fn to_sparse(&self, n: usize) -> SparseMatrix {
        match self {
            Block::Sparse(m) => m.clone(),
            Block::ScaledIdentity(s) => SparseMatrix::from_diagonal(&vec![*s; n]),
            Block::Diagonal(d) => SparseMatrix::from_diagonal(d),
        }
    }
}

/// A 3x3 grid of optional blocks acting on stacked `(B, E, p)` vectors.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    row_dims: [usize; 3],
    col_dims: [usize; 3],
    blocks: [[Option<Block>; 3]; 3],
}

impl BlockOperator {
    pub fn new(row_dims: [usize; 3], col_dims: [usize; 3]) -> Self {
        Self { row_dims, col_dims, blocks: Default::default() }
    }

    /// Square operator with the same block sizes for rows and columns.
    pub fn square(dims: [usize; 3]) -> Self {
        Self::new(dims, dims)
    }

    pub fn set(&mut self, i: usize, j: usize, block: Block) -> Result<()> {
        if !block.shape_ok(self.row_dims[i], self.col_dims[j]) {
            return Err(Error::DimensionMismatch(format!(
                "block ({i},{j}) must be {}x{}",
                self.row_dims[i], self.col_dims[j]
            )));
        }
        self.blocks[i][j] = Some(block);
        Ok(())
    }

    pub fn with(mut self, i: usize, j: usize, block: Block) -> Result<Self> {
        self.set(i, j, block)?;
        Ok(self)
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&Block> {
        self.blocks[i][j].as_ref()
    }

    pub fn row_dims(&self) -> [usize; 3] {
        self.row_dims
    }

    pub fn col_dims(&self) -> [usize; 3] {
        self.col_dims
    }

    pub fn row_offsets(&self) -> [usize; 4] {
        offsets(self.row_dims)
    }

    pub fn col_offsets(&self) -> [usize; 4] {
        offsets(self.col_dims)
    }

    /// Explicit single sparse matrix with the same action.
    pub fn flatten(&self) -> SparseMatrix {
        let ro = self.row_offsets();
        let co = self.col_offsets();
        let mut trip = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if let Some(b) = &self.blocks[i][j] {
                    let m = b.to_sparse(self.row_dims[i]);
                    trip.extend(m.triplets().map(|(r, c, v)| (r + ro[i], c + co[j], v)));
                }
            }
        }
        SparseMatrix::from_triplets(ro[3], co[3], &trip)
    }
}

pub(crate) fn offsets(d: [usize; 3]) -> [usize; 4] {
    [0, d[0], d[0] + d[1], d[0] + d[1] + d[2]]
}

impl LinearOperator for BlockOperator {
    fn nrows(&self) -> usize {
        self.row_dims.iter().sum()
    }

    fn ncols(&self) -> usize {
        self.col_dims.iter().sum()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let ro = self.row_offsets();
        let co = self.col_offsets();
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..3 {
            let yi = &mut y[ro[i]..ro[i + 1]];
            for j in 0..3 {
                if let Some(b) = &self.blocks[i][j] {
                    b.apply_add(&x[co[j]..co[j + 1]], yi);
                }
            }
        }
    }
}
