//! Sparse and dense linear algebra: CSR storage, 3x3 block operators,
//! Krylov solvers and a small dense LU.

mod block;
mod csr;
mod dense;
mod krylov;
mod mm;

pub use block::{Block, BlockOperator};
pub use csr::{CsrMatrix, Scalar, SparseMatrix};
pub use dense::{direct_small_solve, direct_small_solve_sparse, DenseLu, DenseMatrix, DEFAULT_DIRECT_CAP};
pub use krylov::{
    cg, fgmres, Diagonal, FnOperator, Identity, KrylovConfig, KrylovMethod, LinearOperator,
    SolveReport,
};
pub use mm::{read_matrix_market, write_matrix_market};
