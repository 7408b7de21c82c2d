use faer::linalg::solvers::SolveCore;
use faer::sparse::{linalg::solvers::Llt, SparseColMat, Triplet};
use faer::{Conj, Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{cg, fgmres, Diagonal, Identity, KrylovConfig, KrylovMethod, SparseMatrix};

/// How each Schur-complement block is inverted inside the preconditioner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerKind {
    /// GMRES on the block to a relative tolerance.
    Gmres,
    /// Conjugate gradients on the diagonally symmetrized block.
    Cg,
    /// Sparse Cholesky of the symmetrized block (exact inverse).
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerSolverConfig {
    pub kind: InnerKind,
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    /// Jacobi preconditioning of the inner iteration.
    pub jacobi: bool,
}

impl Default for InnerSolverConfig {
    fn default() -> Self {
        Self { kind: InnerKind::Gmres, tol: 1e-2, max_iter: 500, restart: 50, jacobi: true }
    }
}

impl InnerSolverConfig {
    pub fn exact() -> Self {
        Self { kind: InnerKind::Exact, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("inner tolerance {} outside (0, 1)", self.tol)));
        }
        if self.max_iter == 0 || self.restart == 0 {
            return Err(Error::InvalidArgument("inner iteration limits must be positive".into()));
        }
        Ok(())
    }
}

/// Accumulated inner-solve statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerStats {
    pub iterations: usize,
    pub converged: bool,
    pub failures: usize,
    pub applications: usize,
}

/// Approximate (or exact) inverse of one diagonal block of `S`.
pub enum BlockInverse {
    /// Multiplication by a constant.
    Scaled(f64),
    Gmres { matrix: SparseMatrix, jacobi: Option<Diagonal>, cfg: KrylovConfig },
    /// CG on `W S` with right-hand side `W r`.
    Cg { symmetric: SparseMatrix, weight: Vec<f64>, jacobi: Option<Diagonal>, tol: f64, max_iter: usize },
    Exact { llt: Llt<usize, f64>, weight: Vec<f64> },
}

impl std::fmt::Debug for BlockInverse {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            BlockInverse::Scaled(_) => "Scaled",
            BlockInverse::Gmres { .. } => "Gmres",
            BlockInverse::Cg { .. } => "Cg",
            BlockInverse::Exact { .. } => "Exact",
        };
        f.write_str(name)
    }
}

/// Sparse Cholesky factor of a symmetric positive definite matrix (lower triangle read).
pub fn cholesky(a: &SparseMatrix) -> Result<Llt<usize, f64>> {
    let lower: Vec<Triplet<usize, usize, f64>> =
        a.triplets().filter(|&(i, j, _)| i >= j).map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(a.nrows(), a.ncols(), &lower)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    m.sp_cholesky(Side::Lower).map_err(|e| Error::Factorization(format!("{e:?}")))
}

impl BlockInverse {
    /// `weight` is the diagonal making `diag(weight) block` symmetric.
    pub fn new(block: &SparseMatrix, weight: &[f64], cfg: &InnerSolverConfig) -> Result<Self> {
        let jac = |m: &SparseMatrix| cfg.jacobi.then(|| Diagonal::jacobi(m));
        Ok(match cfg.kind {
            InnerKind::Gmres => BlockInverse::Gmres {
                matrix: block.clone(),
                jacobi: jac(block),
                cfg: KrylovConfig { method: KrylovMethod::Gmres, tol: cfg.tol, restart: cfg.restart, max_iter: cfg.max_iter },
            },
            InnerKind::Cg => {
                let symmetric = block.scale_rows(weight);
                BlockInverse::Cg {
                    jacobi: jac(&symmetric),
                    symmetric,
                    weight: weight.to_vec(),
                    tol: cfg.tol,
                    max_iter: cfg.max_iter,
                }
            }
            InnerKind::Exact => {
                BlockInverse::Exact { llt: cholesky(&block.scale_rows(weight))?, weight: weight.to_vec() }
            }
        })
    }

    /// Replaces `r` by the approximate solution of `S z = r` (zero initial guess).
    pub fn solve_in_place(&self, r: &mut [f64]) -> InnerStats {
        let ok = InnerStats { iterations: 0, converged: true, failures: 0, applications: 1 };
        let n = r.len();
        if n == 0 {
            return ok;
        }
        let from = |res: Result<(Vec<f64>, crate::sparse::SolveReport)>, r: &mut [f64]| match res {
            Ok((z, rep)) => {
                r.copy_from_slice(&z);
                InnerStats {
                    iterations: rep.iterations,
                    converged: rep.converged,
                    failures: usize::from(!rep.converged),
                    applications: 1,
                }
            }
            Err(_) => InnerStats { iterations: 0, converged: false, failures: 1, applications: 1 },
        };
        match self {
            BlockInverse::Scaled(s) => {
                r.iter_mut().for_each(|v| *v *= s);
                ok
            }
            BlockInverse::Gmres { matrix, jacobi, cfg } => {
                let x0 = vec![0.0; n];
                let res = match jacobi {
                    Some(d) => fgmres(matrix, d, r, &x0, cfg, None),
                    None => fgmres(matrix, &Identity(n), r, &x0, cfg, None),
                };
                from(res, r)
            }
            BlockInverse::Cg { symmetric, weight, jacobi, tol, max_iter } => {
                let rhs: Vec<f64> = r.iter().zip(weight).map(|(a, w)| a * w).collect();
                let x0 = vec![0.0; n];
                let res = match jacobi {
                    Some(d) => cg(symmetric, d, &rhs, &x0, *tol, *max_iter),
                    None => cg(symmetric, &Identity(n), &rhs, &x0, *tol, *max_iter),
                };
                from(res, r)
            }
            BlockInverse::Exact { llt, weight } => {
                let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| r[i] * weight[i]);
                llt.solve_in_place_with_conj(Conj::No, rhs.as_mut());
                for (i, v) in r.iter_mut().enumerate() {
                    *v = rhs[(i, 0)];
                }
                ok
            }
        }
    }
}
