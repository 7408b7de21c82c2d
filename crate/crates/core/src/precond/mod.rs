//! Block-factorization preconditioners for the Crank-Nicolson systems.
//!
//! Both the mimetic and the FE system factor exactly as `A = L S U` with
//! unit block-triangular `L`, `U` and block-diagonal `S`, because the discrete
//! curl annihilates the discrete gradient. The preconditioners replace `S^-1`
//! by a block-diagonal `Q` built from inner solves on the Schur complements.

mod inner;
mod verify;

pub use inner::{BlockInverse, InnerKind, InnerSolverConfig, InnerStats};
pub use verify::{
    verify_div_preservation, verify_eigen_clustering, DivergenceReport, EigenReport,
    DENSE_EIGEN_CAP,
};

use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::FeSystem;
use crate::mfd::MfdOperators;
use crate::sparse::{Block, BlockOperator, LinearOperator, SparseMatrix};

/// Which product of factor inverses is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecondKind {
    /// `Q L^-1`.
    Ls,
    /// `U^-1 Q`.
    Su,
    /// `U^-1 Q L^-1`.
    Lsu,
    /// No preconditioning.
    None,
}

impl PrecondKind {
    pub const FACTORED: [PrecondKind; 3] = [PrecondKind::Ls, PrecondKind::Su, PrecondKind::Lsu];

    pub fn name(self) -> &'static str {
        match self {
            PrecondKind::Ls => "ls",
            PrecondKind::Su => "su",
            PrecondKind::Lsu => "lsu",
            PrecondKind::None => "none",
        }
    }
}

impl FromStr for PrecondKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ls" => Ok(PrecondKind::Ls),
            "su" => Ok(PrecondKind::Su),
            "lsu" => Ok(PrecondKind::Lsu),
            "none" => Ok(PrecondKind::None),
            _ => Err(Error::InvalidArgument(format!("unknown preconditioner '{s}'"))),
        }
    }
}

/// Leading diagonal block of `S`.
#[derive(Clone, Debug)]
pub enum FluxBlock {
    /// `(2/tau) I` in the mimetic system.
    ScaledIdentity(f64),
    /// `(2/tau) M_B` in the FE system.
    Sparse(SparseMatrix),
}

/// Schur complements with the positive diagonal weights that make them symmetric.
#[derive(Clone, Debug)]
pub struct SchurComplements {
    pub s_b: FluxBlock,
    pub s_e: SparseMatrix,
    pub s_p: SparseMatrix,
    pub weight_e: Vec<f64>,
    pub weight_p: Vec<f64>,
    /// Relative asymmetry of `diag(weight_e) S_E` and `diag(weight_p) S_p`.
    pub symmetry_defect: [f64; 2],
}

fn weighted_asymmetry(s: &SparseMatrix, w: &[f64]) -> f64 {
    let ws = s.scale_rows(w);
    let scale = ws.max_abs();
    if scale == 0.0 {
        0.0
    } else {
        ws.asymmetry() / scale
    }
}

/// `(2/tau) M + (tau/2) X`, with `M` given as a diagonal or as a matrix.
fn shifted(mass: &SparseMatrix, coupling: &SparseMatrix, tau: f64) -> Result<SparseMatrix> {
    mass.scale(2.0 / tau).add_scaled(coupling, 0.5 * tau)
}

/// Mimetic Schur complements `S_E = (2/tau) I + (tau/2) curl_V curl_D` and
/// `S_p = (2/tau) I + (tau/2) div_D grad_D`.
pub fn build_schur(ops: &MfdOperators, tau: f64) -> Result<SchurComplements> {
    crate::mfd::check_tau(tau)?;
    let [_, ne, np] = ops.dims();
    let s_e = shifted(&SparseMatrix::identity(ne), &ops.curl_v.matmul(&ops.curl_d)?, tau)?;
    let s_p = shifted(&SparseMatrix::identity(np), &ops.div_d.matmul(&ops.grad_d)?, tau)?;
    let weight_e = ops.masses.mt_e.clone();
    let weight_p = ops.masses.mt_p.clone();
    let symmetry_defect = [weighted_asymmetry(&s_e, &weight_e), weighted_asymmetry(&s_p, &weight_p)];
    Ok(SchurComplements { s_b: FluxBlock::ScaledIdentity(2.0 / tau), s_e, s_p, weight_e, weight_p, symmetry_defect })
}

/// FE Schur complements `S_E = (2/tau) M_E + (tau/2) K^T M_B K` and
/// `S_p = (2/tau) M_p + (tau/2) G^T M_E G`, on interior unknowns.
pub fn build_fe_schur(sys: &FeSystem) -> Result<SchurComplements> {
    let tau = sys.tau;
    let k = sys.interior(&sys.ops.curl, 0, 1);
    let g = sys.interior(&sys.ops.grad, 1, 2);
    let mb = sys.interior(&sys.masses.m_b, 0, 0);
    let me = sys.interior(&sys.masses.m_e, 1, 1);
    let mp = sys.interior(&sys.masses.m_p, 2, 2);
    let s_e = shifted(&me, &k.transpose().matmul(&mb)?.matmul(&k)?, tau)?;
    let s_p = shifted(&mp, &g.transpose().matmul(&me)?.matmul(&g)?, tau)?;
    let weight_e = vec![1.0; s_e.nrows()];
    let weight_p = vec![1.0; s_p.nrows()];
    let symmetry_defect = [weighted_asymmetry(&s_e, &weight_e), weighted_asymmetry(&s_p, &weight_p)];
    Ok(SchurComplements { s_b: FluxBlock::Sparse(mb.scale(2.0 / tau)), s_e, s_p, weight_e, weight_p, symmetry_defect })
}

/// `A = L S U` with `L = [[I,0,0],[L21,I,0],[0,L32,I]]` and
/// `U = [[I,U12,0],[0,I,U23],[0,0,I]]`.
#[derive(Clone, Debug)]
pub struct BlockFactorization {
    pub tau: f64,
    pub dims: [usize; 3],
    pub l21: SparseMatrix,
    pub l32: SparseMatrix,
    pub u12: SparseMatrix,
    pub u23: SparseMatrix,
    pub schur: SchurComplements,
}

impl BlockFactorization {
    /// `L21 = -(tau/2) curl_V`, `L32 = -(tau/2) div_D`, `U12 = (tau/2) curl_D`,
    /// `U23 = (tau/2) grad_D`.
    pub fn from_mfd(ops: &MfdOperators, tau: f64) -> Result<Self> {
        let h = 0.5 * tau;
        Ok(Self {
            tau,
            dims: ops.dims(),
            l21: ops.curl_v.scale(-h),
            l32: ops.div_d.scale(-h),
            u12: ops.curl_d.scale(h),
            u23: ops.grad_d.scale(h),
            schur: build_schur(ops, tau)?,
        })
    }

    /// FE analog: `L21 = -(tau/2) K^T`, `L32 = -(tau/2) G^T`, `U12 = (tau/2) K`, `U23 = (tau/2) G`.
    pub fn from_fe(sys: &FeSystem) -> Result<Self> {
        let h = 0.5 * sys.tau;
        let k = sys.interior(&sys.ops.curl, 0, 1);
        let g = sys.interior(&sys.ops.grad, 1, 2);
        Ok(Self {
            tau: sys.tau,
            dims: sys.dims(),
            l21: k.transpose().scale(-h),
            l32: g.transpose().scale(-h),
            u12: k.scale(h),
            u23: g.scale(h),
            schur: build_fe_schur(sys)?,
        })
    }

    fn n(&self) -> usize {
        self.dims.iter().sum()
    }

    fn split_mut<'a>(&self, v: &'a mut [f64]) -> (&'a mut [f64], &'a mut [f64], &'a mut [f64]) {
        let (b, rest) = v.split_at_mut(self.dims[0]);
        let (e, p) = rest.split_at_mut(self.dims[1]);
        (b, e, p)
    }

    /// Forward block substitution with `L`, in place.
    pub fn apply_l_inv(&self, v: &mut [f64]) {
        let (b, e, p) = self.split_mut(v);
        self.l21.spmv_add(-1.0, b, e).expect("factor shapes");
        self.l32.spmv_add(-1.0, e, p).expect("factor shapes");
    }

    /// Backward block substitution with `U`, in place.
    pub fn apply_u_inv(&self, v: &mut [f64]) {
        let (b, e, p) = self.split_mut(v);
        self.u23.spmv_add(-1.0, p, e).expect("factor shapes");
        self.u12.spmv_add(-1.0, e, b).expect("factor shapes");
    }

    /// Multiplication by `L`, in place.
    pub fn apply_l(&self, v: &mut [f64]) {
        let (b, e, p) = self.split_mut(v);
        self.l32.spmv_add(1.0, e, p).expect("factor shapes");
        self.l21.spmv_add(1.0, b, e).expect("factor shapes");
    }

    /// Multiplication by `U`, in place.
    pub fn apply_u(&self, v: &mut [f64]) {
        let (b, e, p) = self.split_mut(v);
        self.u12.spmv_add(1.0, e, b).expect("factor shapes");
        self.u23.spmv_add(1.0, p, e).expect("factor shapes");
    }

    /// The block product `L S U`, formed with sparse products.
    pub fn product(&self) -> Result<BlockOperator> {
        let s_b = match &self.schur.s_b {
            FluxBlock::ScaledIdentity(d) => SparseMatrix::identity(self.dims[0]).scale(*d),
            FluxBlock::Sparse(m) => m.clone(),
        };
        let (s_e, s_p) = (&self.schur.s_e, &self.schur.s_p);
        // L S = [[S_B,0,0],[L21 S_B, S_E, 0],[0, L32 S_E, S_p]]
        let l21s = self.l21.matmul(&s_b)?;
        let l32s = self.l32.matmul(s_e)?;
        let out = BlockOperator::square(self.dims)
            .with(0, 0, Block::Sparse(s_b.clone()))?
            .with(0, 1, Block::Sparse(s_b.matmul(&self.u12)?))?
            .with(1, 0, Block::Sparse(l21s.clone()))?
            .with(1, 1, Block::Sparse(l21s.matmul(&self.u12)?.add_scaled(s_e, 1.0)?))?
            .with(1, 2, Block::Sparse(s_e.matmul(&self.u23)?))?
            .with(2, 0, Block::Sparse(SparseMatrix::zeros(self.dims[2], self.dims[0])))?
            .with(2, 1, Block::Sparse(l32s.clone()))?
            .with(2, 2, Block::Sparse(l32s.matmul(&self.u23)?.add_scaled(s_p, 1.0)?))?;
        Ok(out)
    }
}

/// A factored preconditioner `X` with per-block inverses standing in for `S^-1`.
pub struct BlockPreconditioner {
    pub fact: BlockFactorization,
    pub kind: PrecondKind,
    inverses: [BlockInverse; 3],
    inner_iterations: AtomicUsize,
    inner_failures: AtomicUsize,
    applications: AtomicUsize,
}

impl BlockPreconditioner {
    pub fn new(fact: BlockFactorization, kind: PrecondKind, inner: &InnerSolverConfig) -> Result<Self> {
        inner.validate()?;
        let s = &fact.schur;
        let inv_b = match &s.s_b {
            FluxBlock::ScaledIdentity(d) => BlockInverse::Scaled(1.0 / d),
            FluxBlock::Sparse(m) => BlockInverse::new(m, &vec![1.0; m.nrows()], inner)?,
        };
        let inv_e = BlockInverse::new(&s.s_e, &s.weight_e, inner)?;
        let inv_p = BlockInverse::new(&s.s_p, &s.weight_p, inner)?;
        Ok(Self {
            fact,
            kind,
            inverses: [inv_b, inv_e, inv_p],
            inner_iterations: AtomicUsize::new(0),
            inner_failures: AtomicUsize::new(0),
            applications: AtomicUsize::new(0),
        })
    }

    /// Applies `Q` blockwise, in place.
    fn apply_q(&self, v: &mut [f64]) {
        let (b, e, p) = self.fact.split_mut(v);
        for (inv, block) in self.inverses.iter().zip([b, e, p]) {
            let stats = inv.solve_in_place(block);
            self.inner_iterations.fetch_add(stats.iterations, Ordering::Relaxed);
            if !stats.converged {
                self.inner_failures.fetch_add(1, Ordering::Relaxed);
            }
        }
    }

    /// Total inner iterations, inner non-convergences and applications so far.
    pub fn stats(&self) -> InnerStats {
        InnerStats {
            iterations: self.inner_iterations.load(Ordering::Relaxed),
            converged: self.inner_failures.load(Ordering::Relaxed) == 0,
            failures: self.inner_failures.load(Ordering::Relaxed),
            applications: self.applications.load(Ordering::Relaxed),
        }
    }

    pub fn reset_stats(&self) {
        self.inner_iterations.store(0, Ordering::Relaxed);
        self.inner_failures.store(0, Ordering::Relaxed);
        self.applications.store(0, Ordering::Relaxed);
    }
}

impl LinearOperator for BlockPreconditioner {
    fn nrows(&self) -> usize {
        self.fact.n()
    }
    fn ncols(&self) -> usize {
        self.fact.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.applications.fetch_add(1, Ordering::Relaxed);
        y.copy_from_slice(x);
        match self.kind {
            PrecondKind::None => {}
            PrecondKind::Ls => {
                self.fact.apply_l_inv(y);
                self.apply_q(y);
            }
            PrecondKind::Su => {
                self.apply_q(y);
                self.fact.apply_u_inv(y);
            }
            PrecondKind::Lsu => {
                self.fact.apply_l_inv(y);
                self.apply_q(y);
                self.fact.apply_u_inv(y);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::DualGeometry;
    use crate::fem::{check_equivalence, FeOperators, MassSet};
    use crate::mesh::{build_base_cube_pyramids, refine_uniform, BoundaryMaps};
    use crate::mfd::{assemble_system, build_operators};
    use crate::sparse::{fgmres, KrylovConfig};

    fn ops1() -> MfdOperators {
        let mesh = refine_uniform(&build_base_cube_pyramids().unwrap()).unwrap();
        let dual = DualGeometry::new(&mesh).unwrap();
        build_operators(&mesh, &dual, &BoundaryMaps::new(&mesh))
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn factorization_reproduces_system() {
        let ops = ops1();
        for tau in [0.2, 0.0125] {
            let fact = BlockFactorization::from_mfd(&ops, tau).unwrap();
            let a = assemble_system(&ops, tau).unwrap();
            let r = check_equivalence(&a.a, &fact.product().unwrap(), 1e-12);
            assert!(r.max_abs_diff <= 1e-12 * r.scale, "{r:?}");
        }
    }

    #[test]
    fn schur_complements_symmetrize() {
        let s = build_schur(&ops1(), 0.1).unwrap();
        assert!(s.symmetry_defect[0] < 1e-12 && s.symmetry_defect[1] < 1e-12, "{:?}", s.symmetry_defect);
    }

    #[test]
    fn triangular_inverses_undo_factors() {
        let ops = ops1();
        let fact = BlockFactorization::from_mfd(&ops, 0.05).unwrap();
        let v = pseudo_random(ops.dims().iter().sum(), 3);
        let mut w = v.clone();
        fact.apply_l_inv(&mut w);
        fact.apply_l(&mut w);
        let mut z = v.clone();
        fact.apply_u_inv(&mut z);
        fact.apply_u(&mut z);
        for i in 0..v.len() {
            assert!((w[i] - v[i]).abs() < 1e-13 && (z[i] - v[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_lsu_inverts_system() {
        let ops = ops1();
        let tau = 0.1;
        let a = assemble_system(&ops, tau).unwrap();
        let inner = InnerSolverConfig { kind: InnerKind::Exact, ..Default::default() };
        let x = BlockPreconditioner::new(BlockFactorization::from_mfd(&ops, tau).unwrap(), PrecondKind::Lsu, &inner).unwrap();
        let v = pseudo_random(a.nrows(), 11);
        let mut av = vec![0.0; v.len()];
        a.apply(&v, &mut av);
        let mut xav = vec![0.0; v.len()];
        x.apply(&av, &mut xav);
        let err = v.iter().zip(&xav).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(err <= 1e-10 * nv, "{err}");
    }

    #[test]
    fn inexact_preconditioners_converge_quickly() {
        let ops = ops1();
        let tau = 0.1;
        let a = assemble_system(&ops, tau).unwrap();
        let b = pseudo_random(a.nrows(), 5);
        for kind in PrecondKind::FACTORED {
            let x = BlockPreconditioner::new(
                BlockFactorization::from_mfd(&ops, tau).unwrap(),
                kind,
                &InnerSolverConfig::default(),
            )
            .unwrap();
            let (_, rep) = fgmres(&a, &x, &b, &vec![0.0; b.len()], &KrylovConfig::default(), None).unwrap();
            assert!(rep.converged && rep.iterations <= 12, "{kind:?} {rep:?}");
        }
    }

    #[test]
    fn zero_residual_maps_to_zero() {
        let ops = ops1();
        let x = BlockPreconditioner::new(
            BlockFactorization::from_mfd(&ops, 0.1).unwrap(),
            PrecondKind::Lsu,
            &InnerSolverConfig::default(),
        )
        .unwrap();
        let n = x.nrows();
        let mut y = vec![1.0; n];
        x.apply(&vec![0.0; n], &mut y);
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fe_factorization_reproduces_fe_system() {
        let mesh = refine_uniform(&build_base_cube_pyramids().unwrap()).unwrap();
        let maps = BoundaryMaps::new(&mesh);
        let sys = FeSystem::new(FeOperators::new(&mesh), MassSet::consistent(&mesh), &maps, 0.1).unwrap();
        let fact = BlockFactorization::from_fe(&sys).unwrap();
        let r = check_equivalence(&sys.a, &fact.product().unwrap(), 1e-12);
        assert!(r.max_abs_diff <= 1e-12 * r.scale, "{r:?}");
    }
}
