//! Mimetic operators on the primal/dual mesh pair, the Crank-Nicolson block
//! system, right-hand sides, grid-function interpolation and time stepping.

mod interp;
mod rhs;
mod step;

pub use interp::{
    curl_of_potential, interpolate_b_faces, interpolate_e_edges, interpolate_p_nodes,
    project_current,
};
pub use rhs::{assemble_rhs, assemble_rhs_lifted};
pub use step::{divergence_measure, step_crank_nicolson, StepInput, StepOutput};

use serde::{Deserialize, Serialize};

use crate::dual::DualGeometry;
use crate::error::{Error, Result};
use crate::fem::LumpedMasses;
use crate::mesh::{BoundaryMaps, IncidenceMatrices, TetMesh};
use crate::sparse::{Block, BlockOperator, LinearOperator, SparseMatrix};

/// The six mimetic operators.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub grad_d: SparseMatrix,
    pub div_d: SparseMatrix,
    pub curl_d: SparseMatrix,
    pub grad_v: SparseMatrix,
    pub div_v: SparseMatrix,
    pub curl_v: SparseMatrix,
}

fn inv(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| 1.0 / x).collect()
}

impl OperatorSet {
    /// Operators on all entities, boundary included.
    fn global(inc: &IncidenceMatrices, dual: &DualGeometry) -> Self {
        let g = inc.grad.map(|v| v as f64);
        let k = inc.curl.map(|v| v as f64);
        let gv = inc.voronoi_grad.map(|v| v as f64);
        let grad_d = g.scale_rows(&inv(&dual.edge_lengths));
        let div_d = g.transpose().scale_cols(&dual.dual_face_areas).scale_rows(&inv(&dual.cell_volumes));
        let curl_d = k.scale_cols(&dual.edge_lengths).scale_rows(&inv(&dual.face_areas));
        let grad_v = gv.scale_rows(&inv(&dual.dual_edge_lengths));
        let div_v = gv.transpose().scale_cols(&dual.face_areas).scale_rows(&inv(&dual.tet_volumes));
        let curl_v =
            k.transpose().scale_cols(&dual.dual_edge_lengths).scale_rows(&inv(&dual.dual_face_areas));
        Self { grad_d, div_d, curl_d, grad_v, div_v, curl_v }
    }

    /// Restriction to interior rows and columns (tets are all kept).
    fn interior(&self, maps: &BoundaryMaps) -> Self {
        let (v, e, f, t) = (&maps.vertices, &maps.edges, &maps.faces, &maps.tets);
        Self {
            grad_d: self.grad_d.submatrix(&e.to_global, &v.to_local, v.len()),
            div_d: self.div_d.submatrix(&v.to_global, &e.to_local, e.len()),
            curl_d: self.curl_d.submatrix(&f.to_global, &e.to_local, e.len()),
            grad_v: self.grad_v.submatrix(&f.to_global, &t.to_local, t.len()),
            div_v: self.div_v.submatrix(&t.to_global, &f.to_local, f.len()),
            curl_v: self.curl_v.submatrix(&e.to_global, &f.to_local, f.len()),
        }
    }
}

/// Mimetic operators on the interior degrees of freedom, together with the
/// unrestricted operators used to carry boundary data.
#[derive(Clone, Debug)]
pub struct MfdOperators {
    /// `grad_D`, interior edges x interior vertices.
    pub grad_d: SparseMatrix,
    /// `div_D`, interior vertices x interior edges.
    pub div_d: SparseMatrix,
    /// `curl_D`, interior faces x interior edges.
    pub curl_d: SparseMatrix,
    /// `grad_V`, interior faces x tets.
    pub grad_v: SparseMatrix,
    /// `div_V`, tets x interior faces.
    pub div_v: SparseMatrix,
    /// `curl_V`, interior edges x interior faces.
    pub curl_v: SparseMatrix,
    /// The same operators on all entities.
    pub global: OperatorSet,
    pub maps: BoundaryMaps,
    /// Interior lumped masses, used for norms and symmetrization.
    pub masses: LumpedMasses,
}

impl MfdOperators {
    /// `(B, E, p)` block sizes.
    pub fn dims(&self) -> [usize; 3] {
        self.maps.block_dims()
    }
}

/// Builds the mimetic operators `grad_D = D_eD^-1 G`, `div_D = D_V^-1 G^T D_dV`,
/// `curl_D = D_dD^-1 K D_eD`, `grad_V = D_eV^-1 G_V`, `div_V = D_D^-1 G_V^T D_dD`
/// and `curl_V = D_dV^-1 K^T D_eV`, then restricts them to interior entities.
pub fn build_operators(mesh: &TetMesh, dual: &DualGeometry, maps: &BoundaryMaps) -> MfdOperators {
    let inc = IncidenceMatrices::new(mesh);
    let global = OperatorSet::global(&inc, dual);
    let int = global.interior(maps);
    MfdOperators {
        grad_d: int.grad_d,
        div_d: int.div_d,
        curl_d: int.curl_d,
        grad_v: int.grad_v,
        div_v: int.div_v,
        curl_v: int.curl_v,
        global,
        maps: maps.clone(),
        masses: LumpedMasses::new(dual, maps),
    }
}

/// Unknowns of one time level on the interior entities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    /// Magnetic flux on interior faces (dual edges).
    pub b: Vec<f64>,
    /// Electric field on interior edges.
    pub e: Vec<f64>,
    /// Auxiliary scalar on interior vertices.
    pub p: Vec<f64>,
}

impl StateVector {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Self { b: vec![0.0; dims[0]], e: vec![0.0; dims[1]], p: vec![0.0; dims[2]] }
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.b.len(), self.e.len(), self.p.len()]
    }

    pub fn stacked(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.b.len() + self.e.len() + self.p.len());
        v.extend_from_slice(&self.b);
        v.extend_from_slice(&self.e);
        v.extend_from_slice(&self.p);
        v
    }

    pub fn from_stacked(v: &[f64], dims: [usize; 3]) -> Result<Self> {
        if v.len() != dims.iter().sum::<usize>() {
            return Err(Error::DimensionMismatch("stacked state length".into()));
        }
        let (b, rest) = v.split_at(dims[0]);
        let (e, p) = rest.split_at(dims[1]);
        Ok(Self { b: b.to_vec(), e: e.to_vec(), p: p.to_vec() })
    }
}

/// Prescribed values on boundary faces, edges and vertices (in boundary order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValues {
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub p: Vec<f64>,
}

impl BoundaryValues {
    pub fn zeros(maps: &BoundaryMaps) -> Self {
        Self {
            b: vec![0.0; maps.boundary_faces.len()],
            e: vec![0.0; maps.boundary_edges.len()],
            p: vec![0.0; maps.boundary_vertices.len()],
        }
    }

    /// Splits global vectors into their boundary parts.
    pub fn from_global(maps: &BoundaryMaps, b: &[f64], e: &[f64], p: &[f64]) -> Self {
        Self {
            b: maps.boundary_faces.restrict(b),
            e: maps.boundary_edges.restrict(e),
            p: maps.boundary_vertices.restrict(p),
        }
    }
}

/// Interior state and boundary values merged into global vectors `(B, E, p)`.
pub fn merge_global(
    maps: &BoundaryMaps,
    state: &StateVector,
    bc: &BoundaryValues,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut b = maps.faces.prolong(&state.b);
    maps.boundary_faces.prolong_into(&bc.b, &mut b);
    let mut e = maps.edges.prolong(&state.e);
    maps.boundary_edges.prolong_into(&bc.e, &mut e);
    let mut p = maps.vertices.prolong(&state.p);
    maps.boundary_vertices.prolong_into(&bc.p, &mut p);
    (b, e, p)
}

/// The Crank-Nicolson system
/// `[[2/tau I, curl_D, 0], [-curl_V, 2/tau I, grad_D], [0, -div_D, 2/tau I]]`.
#[derive(Clone, Debug)]
pub struct MfdSystem {
    pub a: BlockOperator,
    pub tau: f64,
}

impl MfdSystem {
    pub fn dims(&self) -> [usize; 3] {
        self.a.row_dims()
    }
}

impl LinearOperator for MfdSystem {
    fn nrows(&self) -> usize {
        self.a.nrows()
    }
    fn ncols(&self) -> usize {
        self.a.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.a.apply(x, y)
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time step must be positive, got {tau}")))
    }
}

pub fn assemble_system(ops: &MfdOperators, tau: f64) -> Result<MfdSystem> {
    check_tau(tau)?;
    let d = 2.0 / tau;
    let a = BlockOperator::square(ops.dims())
        .with(0, 0, Block::ScaledIdentity(d))?
        .with(0, 1, Block::Sparse(ops.curl_d.clone()))?
        .with(1, 0, Block::Sparse(ops.curl_v.scale(-1.0)))?
        .with(1, 1, Block::ScaledIdentity(d))?
        .with(1, 2, Block::Sparse(ops.grad_d.clone()))?
        .with(2, 1, Block::Sparse(ops.div_d.scale(-1.0)))?
        .with(2, 2, Block::ScaledIdentity(d))?;
    Ok(MfdSystem { a, tau })
}

/// Which unknown a lumped norm applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    B,
    E,
    P,
}

/// Squared lumped norm: `sum |dD||e^V| B^2`, `sum |dV||e^D| E^2` or `sum |V| p^2`
/// over interior entities.
pub fn lumped_norm_squared(ops: &MfdOperators, component: Component, v: &[f64]) -> f64 {
    let w = match component {
        Component::B => &ops.masses.mt_b,
        Component::E => &ops.masses.mt_e,
        Component::P => &ops.masses.mt_p,
    };
    assert_eq!(w.len(), v.len(), "lumped norm length");
    w.iter().zip(v).map(|(w, x)| w * x * x).sum()
}

pub fn lumped_norm(ops: &MfdOperators, component: Component, v: &[f64]) -> f64 {
    lumped_norm_squared(ops, component, v).sqrt()
}

/// Sum of the three squared lumped norms.
pub fn lumped_energy(ops: &MfdOperators, s: &StateVector) -> f64 {
    lumped_norm_squared(ops, Component::B, &s.b)
        + lumped_norm_squared(ops, Component::E, &s.e)
        + lumped_norm_squared(ops, Component::P, &s.p)
}

/// `div_V B` per tet for interior fluxes `b` and optional boundary fluxes.
pub fn divergence_of_b(ops: &MfdOperators, b: &[f64], boundary: Option<&[f64]>) -> Vec<f64> {
    match boundary {
        None => ops.div_v.mul_vec(b),
        Some(bc) => {
            let mut full = ops.maps.faces.prolong(b);
            ops.maps.boundary_faces.prolong_into(bc, &mut full);
            ops.global.div_v.mul_vec(&full)
        }
    }
}
