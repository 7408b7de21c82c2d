//! Finite element counterpart of the mimetic scheme: P1 / Nedelec / Raviart-Thomas
//! spaces with degree-of-freedom-normalized bases, consistent and lumped mass
//! matrices, the FE Crank-Nicolson system and its diagonally scaled form.
//!
//! The discrete gradient and curl here are computed from the basis functions
//! (tangential traces of `grad phi_j`, normal traces of `curl phi_e`), not from
//! mesh incidence, so comparing them with the mimetic operators is a genuine
//! cross-check.

mod element;
mod equivalence;
mod quadrature;
mod reconstruct;
mod step;

pub use element::{barycentric_gradients, TetElement};
pub use equivalence::{assemble_scaled_fe_system, check_equivalence, EquivalenceReport};
pub use quadrature::{gauss_legendre_unit, TetRule};
pub use reconstruct::{
    edge_average_dofs, l2_error_edge_field, l2_error_face_field, l2_error_nodal_field, load_edges,
};
pub use step::{fe_rhs_lifted, step_fe, FeStepInput};

use crate::dual::DualGeometry;
use crate::error::Result;
use crate::mesh::{BoundaryMaps, TetMesh, TET_EDGES};
use crate::mfd::check_tau;
use crate::sparse::{Block, BlockOperator, LinearOperator, SparseMatrix};

/// Diagonal (lumped) masses on interior entities: `|dD||e^V|` per face,
/// `|dV||e^D|` per edge and `|V|` per vertex.
#[derive(Clone, Debug)]
pub struct LumpedMasses {
    pub mt_b: Vec<f64>,
    pub mt_e: Vec<f64>,
    pub mt_p: Vec<f64>,
}

impl LumpedMasses {
    pub fn new(dual: &DualGeometry, maps: &BoundaryMaps) -> Self {
        let (mb, me, mp) = Self::global(dual);
        Self { mt_b: maps.faces.restrict(&mb), mt_e: maps.edges.restrict(&me), mt_p: maps.vertices.restrict(&mp) }
    }

    /// The same diagonals over all faces, edges and vertices.
    pub fn global(dual: &DualGeometry) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mul = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>();
        (
            mul(&dual.face_areas, &dual.dual_edge_lengths),
            mul(&dual.dual_face_areas, &dual.edge_lengths),
            dual.cell_volumes.clone(),
        )
    }
}

/// Entries below this fraction of their row's largest magnitude are rounding
/// noise of an exact zero and are dropped from the FE operators.
const STRUCTURAL_ZERO: f64 = 1e-12;

fn drop_noise(n: usize, m: usize, entries: Vec<(usize, usize, f64)>) -> SparseMatrix {
    let mut row_max = vec![0.0f64; n];
    for &(i, _, v) in &entries {
        row_max[i] = row_max[i].max(v.abs());
    }
    let kept: Vec<_> = entries.into_iter().filter(|&(i, _, v)| v.abs() > STRUCTURAL_ZERO * row_max[i]).collect();
    SparseMatrix::from_triplets(n, m, &kept)
}

/// FE gradient (edges x vertices) and curl (faces x edges) on all entities.
#[derive(Clone, Debug)]
pub struct FeOperators {
    pub grad: SparseMatrix,
    pub curl: SparseMatrix,
}

impl FeOperators {
    /// `grad[e, j]` is the edge-averaged tangential component of `grad phi_j`;
    /// `curl[f, e]` is the face-averaged normal component of `curl phi_e`.
    pub fn new(mesh: &TetMesh) -> Self {
        let mut edge_done = vec![false; mesh.num_edges()];
        let mut face_done = vec![false; mesh.num_faces()];
        let mut g = Vec::new();
        let mut k = Vec::new();
        for t in 0..mesh.num_tets() {
            let el = TetElement::new(mesh, t);
            let verts = mesh.tets()[t];
            for (s, &[a, b]) in TET_EDGES.iter().enumerate() {
                let e = mesh.tet_edges()[t][s];
                if std::mem::replace(&mut edge_done[e], true) {
                    continue;
                }
                let tangent = (el.points[b] - el.points[a]) * (el.edge_sign[s] / el.edge_len[s]);
                for j in 0..4 {
                    g.push((e, verts[j], el.grad_bary[j].dot(tangent)));
                }
            }
            let curls = el.edge_curl();
            for l in 0..4 {
                let f = mesh.tet_faces()[t][l];
                if std::mem::replace(&mut face_done[f], true) {
                    continue;
                }
                let n = mesh.face_normal(f);
                for s in 0..6 {
                    k.push((f, mesh.tet_edges()[t][s], curls[s].dot(n)));
                }
            }
        }
        Self {
            grad: drop_noise(mesh.num_edges(), mesh.num_vertices(), g),
            curl: drop_noise(mesh.num_faces(), mesh.num_edges(), k),
        }
    }
}

/// Consistent mass matrices over all entities, integrated exactly with the
/// four-point degree-2 rule.
#[derive(Clone, Debug)]
pub struct ConsistentMasses {
    pub m_b: SparseMatrix,
    pub m_e: SparseMatrix,
    pub m_p: SparseMatrix,
}

impl ConsistentMasses {
    pub fn new(mesh: &TetMesh) -> Self {
        let rule = TetRule::degree2();
        let (mut tb, mut te, mut tp) = (Vec::new(), Vec::new(), Vec::new());
        for t in 0..mesh.num_tets() {
            let el = TetElement::new(mesh, t);
            let verts = mesh.tets()[t];
            let edges = mesh.tet_edges()[t];
            let faces = mesh.tet_faces()[t];
            let mut lb = [[0.0; 4]; 4];
            let mut le = [[0.0; 6]; 6];
            let mut lp = [[0.0; 4]; 4];
            for (q, w) in rule.points.iter().zip(&rule.weights) {
                let w = w * el.volume;
                let nodal = el.nodal(q);
                let edge = el.edge(q);
                let face = el.face(el.point(q));
                for i in 0..4 {
                    for j in 0..4 {
                        lp[i][j] += w * nodal[i] * nodal[j];
                        lb[i][j] += w * face[i].dot(face[j]);
                    }
                }
                for i in 0..6 {
                    for j in 0..6 {
                        le[i][j] += w * edge[i].dot(edge[j]);
                    }
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    tp.push((verts[i], verts[j], lp[i][j]));
                    tb.push((faces[i], faces[j], lb[i][j]));
                }
            }
            for i in 0..6 {
                for j in 0..6 {
                    te.push((edges[i], edges[j], le[i][j]));
                }
            }
        }
        Self {
            m_b: SparseMatrix::from_triplets(mesh.num_faces(), mesh.num_faces(), &tb),
            m_e: SparseMatrix::from_triplets(mesh.num_edges(), mesh.num_edges(), &te),
            m_p: SparseMatrix::from_triplets(mesh.num_vertices(), mesh.num_vertices(), &tp),
        }
    }
}

/// Mass matrices used by an FE system: consistent, or the lumped diagonals.
#[derive(Clone, Debug)]
pub struct MassSet {
    pub m_b: SparseMatrix,
    pub m_e: SparseMatrix,
    pub m_p: SparseMatrix,
}

impl MassSet {
    pub fn consistent(mesh: &TetMesh) -> Self {
        let c = ConsistentMasses::new(mesh);
        Self { m_b: c.m_b, m_e: c.m_e, m_p: c.m_p }
    }

    pub fn lumped(dual: &DualGeometry) -> Self {
        let (b, e, p) = LumpedMasses::global(dual);
        Self {
            m_b: SparseMatrix::from_diagonal(&b),
            m_e: SparseMatrix::from_diagonal(&e),
            m_p: SparseMatrix::from_diagonal(&p),
        }
    }
}

/// The FE Crank-Nicolson system
/// `[[2/tau M_B, M_B K, 0], [-K^T M_B, 2/tau M_E, M_E G], [0, -G^T M_E, 2/tau M_p]]`
/// on interior unknowns, with the global couplings kept for boundary lifting.
#[derive(Clone, Debug)]
pub struct FeSystem {
    pub a: BlockOperator,
    pub tau: f64,
    pub ops: FeOperators,
    pub masses: MassSet,
    pub maps: BoundaryMaps,
    /// Global `M_B K`, `-K^T M_B`, `M_E G`, `-G^T M_E`.
    pub(crate) n_be: SparseMatrix,
    pub(crate) n_eb: SparseMatrix,
    pub(crate) n_ep: SparseMatrix,
    pub(crate) n_pe: SparseMatrix,
}

impl FeSystem {
    pub fn new(ops: FeOperators, masses: MassSet, maps: &BoundaryMaps, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let n_be = masses.m_b.matmul(&ops.curl)?;
        let n_eb = ops.curl.transpose().matmul(&masses.m_b)?.scale(-1.0);
        let n_ep = masses.m_e.matmul(&ops.grad)?;
        let n_pe = ops.grad.transpose().matmul(&masses.m_e)?.scale(-1.0);
        let (f, e, v) = (&maps.faces, &maps.edges, &maps.vertices);
        let sub = |m: &SparseMatrix, r: &crate::mesh::IndexMap, c: &crate::mesh::IndexMap| {
            m.submatrix(&r.to_global, &c.to_local, c.len())
        };
        let d = 2.0 / tau;
        let a = BlockOperator::square(maps.block_dims())
            .with(0, 0, Block::Sparse(sub(&masses.m_b, f, f).scale(d)))?
            .with(0, 1, Block::Sparse(sub(&n_be, f, e)))?
            .with(1, 0, Block::Sparse(sub(&n_eb, e, f)))?
            .with(1, 1, Block::Sparse(sub(&masses.m_e, e, e).scale(d)))?
            .with(1, 2, Block::Sparse(sub(&n_ep, e, v)))?
            .with(2, 1, Block::Sparse(sub(&n_pe, v, e)))?
            .with(2, 2, Block::Sparse(sub(&masses.m_p, v, v).scale(d)))?;
        Ok(Self { a, tau, ops, masses, maps: maps.clone(), n_be, n_eb, n_ep, n_pe })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.a.row_dims()
    }

    /// Interior restriction of a global matrix.
    pub fn interior(&self, m: &SparseMatrix, rows: usize, cols: usize) -> SparseMatrix {
        let maps = [&self.maps.faces, &self.maps.edges, &self.maps.vertices];
        m.submatrix(&maps[rows].to_global, &maps[cols].to_local, maps[cols].len())
    }
}

impl LinearOperator for FeSystem {
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
