//! Primal tetrahedral meshes: construction, uniform refinement, entity
//! enumeration, incidence matrices and boundary bookkeeping.

mod boundary;
mod builders;
mod incidence;
mod io;
mod order;
mod refine;

pub use boundary::{boundary_maps, BoundaryMaps, IndexMap};
pub use builders::{build_base_cube_pyramids, build_bcc_mesh, MeshKind};
pub use incidence::{incidence_curl, incidence_grad, incidence_voronoi_grad, IncidenceMatrices};
pub use io::{read_mesh, write_mesh};
pub use order::reorder_spatially;
pub use refine::{refine_times, refine_uniform};

use crate::error::{Error, Result};
use crate::geometry::{signed_volume, Point3};

/// Local vertex pairs of the six tet edges, in the order used by [`TetMesh::tet_edges`].
pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Sentinel for "no neighbour" in [`TetMesh::face_tets`].
pub const NONE: usize = usize::MAX;

/// A tetrahedral mesh with lexicographically enumerated edges and faces.
///
/// Edges are stored as `(i, j)` with `i < j`, which fixes the edge tangent
/// from the lower to the higher vertex index. Faces are sorted triples
/// `(a, b, c)` with normal `(v_b - v_a) x (v_c - v_a)`. Every tet is stored
/// with positive signed volume.
#[derive(Clone, Debug)]
pub struct TetMesh {
    vertices: Vec<Point3>,
    tets: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    tet_edges: Vec<[usize; 6]>,
    tet_faces: Vec<[usize; 4]>,
    face_edges: Vec<[usize; 3]>,
    face_tets: Vec<[usize; 2]>,
    boundary_vertex: Vec<bool>,
    boundary_edge: Vec<bool>,
    boundary_face: Vec<bool>,
    h: f64,
}

fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

impl TetMesh {
    /// Builds and enumerates a mesh. Negatively oriented tets are flipped;
    /// degenerate tets and non-manifold faces are rejected.
    pub fn new(vertices: Vec<Point3>, tets: Vec<[usize; 4]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidMesh(format!("vertex {i} has non-finite coordinates")));
        }
        let nv = vertices.len();
        let mut tets = tets;
        for (k, t) in tets.iter_mut().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("tet {k} references a missing vertex")));
            }
            let p = t.map(|v| vertices[v]);
            let vol = signed_volume(p[0], p[1], p[2], p[3]);
            let longest = TET_EDGES
                .iter()
                .map(|&[a, b]| (p[a] - p[b]).norm())
                .fold(0.0, f64::max);
            let threshold = 1e-14 * longest.powi(3);
            if vol.abs() <= threshold {
                return Err(Error::DegenerateTet { tet: k, volume: vol, threshold });
            }
            if vol < 0.0 {
                t.swap(2, 3);
            }
        }

        let mut edges: Vec<[usize; 2]> = Vec::with_capacity(tets.len() * 6);
        let mut faces: Vec<[usize; 3]> = Vec::with_capacity(tets.len() * 4);
        for t in &tets {
            for &[a, b] in &TET_EDGES {
                edges.push([t[a].min(t[b]), t[a].max(t[b])]);
            }
            for k in 0..4 {
                faces.push(Self::opposite_face(t, k));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        faces.sort_unstable();
        faces.dedup();

        let edge_index = |a: usize, b: usize| -> usize {
            edges.binary_search(&[a.min(b), a.max(b)]).expect("edge enumerated from tets")
        };
        let tet_edges: Vec<[usize; 6]> = tets
            .iter()
            .map(|t| TET_EDGES.map(|[a, b]| edge_index(t[a], t[b])))
            .collect();
        let face_edges: Vec<[usize; 3]> = faces
            .iter()
            .map(|&[a, b, c]| [edge_index(a, b), edge_index(a, c), edge_index(b, c)])
            .collect();

        let mut tet_faces = Vec::with_capacity(tets.len());
        let mut face_tets = vec![[NONE, NONE]; faces.len()];
        for (k, t) in tets.iter().enumerate() {
            let mut tf = [0usize; 4];
            for (l, slot) in tf.iter_mut().enumerate() {
                let f = faces.binary_search(&Self::opposite_face(t, l)).expect("face enumerated");
                *slot = f;
                let ft = &mut face_tets[f];
                if ft[0] == NONE {
                    ft[0] = k;
                } else if ft[1] == NONE {
                    ft[1] = k;
                } else {
                    return Err(Error::InvalidMesh(format!("face {f} shared by more than two tets")));
                }
            }
            tet_faces.push(tf);
        }

        let boundary_face: Vec<bool> = face_tets.iter().map(|ft| ft[1] == NONE).collect();
        let mut boundary_edge = vec![false; edges.len()];
        let mut boundary_vertex = vec![false; nv];
        for (f, &b) in boundary_face.iter().enumerate() {
            if b {
                for &e in &face_edges[f] {
                    boundary_edge[e] = true;
                }
                for &v in &faces[f] {
                    boundary_vertex[v] = true;
                }
            }
        }
        if let Some(v) = (0..nv).find(|&v| !tets.iter().any(|t| t.contains(&v))) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no tet")));
        }

        let h = Self::core_edge_length(&vertices, &edges);
        Ok(Self {
            vertices,
            tets,
            edges,
            faces,
            tet_edges,
            tet_faces,
            face_edges,
            face_tets,
            boundary_vertex,
            boundary_edge,
            boundary_face,
            h,
        })
    }

    /// Sorted vertex triple of the face of `t` opposite local vertex `k`.
    fn opposite_face(t: &[usize; 4], k: usize) -> [usize; 3] {
        let mut f = [0usize; 3];
        let mut n = 0;
        for (l, &v) in t.iter().enumerate() {
            if l != k {
                f[n] = v;
                n += 1;
            }
        }
        sorted3(f)
    }

    /// Longest edge with both endpoints in the closed unit cube, or the
    /// longest edge overall if no edge lies there.
    fn core_edge_length(vertices: &[Point3], edges: &[[usize; 2]]) -> f64 {
        let eps = 1e-12;
        let inside = |p: Point3| (0..3).all(|k| p[k] >= -eps && p[k] <= 1.0 + eps);
        let len = |e: &[usize; 2]| (vertices[e[0]] - vertices[e[1]]).norm();
        let core = edges
            .iter()
            .filter(|e| inside(vertices[e[0]]) && inside(vertices[e[1]]))
            .map(len)
            .fold(0.0, f64::max);
        if core > 0.0 {
            core
        } else {
            edges.iter().map(len).fold(0.0, f64::max)
        }
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Global edge indices of each tet, in [`TET_EDGES`] order.
    pub fn tet_edges(&self) -> &[[usize; 6]] {
        &self.tet_edges
    }

    /// Global face indices of each tet; entry `k` is the face opposite local vertex `k`.
    pub fn tet_faces(&self) -> &[[usize; 4]] {
        &self.tet_faces
    }

    /// Global edges `(a,b), (a,c), (b,c)` of each sorted face `(a,b,c)`.
    pub fn face_edges(&self) -> &[[usize; 3]] {
        &self.face_edges
    }

    /// The one or two tets sharing each face; the second slot is [`NONE`] on the boundary.
    pub fn face_tets(&self) -> &[[usize; 2]] {
        &self.face_tets
    }

    pub fn boundary_vertex(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn boundary_edge(&self) -> &[bool] {
        &self.boundary_edge
    }

    pub fn boundary_face(&self) -> &[bool] {
        &self.boundary_face
    }

    /// Characteristic mesh size.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    /// `N_D - M_D + M_V - N_V`; equals one for a ball.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
            - self.num_tets() as i64
    }

    pub fn tet_points(&self, k: usize) -> [Point3; 4] {
        self.tets[k].map(|v| self.vertices[v])
    }

    pub fn face_points(&self, f: usize) -> [Point3; 3] {
        self.faces[f].map(|v| self.vertices[v])
    }

    pub fn edge_points(&self, e: usize) -> [Point3; 2] {
        self.edges[e].map(|v| self.vertices[v])
    }

    /// Unit tangent from the lower to the higher vertex.
    pub fn edge_tangent(&self, e: usize) -> Point3 {
        let [a, b] = self.edge_points(e);
        (b - a).normalized()
    }

    /// Unnormalized face normal `(v_b - v_a) x (v_c - v_a)`; its norm is twice the area.
    pub fn face_normal_raw(&self, f: usize) -> Point3 {
        let [a, b, c] = self.face_points(f);
        (b - a).cross(c - a)
    }

    pub fn face_normal(&self, f: usize) -> Point3 {
        self.face_normal_raw(f).normalized()
    }

    pub fn tet_volume(&self, k: usize) -> f64 {
        let p = self.tet_points(k);
        signed_volume(p[0], p[1], p[2], p[3])
    }

    /// Total volume of the meshed domain.
    pub fn volume(&self) -> f64 {
        (0..self.num_tets()).map(|k| self.tet_volume(k)).sum()
    }

    /// Local index (0..4) within tet `k` of the vertex opposite face `f`.
    pub fn opposite_local_vertex(&self, k: usize, f: usize) -> usize {
        self.tet_faces[k].iter().position(|&g| g == f).expect("face belongs to tet")
    }

    /// `+1` if the face normal points into tet `k`, `-1` if it points out.
    pub fn face_orientation_in(&self, f: usize, k: usize) -> i64 {
        let d = self.vertices[self.tets[k][self.opposite_local_vertex(k, f)]];
        let a = self.vertices[self.faces[f][0]];
        if (d - a).dot(self.face_normal_raw(f)) > 0.0 {
            1
        } else {
            -1
        }
    }

    /// Structural self-check of the invariants established by [`TetMesh::new`].
    pub fn validate(&self) -> Result<()> {
        if self.edges.iter().any(|e| e[0] >= e[1]) {
            return Err(Error::InvalidMesh("edge not stored low-to-high".into()));
        }
        if self.faces.iter().any(|f| !(f[0] < f[1] && f[1] < f[2])) {
            return Err(Error::InvalidMesh("face not sorted".into()));
        }
        if let Some(k) = (0..self.num_tets()).find(|&k| self.tet_volume(k) <= 0.0) {
            return Err(Error::InvalidMesh(format!("tet {k} not positively oriented")));
        }
        if self.euler_characteristic() != 1 {
            return Err(Error::InvalidMesh(format!(
                "Euler characteristic {} is not 1",
                self.euler_characteristic()
            )));
        }
        Ok(())
    }

    /// Number of interior (non-boundary) vertices, edges and faces.
    pub fn interior_counts(&self) -> [usize; 3] {
        let count = |f: &[bool]| f.iter().filter(|&&b| !b).count();
        [count(&self.boundary_vertex), count(&self.boundary_edge), count(&self.boundary_face)]
    }

    /// Uniformly scales all coordinates.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.vertices.iter().map(|&p| p * s).collect(), self.tets.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn right_tet() -> TetMesh {
        TetMesh::new(
            vec![
                Point3::ZERO,
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1, 3]],
        )
        .unwrap()
    }

    #[test]
    fn single_tet_is_reoriented_and_enumerated() {
        let m = right_tet();
        assert!(m.tet_volume(0) > 0.0);
        assert_eq!(m.num_edges(), 6);
        assert_eq!(m.num_faces(), 4);
        assert_eq!(m.euler_characteristic(), 1);
        assert!(m.boundary_face().iter().all(|&b| b));
        assert_eq!(m.interior_counts(), [0, 0, 0]);
        m.validate().unwrap();
    }

    #[test]
    fn face_edges_follow_vertex_order() {
        let m = right_tet();
        for (f, fe) in m.face_edges().iter().enumerate() {
            let [a, b, c] = m.faces()[f];
            assert_eq!(m.edges()[fe[0]], [a, b]);
            assert_eq!(m.edges()[fe[1]], [a, c]);
            assert_eq!(m.edges()[fe[2]], [b, c]);
        }
    }

    #[test]
    fn degenerate_tet_is_rejected() {
        let flat = TetMesh::new(
            vec![
                Point3::ZERO,
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(1.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2, 3]],
        );
        assert!(matches!(flat, Err(Error::DegenerateTet { .. })));
    }

    #[test]
    fn dangling_vertex_is_rejected() {
        let mut v = right_tet().vertices().to_vec();
        v.push(Point3::new(5.0, 5.0, 5.0));
        assert!(TetMesh::new(v, vec![[0, 1, 2, 3]]).is_err());
    }

    #[test]
    fn orientation_sign_of_boundary_faces() {
        let m = right_tet();
        // The face (1,2,3) normal (-1,1,0) x (-1,0,1) = (1,1,1) points away from the origin.
        let f = m.faces().iter().position(|&f| f == [1, 2, 3]).unwrap();
        assert_eq!(m.face_orientation_in(f, 0), -1);
    }
}
