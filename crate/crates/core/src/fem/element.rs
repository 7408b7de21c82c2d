//! Lowest-order Lagrange, Nedelec and Raviart-Thomas bases on one tetrahedron,
//! scaled so that each basis function has unit degree of freedom (point value,
//! edge-averaged tangential component, face-averaged normal flux).

use crate::geometry::Point3;
use crate::mesh::{TetMesh, TET_EDGES};

/// Geometry of one tet needed to evaluate its bases.
#[derive(Clone, Debug)]
pub struct TetElement {
    pub points: [Point3; 4],
    pub volume: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad_bary: [Point3; 4],
    /// Sign relating each local edge basis to its global orientation, and its length.
    pub edge_sign: [f64; 6],
    pub edge_len: [f64; 6],
    /// Outward-normal sign of the global face normal, and face area, per local face.
    pub face_sign: [f64; 4],
    pub face_area: [f64; 4],
}

/// Gradients of the barycentric coordinates of a non-degenerate tet.
pub fn barycentric_gradients(p: &[Point3; 4]) -> [Point3; 4] {
    let d1 = p[1] - p[0];
    let d2 = p[2] - p[0];
    let d3 = p[3] - p[0];
    let det = d1.dot(d2.cross(d3));
    let g1 = d2.cross(d3) / det;
    let g2 = d3.cross(d1) / det;
    let g3 = d1.cross(d2) / det;
    [-(g1 + g2 + g3), g1, g2, g3]
}

impl TetElement {
    pub fn new(mesh: &TetMesh, k: usize) -> Self {
        let t = mesh.tets()[k];
        let points = mesh.tet_points(k);
        let grad_bary = barycentric_gradients(&points);
        let d = points[1] - points[0];
        let volume = d.dot((points[2] - points[0]).cross(points[3] - points[0])).abs() / 6.0;
        let mut edge_sign = [0.0; 6];
        let mut edge_len = [0.0; 6];
        for (s, &[a, b]) in TET_EDGES.iter().enumerate() {
            edge_sign[s] = if t[a] < t[b] { 1.0 } else { -1.0 };
            edge_len[s] = (points[b] - points[a]).norm();
        }
        let mut face_sign = [0.0; 4];
        let mut face_area = [0.0; 4];
        for l in 0..4 {
            let f = mesh.tet_faces()[k][l];
            face_sign[l] = -(mesh.face_orientation_in(f, k) as f64);
            face_area[l] = 0.5 * mesh.face_normal_raw(f).norm();
        }
        Self { points, volume, grad_bary, edge_sign, edge_len, face_sign, face_area }
    }

    pub fn point(&self, bary: &[f64; 4]) -> Point3 {
        (0..4).fold(Point3::ZERO, |acc, i| acc + self.points[i] * bary[i])
    }

    /// Nodal basis values are the barycentric coordinates themselves.
    pub fn nodal(&self, bary: &[f64; 4]) -> [f64; 4] {
        *bary
    }

    /// Edge basis `|e| (l_a grad l_b - l_b grad l_a)` in global orientation.
    pub fn edge(&self, bary: &[f64; 4]) -> [Point3; 6] {
        let mut out = [Point3::ZERO; 6];
        for (s, &[a, b]) in TET_EDGES.iter().enumerate() {
            let w = self.grad_bary[b] * bary[a] - self.grad_bary[a] * bary[b];
            out[s] = w * (self.edge_sign[s] * self.edge_len[s]);
        }
        out
    }

    /// Constant curls `2 |e| grad l_a x grad l_b` of the edge bases.
    pub fn edge_curl(&self) -> [Point3; 6] {
        let mut out = [Point3::ZERO; 6];
        for (s, &[a, b]) in TET_EDGES.iter().enumerate() {
            out[s] = self.grad_bary[a].cross(self.grad_bary[b])
                * (2.0 * self.edge_sign[s] * self.edge_len[s]);
        }
        out
    }

    /// Face basis `sign |f| (x - x_l) / (3 |T|)` for the face opposite local vertex `l`.
    pub fn face(&self, x: Point3) -> [Point3; 4] {
        let mut out = [Point3::ZERO; 4];
        for l in 0..4 {
            out[l] = (x - self.points[l]) * (self.face_sign[l] * self.face_area[l] / (3.0 * self.volume));
        }
        out
    }
}
