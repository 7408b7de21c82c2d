//! Circumcentric (Voronoi) dual of a tetrahedral mesh and its diagonal measure
//! matrices.
//!
//! Every dual measure is accumulated from per-tet pieces. Inside tet `T` with
//! circumcentre `c`, the dual face of an edge gets the two triangles
//! `(m, c_f, c)` and `(m, c, c_g)`, where `m` is the edge midpoint and `c_f`,
//! `c_g` are the circumcentres of the two faces of `T` through the edge. The
//! dual edge of a face gets the distance from `c` to the face plane. Pieces
//! are signed, so an inverted dual is detected instead of being silently
//! absorbed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{signed_volume, solve3, Point3};
use crate::mesh::{TetMesh, TET_EDGES};

/// Threshold below which a signed dual piece counts as negative, relative to
/// the squared (areas) or plain (lengths) local edge scale.
const NEGATIVE_EPS: f64 = 1e-14;
/// Minimum barycentric coordinate of a circumcentre in a well-centred tet.
pub const BARY_EPS: f64 = 1e-12;

/// Circumcentre of a tetrahedron, from the three perpendicular-bisector planes
/// through the first vertex.
pub fn circumcenter(p: [Point3; 4]) -> Result<Point3> {
    let vol = signed_volume(p[0], p[1], p[2], p[3]);
    let longest = TET_EDGES.iter().map(|&[a, b]| (p[a] - p[b]).norm()).fold(0.0, f64::max);
    let threshold = 1e-14 * longest.powi(3);
    if vol.abs() <= threshold {
        return Err(Error::DegenerateTet { tet: 0, volume: vol, threshold });
    }
    let rows = [p[1] - p[0], p[2] - p[0], p[3] - p[0]];
    let rhs = Point3::new(rows[0].norm_squared(), rows[1].norm_squared(), rows[2].norm_squared()) * 0.5;
    let x = solve3(rows, rhs).ok_or(Error::DegenerateTet { tet: 0, volume: vol, threshold })?;
    Ok(p[0] + x)
}

/// Circumcentre of a triangle (lies in its plane).
pub fn triangle_circumcenter(a: Point3, b: Point3, c: Point3) -> Point3 {
    let ab = b - a;
    let ac = c - a;
    let n = ab.cross(ac);
    let num = n.cross(ab) * ac.norm_squared() + ac.cross(n) * ab.norm_squared();
    a + num / (2.0 * n.norm_squared())
}

/// Barycentric coordinates of `x` in tet `p`.
pub fn barycentric(p: [Point3; 4], x: Point3) -> [f64; 4] {
    let vol = signed_volume(p[0], p[1], p[2], p[3]);
    let mut out = [0.0; 4];
    for (j, o) in out.iter_mut().enumerate() {
        let mut q = p;
        q[j] = x;
        *o = signed_volume(q[0], q[1], q[2], q[3]) / vol;
    }
    out
}

/// Outcome of the well-centredness check.
#[derive(Clone, Debug, Serialize)]
pub struct NondegeneracyReport {
    pub passed: bool,
    pub failures: usize,
    /// Tet with the smallest barycentric coordinate of its circumcentre.
    pub worst_tet: usize,
    pub worst_barycentric: f64,
}

/// Checks that every circumcentre has all barycentric coordinates at least [`BARY_EPS`].
pub fn check_nondegenerate(mesh: &TetMesh, circumcenters: &[Point3]) -> NondegeneracyReport {
    let mut report =
        NondegeneracyReport { passed: true, failures: 0, worst_tet: 0, worst_barycentric: f64::INFINITY };
    for (k, &c) in circumcenters.iter().enumerate() {
        let lo = barycentric(mesh.tet_points(k), c).into_iter().fold(f64::INFINITY, f64::min);
        if lo < report.worst_barycentric {
            report.worst_barycentric = lo;
            report.worst_tet = k;
        }
        if !(lo >= BARY_EPS) {
            report.failures += 1;
            report.passed = false;
        }
    }
    report
}

pub fn tet_circumcenters(mesh: &TetMesh) -> Result<Vec<Point3>> {
    (0..mesh.num_tets())
        .map(|k| {
            circumcenter(mesh.tet_points(k)).map_err(|e| match e {
                Error::DegenerateTet { volume, threshold, .. } => {
                    Error::DegenerateTet { tet: k, volume, threshold }
                }
                other => other,
            })
        })
        .collect()
}

pub fn face_circumcenters(mesh: &TetMesh) -> Vec<Point3> {
    (0..mesh.num_faces())
        .map(|f| {
            let [a, b, c] = mesh.face_points(f);
            triangle_circumcenter(a, b, c)
        })
        .collect()
}

fn longest_edge(p: &[Point3; 4]) -> f64 {
    TET_EDGES.iter().map(|&[a, b]| (p[a] - p[b]).norm()).fold(0.0, f64::max)
}

/// Areas of the dual faces `|dV_ij|`, one per Delaunay edge.
pub fn voronoi_face_areas(mesh: &TetMesh, circumcenters: &[Point3]) -> Result<Vec<f64>> {
    let face_cc = face_circumcenters(mesh);
    let mut area = vec![0.0; mesh.num_edges()];
    for k in 0..mesh.num_tets() {
        let p = mesh.tet_points(k);
        let c = circumcenters[k];
        let scale = longest_edge(&p).powi(2);
        for (slot, &[a, b]) in TET_EDGES.iter().enumerate() {
            let e = mesh.tet_edges()[k][slot];
            let (l_c, l_d) = other_two(a, b);
            let m = p[a].midpoint(p[b]);
            let tangent = mesh.edge_tangent(e);
            let sigma = ((p[l_c] - m).cross(p[l_d] - m)).dot(tangent).signum();
            // Faces through the edge: the one containing local vertex l_c is opposite l_d.
            let fc_near_c = face_cc[mesh.tet_faces()[k][l_d]];
            let fc_near_d = face_cc[mesh.tet_faces()[k][l_c]];
            let s1 = 0.5 * sigma * (fc_near_c - m).cross(c - m).dot(tangent);
            let s2 = 0.5 * sigma * (c - m).cross(fc_near_d - m).dot(tangent);
            for s in [s1, s2] {
                if s < -NEGATIVE_EPS * scale {
                    return Err(Error::NegativeMeasure { what: "dual face piece", index: e, value: s });
                }
            }
            area[e] += s1 + s2;
        }
    }
    Ok(area)
}

fn other_two(a: usize, b: usize) -> (usize, usize) {
    let mut rest = (0..4).filter(|&v| v != a && v != b);
    (rest.next().unwrap(), rest.next().unwrap())
}

/// Lengths of the dual edges `|e_km^V|`, one per Delaunay face. Boundary
/// faces get the one-sided distance from the tet circumcentre to the face plane.
pub fn voronoi_edge_lengths(mesh: &TetMesh, circumcenters: &[Point3]) -> Result<Vec<f64>> {
    let mut len = vec![0.0; mesh.num_faces()];
    for (k, t) in mesh.tets().iter().enumerate() {
        let p = mesh.tet_points(k);
        let scale = longest_edge(&p);
        for (l, &f) in mesh.tet_faces()[k].iter().enumerate() {
            let a = mesh.vertices()[mesh.faces()[f][0]];
            let mut n = mesh.face_normal(f);
            if (mesh.vertices()[t[l]] - a).dot(n) < 0.0 {
                n = -n;
            }
            let d = (circumcenters[k] - a).dot(n);
            if d < -NEGATIVE_EPS * scale {
                return Err(Error::NegativeMeasure { what: "dual edge piece", index: f, value: d });
            }
            len[f] += d;
        }
    }
    Ok(len)
}

/// Dual cell volumes `|V_i| = sum over incident edges of (1/3) (|e|/2) |dV_e|`.
pub fn voronoi_cell_volumes(mesh: &TetMesh, face_areas: &[f64], edge_lengths: &[f64]) -> Vec<f64> {
    let mut vol = vec![0.0; mesh.num_vertices()];
    for (e, &[i, j]) in mesh.edges().iter().enumerate() {
        let piece = edge_lengths[e] * face_areas[e] / 6.0;
        vol[i] += piece;
        vol[j] += piece;
    }
    vol
}

/// The six diagonal measure matrices of the primal/dual mesh pair, indexed by
/// global entity, plus circumcentre tables.
#[derive(Clone, Debug)]
pub struct DualGeometry {
    /// Tet circumcentres (dual vertices).
    pub circumcenters: Vec<Point3>,
    /// Circumcentres of all faces.
    pub face_circumcenters: Vec<Point3>,
    /// Circumcentres of the boundary faces, in boundary-face order; the dual
    /// edges of boundary faces end there.
    pub boundary_face_points: Vec<Point3>,
    /// `|e_ij^D|`, per edge.
    pub edge_lengths: Vec<f64>,
    /// `|dV_ij|`, per edge.
    pub dual_face_areas: Vec<f64>,
    /// `|e_km^V|`, per face.
    pub dual_edge_lengths: Vec<f64>,
    /// `|dD_km|`, per face.
    pub face_areas: Vec<f64>,
    /// `|V_i|`, per vertex.
    pub cell_volumes: Vec<f64>,
    /// `|D_k|`, per tet.
    pub tet_volumes: Vec<f64>,
}

/// Sums whose exact values are determined by the domain volume.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PartitionIdentities {
    pub cell_volume_sum: f64,
    pub tet_volume_sum: f64,
    /// `sum |e^D| |dV|`, equal to three times the volume.
    pub edge_dual_face_sum: f64,
    /// `sum |dD| |e^V|`, equal to three times the volume.
    pub face_dual_edge_sum: f64,
}

impl PartitionIdentities {
    /// Relative deviations from `|Omega|, |Omega|, 3|Omega|, 3|Omega|`.
    pub fn residuals(&self, volume: f64) -> [f64; 4] {
        [
            (self.cell_volume_sum - volume).abs() / volume,
            (self.tet_volume_sum - volume).abs() / volume,
            (self.edge_dual_face_sum - 3.0 * volume).abs() / (3.0 * volume),
            (self.face_dual_edge_sum - 3.0 * volume).abs() / (3.0 * volume),
        ]
    }
}

impl DualGeometry {
    /// Computes all dual measures. Fails on degenerate tets or inverted dual pieces.
    pub fn new(mesh: &TetMesh) -> Result<Self> {
        let circumcenters = tet_circumcenters(mesh)?;
        let face_circumcenters = face_circumcenters(mesh);
        let boundary_face_points = (0..mesh.num_faces())
            .filter(|&f| mesh.boundary_face()[f])
            .map(|f| face_circumcenters[f])
            .collect();
        let edge_lengths: Vec<f64> = (0..mesh.num_edges())
            .map(|e| {
                let [a, b] = mesh.edge_points(e);
                (b - a).norm()
            })
            .collect();
        let face_areas: Vec<f64> =
            (0..mesh.num_faces()).map(|f| 0.5 * mesh.face_normal_raw(f).norm()).collect();
        let dual_face_areas = voronoi_face_areas(mesh, &circumcenters)?;
        let dual_edge_lengths = voronoi_edge_lengths(mesh, &circumcenters)?;
        let cell_volumes = voronoi_cell_volumes(mesh, &dual_face_areas, &edge_lengths);
        let tet_volumes = (0..mesh.num_tets()).map(|k| mesh.tet_volume(k)).collect();
        let dual = Self {
            circumcenters,
            face_circumcenters,
            boundary_face_points,
            edge_lengths,
            dual_face_areas,
            dual_edge_lengths,
            face_areas,
            cell_volumes,
            tet_volumes,
        };
        dual.check_positive()?;
        Ok(dual)
    }

    fn check_positive(&self) -> Result<()> {
        let tables: [(&'static str, &[f64]); 6] = [
            ("edge length", &self.edge_lengths),
            ("dual face area", &self.dual_face_areas),
            ("dual edge length", &self.dual_edge_lengths),
            ("face area", &self.face_areas),
            ("dual cell volume", &self.cell_volumes),
            ("tet volume", &self.tet_volumes),
        ];
        for (what, t) in tables {
            if let Some(i) = t.iter().position(|&v| !(v > 0.0)) {
                return Err(Error::NegativeMeasure { what, index: i, value: t[i] });
            }
        }
        Ok(())
    }

    pub fn identities(&self) -> PartitionIdentities {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        PartitionIdentities {
            cell_volume_sum: self.cell_volumes.iter().sum(),
            tet_volume_sum: self.tet_volumes.iter().sum(),
            edge_dual_face_sum: dot(&self.edge_lengths, &self.dual_face_areas),
            face_dual_edge_sum: dot(&self.face_areas, &self.dual_edge_lengths),
        }
    }

    /// Point where edge `e` meets its dual face (the midpoint).
    pub fn edge_dual_point(&self, mesh: &TetMesh, e: usize) -> Point3 {
        let [a, b] = mesh.edge_points(e);
        a.midpoint(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_base_cube_pyramids, build_bcc_mesh};

    fn right_tet() -> [Point3; 4] {
        [
            Point3::ZERO,
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ]
    }

    #[test]
    fn right_tet_circumcenter() {
        let c = circumcenter(right_tet()).unwrap();
        assert!((c - Point3::new(0.5, 0.5, 0.5)).norm() < 1e-15);
        for p in right_tet() {
            assert!(((p - c).norm() - 0.75f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn regular_tet_circumradius() {
        let s = 1.0 / 2f64.sqrt();
        let p = [
            Point3::new(s, 0.0, -0.5),
            Point3::new(-s, 0.0, -0.5),
            Point3::new(0.0, s, 0.5),
            Point3::new(0.0, -s, 0.5),
        ];
        let p = p.map(|q| q * s);
        let edge = (p[0] - p[1]).norm();
        let c = circumcenter(p).unwrap();
        for q in p {
            assert!(((q - c).norm() / edge - (3.0f64 / 8.0).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_tet_is_degenerate() {
        let mut p = right_tet();
        p[3] = Point3::new(1.0, 1.0, 0.0);
        assert!(matches!(circumcenter(p), Err(Error::DegenerateTet { .. })));
    }

    #[test]
    fn triangle_circumcenter_is_equidistant() {
        let (a, b, c) = (Point3::new(0.1, 0.2, 0.3), Point3::new(1.0, 0.0, 0.5), Point3::new(0.2, 0.9, -0.4));
        let o = triangle_circumcenter(a, b, c);
        let r = (a - o).norm();
        assert!(((b - o).norm() - r).abs() < 1e-14);
        assert!(((c - o).norm() - r).abs() < 1e-14);
        assert!((b - a).cross(c - a).dot(o - a).abs() < 1e-14);
    }

    #[test]
    fn right_tet_fails_well_centredness() {
        let mesh = TetMesh::new(right_tet().to_vec(), vec![[0, 1, 2, 3]]).unwrap();
        let cc = tet_circumcenters(&mesh).unwrap();
        let rep = check_nondegenerate(&mesh, &cc);
        // Circumcentre (1/2, 1/2, 1/2) lies beyond the face x + y + z = 1.
        assert!(!rep.passed);
        assert!((rep.worst_barycentric + 0.5).abs() < 1e-15);
    }

    #[test]
    fn base_and_bcc_meshes_are_well_centred() {
        for mesh in [build_base_cube_pyramids().unwrap(), build_bcc_mesh(2).unwrap()] {
            let cc = tet_circumcenters(&mesh).unwrap();
            assert!(check_nondegenerate(&mesh, &cc).passed);
        }
    }

    #[test]
    fn base_mesh_identities() {
        let mesh = build_base_cube_pyramids().unwrap();
        let dual = DualGeometry::new(&mesh).unwrap();
        for r in dual.identities().residuals(2.0) {
            assert!(r < 1e-12, "{r}");
        }
    }

    #[test]
    fn right_tet_has_inverted_dual_edge() {
        let mesh = TetMesh::new(right_tet().to_vec(), vec![[0, 1, 2, 3]]).unwrap();
        let cc = tet_circumcenters(&mesh).unwrap();
        let err = voronoi_edge_lengths(&mesh, &cc).unwrap_err();
        assert!(matches!(err, Error::NegativeMeasure { what: "dual edge piece", .. }));
    }

    #[test]
    fn one_sided_dual_edges_of_regular_tet_are_inradii() {
        let p = vec![
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(1.0, -1.0, -1.0),
            Point3::new(-1.0, 1.0, -1.0),
            Point3::new(-1.0, -1.0, 1.0),
        ];
        let mesh = TetMesh::new(p, vec![[0, 1, 2, 3]]).unwrap();
        let cc = tet_circumcenters(&mesh).unwrap();
        for len in voronoi_edge_lengths(&mesh, &cc).unwrap() {
            assert!((len - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
    }
}
