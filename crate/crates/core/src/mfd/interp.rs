use crate::dual::DualGeometry;
use crate::geometry::Point3;
use crate::mesh::{BoundaryMaps, TetMesh};
use crate::sparse::SparseMatrix;

/// Tangential component at each edge midpoint (where the edge meets its dual
/// face), for all edges.
pub fn interpolate_e_edges(mesh: &TetMesh, field: impl Fn(Point3) -> Point3) -> Vec<f64> {
    (0..mesh.num_edges())
        .map(|e| {
            let [a, b] = mesh.edge_points(e);
            field(a.midpoint(b)).dot((b - a).normalized())
        })
        .collect()
}

/// Normal component at each face circumcentre (where the face meets its dual
/// edge), for all faces.
pub fn interpolate_b_faces(
    mesh: &TetMesh,
    dual: &DualGeometry,
    field: impl Fn(Point3) -> Point3,
) -> Vec<f64> {
    (0..mesh.num_faces())
        .map(|f| field(dual.face_circumcenters[f]).dot(mesh.face_normal(f)))
        .collect()
}

/// Nodal values, for all vertices.
pub fn interpolate_p_nodes(mesh: &TetMesh, field: impl Fn(Point3) -> f64) -> Vec<f64> {
    mesh.vertices().iter().map(|&p| field(p)).collect()
}

/// Face fluxes as the discrete curl of an edge-interpolated vector potential.
/// The result lies in the kernel of the discrete divergence.
pub fn curl_of_potential(
    mesh: &TetMesh,
    global_curl_d: &SparseMatrix,
    potential: impl Fn(Point3) -> Point3,
) -> Vec<f64> {
    global_curl_d.mul_vec(&interpolate_e_edges(mesh, potential))
}

/// Current density on interior edges by the one-point rule at the edge
/// midpoint: `j(x_ij) . t_ij`.
pub fn project_current(
    mesh: &TetMesh,
    maps: &BoundaryMaps,
    current: impl Fn(Point3) -> Point3,
) -> Vec<f64> {
    maps.edges.restrict(&interpolate_e_edges(mesh, current))
}
