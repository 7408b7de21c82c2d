//! Field reconstruction from degrees of freedom, L2 errors and load vectors.

use super::{gauss_legendre_unit, TetElement, TetRule};
use crate::geometry::Point3;
use crate::mesh::TetMesh;

const ERROR_RULE_POINTS: usize = 3;

/// Edge averages `(1/|e|) int_e u . t ds` on all edges, by 5-point Gauss.
pub fn edge_average_dofs(mesh: &TetMesh, field: impl Fn(Point3) -> Point3) -> Vec<f64> {
    let (s, w) = gauss_legendre_unit(5);
    (0..mesh.num_edges())
        .map(|e| {
            let [a, b] = mesh.edge_points(e);
            let t = mesh.edge_tangent(e);
            s.iter().zip(&w).map(|(s, w)| w * field(a + (b - a) * *s).dot(t)).sum()
        })
        .collect()
}

fn l2_error(
    mesh: &TetMesh,
    mut local_diff_sq: impl FnMut(&TetElement, usize, &[f64; 4], Point3) -> f64,
) -> f64 {
    let rule = TetRule::collapsed_gauss(ERROR_RULE_POINTS);
    let mut total = 0.0;
    for k in 0..mesh.num_tets() {
        let el = TetElement::new(mesh, k);
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            total += w * el.volume * local_diff_sq(&el, k, q, el.point(q));
        }
    }
    total.sqrt()
}

/// `|| sum_e u_e phi_e - exact ||_L2` for edge coefficients on all edges.
pub fn l2_error_edge_field(mesh: &TetMesh, dofs: &[f64], exact: impl Fn(Point3) -> Point3) -> f64 {
    l2_error(mesh, |el, k, q, x| {
        let phi = el.edge(q);
        let edges = mesh.tet_edges()[k];
        let uh = (0..6).fold(Point3::ZERO, |acc, s| acc + phi[s] * dofs[edges[s]]);
        (uh - exact(x)).norm_squared()
    })
}

/// `|| sum_f u_f phi_f - exact ||_L2` for face coefficients on all faces.
pub fn l2_error_face_field(mesh: &TetMesh, dofs: &[f64], exact: impl Fn(Point3) -> Point3) -> f64 {
    l2_error(mesh, |el, k, _, x| {
        let phi = el.face(x);
        let faces = mesh.tet_faces()[k];
        let uh = (0..4).fold(Point3::ZERO, |acc, l| acc + phi[l] * dofs[faces[l]]);
        (uh - exact(x)).norm_squared()
    })
}

/// `|| sum_v u_v lambda_v - exact ||_L2` for nodal coefficients.
pub fn l2_error_nodal_field(mesh: &TetMesh, dofs: &[f64], exact: impl Fn(Point3) -> f64) -> f64 {
    l2_error(mesh, |_, k, q, x| {
        let v = mesh.tets()[k];
        let uh: f64 = (0..4).map(|i| q[i] * dofs[v[i]]).sum();
        (uh - exact(x)).powi(2)
    })
}

/// Load vector `int_Omega j . phi_e` on all edges.
pub fn load_edges(mesh: &TetMesh, current: impl Fn(Point3) -> Point3) -> Vec<f64> {
    let rule = TetRule::collapsed_gauss(ERROR_RULE_POINTS);
    let mut out = vec![0.0; mesh.num_edges()];
    for k in 0..mesh.num_tets() {
        let el = TetElement::new(mesh, k);
        let edges = mesh.tet_edges()[k];
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            let j = current(el.point(q));
            let phi = el.edge(q);
            for s in 0..6 {
                out[edges[s]] += w * el.volume * j.dot(phi[s]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_base_cube_pyramids, refine_uniform};

    #[test]
    fn constant_fields_are_reproduced_exactly() {
        let mesh = refine_uniform(&build_base_cube_pyramids().unwrap()).unwrap();
        let c = Point3::new(0.3, -1.2, 0.7);
        let e = edge_average_dofs(&mesh, |_| c);
        assert!(l2_error_edge_field(&mesh, &e, |_| c) < 1e-13);
        let b: Vec<f64> = (0..mesh.num_faces()).map(|f| c.dot(mesh.face_normal(f))).collect();
        assert!(l2_error_face_field(&mesh, &b, |_| c) < 1e-13);
        let p: Vec<f64> = mesh.vertices().iter().map(|x| 2.0 * x.x - x.z).collect();
        assert!(l2_error_nodal_field(&mesh, &p, |x| 2.0 * x.x - x.z) < 1e-13);
    }

    #[test]
    fn load_of_constant_current_sums_to_its_circulation() {
        // The edge interpolant of a constant field is exact, so
        // sum_e (c . t_e) load_e = int |c|^2 = |c|^2 |Omega|.
        let mesh = build_base_cube_pyramids().unwrap();
        let c = Point3::new(1.0, 2.0, -0.5);
        let load = load_edges(&mesh, |_| c);
        let s: f64 = (0..mesh.num_edges()).map(|e| c.dot(mesh.edge_tangent(e)) * load[e]).sum();
        assert!((s - c.norm_squared() * mesh.volume()).abs() < 1e-12);
    }
}
