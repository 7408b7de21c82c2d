use super::TetMesh;
use crate::error::Result;

/// Red refinement: every tet is split into four corner tets and four tets
/// around the shortest diagonal of the inner octahedron. Diagonals whose
/// lengths agree to 1e-12 relative are tied and resolved by the lowest pair
/// of midpoint vertex indices. New vertex `V + e` is the midpoint of edge `e`.
pub fn refine_uniform(mesh: &TetMesh) -> Result<TetMesh> {
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices().to_vec();
    vertices.extend((0..mesh.num_edges()).map(|e| {
        let [a, b] = mesh.edge_points(e);
        a.midpoint(b)
    }));
    let mut tets = Vec::with_capacity(8 * mesh.num_tets());
    for (k, t) in mesh.tets().iter().enumerate() {
        let te = mesh.tet_edges()[k];
        // Midpoint vertex of the local edge (a, b), following TET_EDGES order.
        let m = |a: usize, b: usize| -> usize {
            let slot = match (a.min(b), a.max(b)) {
                (0, 1) => 0,
                (0, 2) => 1,
                (0, 3) => 2,
                (1, 2) => 3,
                (1, 3) => 4,
                (2, 3) => 5,
                _ => unreachable!(),
            };
            nv + te[slot]
        };
        tets.push([t[0], m(0, 1), m(0, 2), m(0, 3)]);
        tets.push([m(0, 1), t[1], m(1, 2), m(1, 3)]);
        tets.push([m(0, 2), m(1, 2), t[2], m(2, 3)]);
        tets.push([m(0, 3), m(1, 3), m(2, 3), t[3]]);

        let diagonals = [[m(0, 1), m(2, 3)], [m(0, 2), m(1, 3)], [m(0, 3), m(1, 2)]];
        let length = |d: &[usize; 2]| (vertices[d[0]] - vertices[d[1]]).norm();
        let key = |d: &[usize; 2]| [d[0].min(d[1]), d[0].max(d[1])];
        let mut best = 0;
        for c in 1..3 {
            let (lc, lb) = (length(&diagonals[c]), length(&diagonals[best]));
            let tie = (lc - lb).abs() <= 1e-12 * lb;
            if (!tie && lc < lb) || (tie && key(&diagonals[c]) < key(&diagonals[best])) {
                best = c;
            }
        }
        let [p, q] = diagonals[best];
        let others: Vec<[usize; 2]> =
            (0..3).filter(|&c| c != best).map(|c| diagonals[c]).collect();
        let [r, r2] = others[0];
        let [s, s2] = others[1];
        // r, s, r2, s2 is a cycle around the diagonal (opposite midpoints are never adjacent).
        for (a, b) in [(r, s), (s, r2), (r2, s2), (s2, r)] {
            tets.push([p, q, a, b]);
        }
    }
    TetMesh::new(vertices, tets)
}

/// Applies [`refine_uniform`] `levels` times.
pub fn refine_times(mesh: &TetMesh, levels: usize) -> Result<TetMesh> {
    let mut m = mesh.clone();
    for _ in 0..levels {
        m = refine_uniform(&m)?;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::mesh::build_base_cube_pyramids;

    #[test]
    fn single_tet_refines_into_eight_with_full_volume() {
        let m = TetMesh::new(
            vec![
                Point3::ZERO,
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2, 3]],
        )
        .unwrap();
        let r = refine_uniform(&m).unwrap();
        assert_eq!(r.num_tets(), 8);
        assert_eq!(r.num_vertices(), 10);
        assert!((r.volume() - m.volume()).abs() < 1e-15);
        assert_eq!(r.euler_characteristic(), 1);
    }

    #[test]
    fn base_mesh_refinement_counts() {
        let base = build_base_cube_pyramids().unwrap();
        let expected = [(15, 50, 60, 24), (65, 304, 432, 192), (369, 2096, 3264, 1536)];
        let mut m = base;
        for (level, &(v, e, f, t)) in expected.iter().enumerate() {
            assert_eq!(
                (m.num_vertices(), m.num_edges(), m.num_faces(), m.num_tets()),
                (v, e, f, t),
                "level {level}"
            );
            let h = 0.5f64.powi(level as i32);
            assert!((m.h() - h).abs() <= 1e-12 * h);
            m = refine_uniform(&m).unwrap();
        }
    }
}
