use super::TetMesh;
use crate::sparse::CsrMatrix;

/// Signed incidence matrices with exact integer entries.
#[derive(Clone, Debug)]
pub struct IncidenceMatrices {
    /// Edge-vertex incidence, `M_D x N_D`.
    pub grad: CsrMatrix<i64>,
    /// Face-edge incidence, `M_V x M_D`.
    pub curl: CsrMatrix<i64>,
    /// Voronoi edge-vertex incidence (face-tet adjacency), `M_V x N_V`.
    pub voronoi_grad: CsrMatrix<i64>,
}

impl IncidenceMatrices {
    pub fn new(mesh: &TetMesh) -> Self {
        Self {
            grad: incidence_grad(mesh),
            curl: incidence_curl(mesh),
            voronoi_grad: incidence_voronoi_grad(mesh),
        }
    }
}

/// Row `(i, j)`: `-1` at the lower vertex `i`, `+1` at `j`.
pub fn incidence_grad(mesh: &TetMesh) -> CsrMatrix<i64> {
    let trip: Vec<_> = mesh
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(e, &[i, j])| [(e, i, -1), (e, j, 1)])
        .collect();
    CsrMatrix::from_triplets(mesh.num_edges(), mesh.num_vertices(), &trip)
}

/// Row for face `(a, b, c)`: `+1` on `(a, b)`, `-1` on `(a, c)`, `+1` on `(b, c)`,
/// i.e. the circulation sign of each edge tangent around the face normal.
pub fn incidence_curl(mesh: &TetMesh) -> CsrMatrix<i64> {
    let trip: Vec<_> = mesh
        .face_edges()
        .iter()
        .enumerate()
        .flat_map(|(f, &[ab, ac, bc])| [(f, ab, 1), (f, ac, -1), (f, bc, 1)])
        .collect();
    CsrMatrix::from_triplets(mesh.num_faces(), mesh.num_edges(), &trip)
}

/// The dual edge of face `f` runs along its normal: `+1` at the tet the
/// normal points into, `-1` at the tet it leaves. Boundary faces have one entry.
pub fn incidence_voronoi_grad(mesh: &TetMesh) -> CsrMatrix<i64> {
    let mut trip = Vec::with_capacity(2 * mesh.num_faces());
    for (f, ft) in mesh.face_tets().iter().enumerate() {
        for &k in ft.iter().filter(|&&k| k != super::NONE) {
            trip.push((f, k, mesh.face_orientation_in(f, k)));
        }
    }
    CsrMatrix::from_triplets(mesh.num_faces(), mesh.num_tets(), &trip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::mesh::build_base_cube_pyramids;

    fn one_tet() -> TetMesh {
        TetMesh::new(
            vec![
                Point3::ZERO,
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn single_edge_row() {
        let g = incidence_grad(&one_tet());
        assert_eq!(g.row(0), (&[0usize, 1][..], &[-1i64, 1][..]));
    }

    #[test]
    fn triangle_row_signs() {
        let m = one_tet();
        let k = incidence_curl(&m);
        let f = m.faces().iter().position(|&f| f == [0, 1, 2]).unwrap();
        let e = |a, b| m.edges().iter().position(|&e| e == [a, b]).unwrap();
        assert_eq!(k.get(f, e(0, 1)), 1);
        assert_eq!(k.get(f, e(0, 2)), -1);
        assert_eq!(k.get(f, e(1, 2)), 1);
        assert_eq!(k.row_nnz(f), 3);
    }

    #[test]
    fn curl_grad_vanishes_exactly() {
        let m = build_base_cube_pyramids().unwrap();
        let inc = IncidenceMatrices::new(&m);
        assert_eq!(inc.curl.matmul(&inc.grad).unwrap().nnz(), 0);
        // Every tet boundary is a closed surface, boundary tets included.
        let div_curl = inc.voronoi_grad.transpose().matmul(&inc.curl).unwrap();
        assert_eq!(div_curl.nnz(), 0);
    }
}
