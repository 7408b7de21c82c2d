use super::TetMesh;
use crate::error::Result;
use crate::geometry::Point3;

/// Interleaves the bits of the three 21-bit cell coordinates.
fn morton(ix: u64, iy: u64, iz: u64) -> u64 {
    let spread = |mut v: u64| {
        v &= 0x1f_ffff;
        v = (v | v << 32) & 0x1f00000000ffff;
        v = (v | v << 16) & 0x1f0000ff0000ff;
        v = (v | v << 8) & 0x100f00f00f00f00f;
        v = (v | v << 4) & 0x10c30c30c30c30c3;
        (v | v << 2) & 0x1249249249249249
    };
    spread(ix) | spread(iy) << 1 | spread(iz) << 2
}

fn keys(points: &[Point3]) -> Vec<u64> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for (d, v) in p.to_array().into_iter().enumerate() {
            lo[d] = lo[d].min(v);
            hi[d] = hi[d].max(v);
        }
    }
    let cells = ((1u64 << 21) - 1) as f64;
    points
        .iter()
        .map(|p| {
            let c = p.to_array();
            let q = |d: usize| {
                let span = hi[d] - lo[d];
                if span > 0.0 { ((c[d] - lo[d]) / span * cells).round() as u64 } else { 0 }
            };
            morton(q(0), q(1), q(2))
        })
        .collect()
}

/// Permutation sorting `keys`, ties broken by the original index.
fn sorted_order(keys: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&i| (keys[i], i));
    order
}

/// Renumbers vertices and tets along a Z-order curve so that neighbouring
/// entities get nearby indices. Geometry and connectivity are unchanged.
pub fn reorder_spatially(mesh: &TetMesh) -> Result<TetMesh> {
    let order = sorted_order(&keys(mesh.vertices()));
    let mut new_index = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let vertices: Vec<Point3> = order.iter().map(|&i| mesh.vertices()[i]).collect();
    let centroids: Vec<Point3> = (0..mesh.num_tets())
        .map(|k| {
            let p = mesh.tet_points(k);
            (p[0] + p[1] + p[2] + p[3]) * 0.25
        })
        .collect();
    let tets = sorted_order(&keys(&centroids))
        .into_iter()
        .map(|k| mesh.tets()[k].map(|v| new_index[v]))
        .collect();
    TetMesh::new(vertices, tets)
}
