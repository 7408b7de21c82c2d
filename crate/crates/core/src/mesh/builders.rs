use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::TetMesh;
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Named mesh families available from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshKind {
    /// Unit cube with a square pyramid of height 1/2 on each face.
    CubePyramids,
    /// Body-centered cubic tiling of the unit cube into `n^3` cells.
    Bcc,
}

impl MeshKind {
    /// Volume of the meshed region for the given cell count (`n` is ignored
    /// for the cube-pyramids domain).
    pub fn domain_volume(self, n: usize) -> f64 {
        match self {
            MeshKind::CubePyramids => 2.0,
            MeshKind::Bcc => 1.0 + 1.0 / n as f64,
        }
    }
}

/// Coarse mesh of the unit cube plus six pyramids with apexes half a unit
/// outside each face, together with the cube centre.
///
/// The 15 points are a patch of the body-centred cubic lattice, so their
/// Delaunay tetrahedralization is unique: for each cube face the tets are
/// (centre, apex, face edge), 24 congruent tets whose circumcentres lie at
/// their centroids.
pub fn build_base_cube_pyramids() -> Result<TetMesh> {
    bcc_lattice(1)
}

/// Body-centred cubic mesh with `n^3` cubic cells on `[0,1]^3`.
///
/// Each pair of adjacent cell centres spans four tets, one per edge of the
/// shared cell face. Boundary cell faces pair their cell centre with a mirror
/// point half a cell outside the cube, so the domain is the unit cube with a
/// shallow pyramid on each boundary cell face and every tet is the same
/// well-centred shape.
pub fn build_bcc_mesh(n: usize) -> Result<TetMesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("BCC subdivision count must be at least 1".into()));
    }
    bcc_lattice(n)
}

fn bcc_lattice(n: usize) -> Result<TetMesh> {
    let s = 1.0 / n as f64;
    // Lattice coordinates are stored doubled: corners at even, centres at odd values.
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut add = |c: [i64; 3]| -> usize {
        *index.entry(c).or_insert_with(|| {
            let p = Point3::new(c[0] as f64, c[1] as f64, c[2] as f64) * (s / 2.0);
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let ni = n as i64;
    for k in 0..=ni {
        for j in 0..=ni {
            for i in 0..=ni {
                add([2 * i, 2 * j, 2 * k]);
            }
        }
    }
    for k in 0..ni {
        for j in 0..ni {
            for i in 0..ni {
                add([2 * i + 1, 2 * j + 1, 2 * k + 1]);
            }
        }
    }
    let mut tets = Vec::new();
    // Cell faces normal to `axis` at doubled coordinate `2 * plane`.
    for axis in 0..3 {
        let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
        for plane in 0..=ni {
            for a in 0..ni {
                for b in 0..ni {
                    let mut lo = [0i64; 3];
                    lo[axis] = 2 * plane - 1;
                    lo[u] = 2 * a + 1;
                    lo[w] = 2 * b + 1;
                    let mut hi = lo;
                    hi[axis] = 2 * plane + 1;
                    let c0 = add(lo);
                    let c1 = add(hi);
                    let corner = |du: i64, dw: i64| {
                        let mut c = [0i64; 3];
                        c[axis] = 2 * plane;
                        c[u] = 2 * a + du;
                        c[w] = 2 * b + dw;
                        c
                    };
                    let ring = [corner(0, 0), corner(2, 0), corner(2, 2), corner(0, 2)];
                    for q in 0..4 {
                        let p0 = add(ring[q]);
                        let p1 = add(ring[(q + 1) % 4]);
                        tets.push([c0, c1, p0, p1]);
                    }
                }
            }
        }
    }
    drop(add);
    TetMesh::new(vertices, tets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_mesh_counts() {
        let m = build_base_cube_pyramids().unwrap();
        assert_eq!(m.num_vertices(), 15);
        assert_eq!(m.num_tets(), 24);
        assert_eq!(m.euler_characteristic(), 1);
        assert!((m.h() - 1.0).abs() < 1e-15);
        assert!((m.volume() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn base_mesh_contains_listed_apexes_and_centre() {
        let m = build_base_cube_pyramids().unwrap();
        let want = [
            [-0.5, 0.5, 0.5],
            [1.5, 0.5, 0.5],
            [0.5, -0.5, 0.5],
            [0.5, 1.5, 0.5],
            [0.5, 0.5, -0.5],
            [0.5, 0.5, 1.5],
            [0.5, 0.5, 0.5],
        ];
        for w in want {
            assert!(m.vertices().iter().any(|p| (*p - Point3::from(w)).norm() < 1e-15), "{w:?}");
        }
    }

    #[test]
    fn bcc_counts_and_volume() {
        for n in 1..=3usize {
            let m = build_bcc_mesh(n).unwrap();
            assert_eq!(m.num_tets(), 12 * n * n * (n + 1));
            assert_eq!(m.euler_characteristic(), 1);
            let vol = MeshKind::Bcc.domain_volume(n);
            assert!((m.volume() - vol).abs() < 1e-13 * vol);
        }
    }

    #[test]
    fn bcc_rejects_zero() {
        assert!(build_bcc_mesh(0).is_err());
    }
}
