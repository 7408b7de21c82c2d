use super::TetMesh;

/// Bijection between a subset of global entity indices and local indices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMap {
    /// Global index of each local entry.
    pub to_global: Vec<usize>,
    /// Local index of each global entry, if selected.
    pub to_local: Vec<Option<usize>>,
}

impl IndexMap {
    pub fn from_mask(keep: impl Iterator<Item = bool>) -> Self {
        let mut to_global = Vec::new();
        let mut to_local = Vec::new();
        for (g, k) in keep.enumerate() {
            if k {
                to_local.push(Some(to_global.len()));
                to_global.push(g);
            } else {
                to_local.push(None);
            }
        }
        Self { to_global, to_local }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_mask(std::iter::repeat(true).take(n))
    }

    pub fn len(&self) -> usize {
        self.to_global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_global.is_empty()
    }

    pub fn global_len(&self) -> usize {
        self.to_local.len()
    }

    /// Picks the selected entries of a global vector.
    pub fn restrict<T: Copy>(&self, global: &[T]) -> Vec<T> {
        assert_eq!(global.len(), self.global_len(), "restriction length");
        self.to_global.iter().map(|&g| global[g]).collect()
    }

    /// Scatters local values into a zero global vector.
    pub fn prolong(&self, local: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.global_len()];
        self.prolong_into(local, &mut out);
        out
    }

    /// Writes local values into their global slots, leaving the rest untouched.
    pub fn prolong_into(&self, local: &[f64], global: &mut [f64]) {
        assert_eq!(local.len(), self.len(), "prolongation length");
        for (&g, &v) in self.to_global.iter().zip(local) {
            global[g] = v;
        }
    }
}

/// Interior and boundary index maps for vertices, edges and faces, plus the
/// (all-interior) tets.
#[derive(Clone, Debug)]
pub struct BoundaryMaps {
    pub vertices: IndexMap,
    pub edges: IndexMap,
    pub faces: IndexMap,
    pub boundary_vertices: IndexMap,
    pub boundary_edges: IndexMap,
    pub boundary_faces: IndexMap,
    pub tets: IndexMap,
}

impl BoundaryMaps {
    pub fn new(mesh: &TetMesh) -> Self {
        let interior = |flags: &[bool]| IndexMap::from_mask(flags.iter().map(|b| !b));
        let boundary = |flags: &[bool]| IndexMap::from_mask(flags.iter().copied());
        Self {
            vertices: interior(mesh.boundary_vertex()),
            edges: interior(mesh.boundary_edge()),
            faces: interior(mesh.boundary_face()),
            boundary_vertices: boundary(mesh.boundary_vertex()),
            boundary_edges: boundary(mesh.boundary_edge()),
            boundary_faces: boundary(mesh.boundary_face()),
            tets: IndexMap::identity(mesh.num_tets()),
        }
    }

    /// Interior `(faces, edges, vertices)` counts, the `(B, E, p)` block sizes.
    pub fn block_dims(&self) -> [usize; 3] {
        [self.faces.len(), self.edges.len(), self.vertices.len()]
    }
}

/// Builds the maps of [`BoundaryMaps::new`]; kept as a free function for
/// symmetry with the other mesh operations.
pub fn boundary_maps(mesh: &TetMesh) -> BoundaryMaps {
    BoundaryMaps::new(mesh)
}
