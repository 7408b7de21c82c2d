use serde::Serialize;

use super::{FeSystem, MassSet};
use crate::dual::DualGeometry;
use crate::error::Result;
use crate::mesh::{BoundaryMaps, TetMesh};
use crate::sparse::{Block, BlockOperator, SparseMatrix};

use super::FeOperators;

/// FE system with lumped masses, left-multiplied by the inverse lumped masses:
/// `diag(Mt)^-1 A_FE(Mt)`. The products are formed numerically.
pub fn assemble_scaled_fe_system(
    mesh: &TetMesh,
    dual: &DualGeometry,
    maps: &BoundaryMaps,
    tau: f64,
) -> Result<BlockOperator> {
    let fe = FeSystem::new(FeOperators::new(mesh), MassSet::lumped(dual), maps, tau)?;
    let inv_diag = |m: &SparseMatrix| m.diagonal().iter().map(|d| 1.0 / d).collect::<Vec<_>>();
    let row_scale = [
        inv_diag(&fe.interior(&fe.masses.m_b, 0, 0)),
        inv_diag(&fe.interior(&fe.masses.m_e, 1, 1)),
        inv_diag(&fe.interior(&fe.masses.m_p, 2, 2)),
    ];
    let mut out = BlockOperator::square(fe.dims());
    for i in 0..3 {
        for j in 0..3 {
            if let Some(Block::Sparse(m)) = fe.a.block(i, j) {
                out.set(i, j, Block::Sparse(m.scale_rows(&row_scale[i])))?;
            }
        }
    }
    Ok(out)
}

/// Entrywise comparison of two block systems.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    /// Largest `|a - b| / max(|a|, |b|)` per block, row-major.
    pub block_max_rel: [[f64; 3]; 3],
    pub max_rel_diff: f64,
    pub max_abs_diff: f64,
    /// `max |a|`, the reference scale for the pass criterion.
    pub scale: f64,
    /// First offending `(block_row, block_col, row, col)` positions.
    pub offenders: Vec<(usize, usize, usize, usize)>,
    /// Positions where exactly one side has a nonzero entry.
    pub structural_mismatches: usize,
    pub compared_entries: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Passes iff the sparsity patterns agree and `max |a - b| <= tolerance * max |a|`.
pub fn check_equivalence(a: &BlockOperator, b: &BlockOperator, tolerance: f64) -> EquivalenceReport {
    let mut block_max_rel = [[0.0; 3]; 3];
    let mut max_abs_diff = 0.0f64;
    let mut scale = 0.0f64;
    let mut diffs = Vec::new();
    let mut structural_mismatches = 0;
    let mut compared_entries = 0;
    let dims = a.row_dims();
    let cols = a.col_dims();
    for i in 0..3 {
        for j in 0..3 {
            let dense = |op: &BlockOperator| op.block(i, j).map(|blk| to_sparse(blk, dims[i], cols[j]));
            let (x, y) = (dense(a), dense(b));
            let zero = SparseMatrix::zeros(dims[i], cols[j]);
            let x = x.unwrap_or_else(|| zero.clone());
            let y = y.unwrap_or(zero);
            for r in 0..dims[i] {
                let (cx, vx) = x.row(r);
                let (cy, vy) = y.row(r);
                let (mut p, mut q) = (0, 0);
                while p < cx.len() || q < cy.len() {
                    let c = match (cx.get(p), cy.get(q)) {
                        (Some(&u), Some(&w)) => u.min(w),
                        (Some(&u), None) => u,
                        (None, Some(&w)) => w,
                        (None, None) => unreachable!(),
                    };
                    let u = if cx.get(p) == Some(&c) { p += 1; vx[p - 1] } else { 0.0 };
                    let w = if cy.get(q) == Some(&c) { q += 1; vy[q - 1] } else { 0.0 };
                    compared_entries += 1;
                    scale = scale.max(u.abs());
                    max_abs_diff = max_abs_diff.max((u - w).abs());
                    diffs.push(((u - w).abs(), (i, j, r, c)));
                    if (u == 0.0) != (w == 0.0) {
                        structural_mismatches += 1;
                        block_max_rel[i][j] = f64::INFINITY;
                        continue;
                    }
                    let rel = (u - w).abs() / u.abs().max(w.abs());
                    block_max_rel[i][j] = f64::max(block_max_rel[i][j], rel);
                }
            }
        }
    }
    let max_rel_diff = block_max_rel.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let passed = structural_mismatches == 0 && max_abs_diff <= tolerance * scale;
    let offenders = diffs
        .into_iter()
        .filter(|&(d, _)| d > tolerance * scale)
        .take(10)
        .map(|(_, at)| at)
        .collect();
    EquivalenceReport {
        block_max_rel,
        max_rel_diff,
        max_abs_diff,
        scale,
        offenders,
        structural_mismatches,
        compared_entries,
        tolerance,
        passed,
    }
}

fn to_sparse(b: &Block, n: usize, m: usize) -> SparseMatrix {
    match b {
        Block::Sparse(s) => s.clone(),
        other => {
            debug_assert_eq!(n, m);
            other.to_sparse(n)
        }
    }
}
