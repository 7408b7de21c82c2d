use super::FeSystem;
use crate::error::{Error, Result};
use crate::mfd::{merge_global, BoundaryValues, StateVector};
use crate::sparse::{fgmres, KrylovConfig, LinearOperator, SolveReport, SparseMatrix};

/// Data for one FE Crank-Nicolson step. Currents are load vectors on interior edges.
#[derive(Clone, Copy, Debug)]
pub struct FeStepInput<'a> {
    pub prev: &'a StateVector,
    pub bc_prev: &'a BoundaryValues,
    pub bc_next: &'a BoundaryValues,
    pub j_prev: &'a [f64],
    pub j_curr: &'a [f64],
}

/// Interior rows of `(2/tau) M (x_prev - x_bc) - N (x_prev + x_bc) - J`, where
/// `x_prev` is the full previous level and `x_bc` the new boundary level
/// extended by zero.
pub fn fe_rhs_lifted(sys: &FeSystem, input: &FeStepInput) -> Result<Vec<f64>> {
    let dims = sys.dims();
    if input.prev.dims() != dims || input.j_prev.len() != dims[1] || input.j_curr.len() != dims[1] {
        return Err(Error::DimensionMismatch("FE state or load does not match system".into()));
    }
    let maps = &sys.maps;
    let d = 2.0 / sys.tau;
    let (b0, e0, p0) = merge_global(maps, input.prev, input.bc_prev);
    let (b1, e1, p1) = merge_global(maps, &StateVector::zeros(dims), input.bc_next);
    let minus = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| d * (x - y)).collect::<Vec<_>>();
    let plus = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
    let apply = |m: &SparseMatrix, x: &[f64], y: &mut [f64], s: f64| m.spmv_add(s, x, y);

    let (sb, se, sp) = (plus(&b0, &b1), plus(&e0, &e1), plus(&p0, &p1));
    let mut gb = sys.masses.m_b.mul_vec(&minus(&b0, &b1));
    apply(&sys.n_be, &se, &mut gb, -1.0)?;
    let mut ge = sys.masses.m_e.mul_vec(&minus(&e0, &e1));
    apply(&sys.n_eb, &sb, &mut ge, -1.0)?;
    apply(&sys.n_ep, &sp, &mut ge, -1.0)?;
    let mut gp = sys.masses.m_p.mul_vec(&minus(&p0, &p1));
    apply(&sys.n_pe, &se, &mut gp, -1.0)?;

    let mut ge = maps.edges.restrict(&ge);
    ge.iter_mut().zip(input.j_prev.iter().zip(input.j_curr)).for_each(|(g, (a, b))| *g -= a + b);
    Ok([maps.faces.restrict(&gb), ge, maps.vertices.restrict(&gp)].concat())
}

/// One FE step from the previous interior state as initial guess.
pub fn step_fe(
    sys: &FeSystem,
    precond: &dyn LinearOperator,
    cfg: &KrylovConfig,
    input: &FeStepInput,
) -> Result<(StateVector, SolveReport)> {
    let rhs = fe_rhs_lifted(sys, input)?;
    let (x, report) = fgmres(sys, precond, &rhs, &input.prev.stacked(), cfg, None)?;
    Ok((StateVector::from_stacked(&x, sys.dims())?, report))
}
