use super::{check_tau, merge_global, BoundaryValues, MfdOperators, StateVector};
use crate::error::{Error, Result};

/// Right-hand side of one Crank-Nicolson step with homogeneous boundary data:
///
/// ```text
/// g_B = (2/tau) B - curl_D E
/// g_E = (2/tau) E + curl_V B - grad_D p - (j^n + j^(n-1))
/// g_p = (2/tau) p + div_D E
/// ```
///
/// The sign of the `div_D E` term makes the step the trapezoidal rule for the
/// system row `-div_D E + (2/tau) p`, which is what conserves the lumped energy.
pub fn assemble_rhs(
    ops: &MfdOperators,
    tau: f64,
    prev: &StateVector,
    j_prev: &[f64],
    j_curr: &[f64],
) -> Result<Vec<f64>> {
    check_tau(tau)?;
    check_dims(ops, prev, j_prev, j_curr)?;
    let d = 2.0 / tau;
    let mut gb: Vec<f64> = prev.b.iter().map(|x| d * x).collect();
    ops.curl_d.spmv_add(-1.0, &prev.e, &mut gb)?;
    let mut ge: Vec<f64> =
        prev.e.iter().zip(j_prev.iter().zip(j_curr)).map(|(x, (a, b))| d * x - a - b).collect();
    ops.curl_v.spmv_add(1.0, &prev.b, &mut ge)?;
    ops.grad_d.spmv_add(-1.0, &prev.p, &mut ge)?;
    let mut gp: Vec<f64> = prev.p.iter().map(|x| d * x).collect();
    ops.div_d.spmv_add(1.0, &prev.e, &mut gp)?;
    Ok([gb, ge, gp].concat())
}

fn check_dims(ops: &MfdOperators, s: &StateVector, j0: &[f64], j1: &[f64]) -> Result<()> {
    let dims = ops.dims();
    if s.dims() != dims || j0.len() != dims[1] || j1.len() != dims[1] {
        return Err(Error::DimensionMismatch("state or current does not match operators".into()));
    }
    Ok(())
}

/// Right-hand side with prescribed boundary values. The previous level is the
/// interior state `prev` with boundary values `bc_prev`; the new level has
/// boundary values `bc_next`, whose coupling into interior rows is moved to
/// the right-hand side.
pub fn assemble_rhs_lifted(
    ops: &MfdOperators,
    tau: f64,
    prev: &StateVector,
    bc_prev: &BoundaryValues,
    bc_next: &BoundaryValues,
    j_prev: &[f64],
    j_curr: &[f64],
) -> Result<Vec<f64>> {
    check_tau(tau)?;
    check_dims(ops, prev, j_prev, j_curr)?;
    let maps = &ops.maps;
    let g = &ops.global;
    let d = 2.0 / tau;
    let (b0, e0, p0) = merge_global(maps, prev, bc_prev);
    let zero = StateVector::zeros(ops.dims());
    let (b1, e1, p1) = merge_global(maps, &zero, bc_next);
    // Off-diagonal parts act on the previous level and on the new boundary level.
    let eb: Vec<f64> = e0.iter().zip(&e1).map(|(a, b)| a + b).collect();
    let bb: Vec<f64> = b0.iter().zip(&b1).map(|(a, b)| a + b).collect();
    let pb: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| a + b).collect();

    let mut gb = maps.faces.restrict(&b0).into_iter().map(|x| d * x).collect::<Vec<_>>();
    let curl_e = maps.faces.restrict(&g.curl_d.mul_vec(&eb));
    gb.iter_mut().zip(curl_e).for_each(|(x, c)| *x -= c);

    let mut ge: Vec<f64> = prev.e.iter().zip(j_prev.iter().zip(j_curr)).map(|(x, (a, b))| d * x - a - b).collect();
    let curl_b = maps.edges.restrict(&g.curl_v.mul_vec(&bb));
    let grad_p = maps.edges.restrict(&g.grad_d.mul_vec(&pb));
    ge.iter_mut().zip(curl_b.iter().zip(&grad_p)).for_each(|(x, (c, q))| *x += c - q);

    let mut gp: Vec<f64> = prev.p.iter().map(|x| d * x).collect();
    let div_e = maps.vertices.restrict(&g.div_d.mul_vec(&eb));
    gp.iter_mut().zip(div_e).for_each(|(x, c)| *x += c);
    Ok([gb, ge, gp].concat())
}
