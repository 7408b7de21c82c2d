use super::{assemble_rhs_lifted, BoundaryValues, MfdOperators, MfdSystem, StateVector};
use crate::error::{Error, Result};
use crate::sparse::{fgmres, KrylovConfig, LinearOperator, SolveReport};

/// Data for one Crank-Nicolson step.
#[derive(Clone, Copy, Debug)]
pub struct StepInput<'a> {
    pub prev: &'a StateVector,
    pub bc_prev: &'a BoundaryValues,
    pub bc_next: &'a BoundaryValues,
    /// Projected current at the previous and the new time, on interior edges.
    pub j_prev: &'a [f64],
    pub j_curr: &'a [f64],
    /// Added to the flux block of the right-hand side (fault injection).
    pub rhs_perturbation: Option<&'a [f64]>,
}

#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: StateVector,
    pub report: SolveReport,
    /// Relative divergence of the flux at every outer iterate, starting with the initial guess.
    pub div_trace: Vec<f64>,
}

impl StepOutput {
    pub fn div_max(&self) -> f64 {
        self.div_trace.iter().copied().fold(0.0, f64::max)
    }
}

/// `||div_V B||_inf / (||B||_inf ||div_V||_inf)` for interior fluxes `b` and
/// boundary fluxes `bc_b`; zero for a zero field.
pub fn divergence_measure(ops: &MfdOperators, b: &[f64], bc_b: &[f64]) -> f64 {
    let mut full = ops.maps.faces.prolong(b);
    ops.maps.boundary_faces.prolong_into(bc_b, &mut full);
    let div = ops.global.div_v.mul_vec(&full);
    let num = div.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bmax = full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if bmax == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    num / (bmax * ops.global.div_v.norm_inf())
}

/// Solves one step `A x^n = b(x^(n-1))` by preconditioned FGMRES.
///
/// The initial guess keeps `E` and `p` from the previous level and sets the
/// flux so the first block row holds exactly: `B_0 = (tau/2)(g_B - curl_D E_0)`.
/// The initial flux residual is then zero, and with a divergence-free previous
/// flux every outer iterate stays divergence-free, including after restarts.
pub fn step_crank_nicolson(
    ops: &MfdOperators,
    system: &MfdSystem,
    precond: &dyn LinearOperator,
    cfg: &KrylovConfig,
    input: &StepInput,
    track_divergence: bool,
) -> Result<StepOutput> {
    let tau = system.tau;
    let dims = ops.dims();
    if system.dims() != dims {
        return Err(Error::DimensionMismatch("system and operators disagree".into()));
    }
    let mut rhs =
        assemble_rhs_lifted(ops, tau, input.prev, input.bc_prev, input.bc_next, input.j_prev, input.j_curr)?;
    if let Some(d) = input.rhs_perturbation {
        if d.len() != dims[0] {
            return Err(Error::DimensionMismatch("flux perturbation length".into()));
        }
        rhs[..dims[0]].iter_mut().zip(d).for_each(|(r, v)| *r += v);
    }
    let mut x0 = input.prev.stacked();
    {
        let (b0, rest) = x0.split_at_mut(dims[0]);
        let e0 = &rest[..dims[1]];
        let curl_e = ops.curl_d.mul_vec(e0);
        for ((b, g), c) in b0.iter_mut().zip(&rhs[..dims[0]]).zip(curl_e) {
            *b = 0.5 * tau * (g - c);
        }
    }
    let bc_b = &input.bc_next.b;
    let mut trace = Vec::new();
    if track_divergence {
        trace.push(divergence_measure(ops, &x0[..dims[0]], bc_b));
    }
    let mut observe = |_: usize, x: &[f64]| trace.push(divergence_measure(ops, &x[..dims[0]], bc_b));
    let observer: Option<&mut dyn FnMut(usize, &[f64])> =
        if track_divergence { Some(&mut observe) } else { None };
    let (x, report) = fgmres(system, precond, &rhs, &x0, cfg, observer)?;
    let state = StateVector::from_stacked(&x, dims)?;
    Ok(StepOutput { state, report, div_trace: trace })
}
