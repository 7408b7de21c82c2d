use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{ErrorNorm, ManufacturedSolution, Method, RunConfig};
use crate::dual::{check_nondegenerate, DualGeometry, NondegeneracyReport};
use crate::error::{Error, Result};
use crate::fem::{
    edge_average_dofs, l2_error_edge_field, l2_error_face_field, load_edges, step_fe, FeOperators,
    FeStepInput, FeSystem, MassSet,
};
use crate::geometry::Point3;
use crate::mesh::{build_base_cube_pyramids, build_bcc_mesh, refine_times, reorder_spatially, BoundaryMaps, MeshKind, TetMesh};
use crate::mfd::{
    assemble_system, build_operators, divergence_measure, interpolate_b_faces,
    interpolate_e_edges, lumped_energy, merge_global, project_current, step_crank_nicolson, BoundaryValues,
    MfdOperators, StateVector, StepInput,
};
use crate::precond::{BlockFactorization, BlockPreconditioner, PrecondKind};
use crate::sparse::{Identity, LinearOperator, SparseMatrix};

/// Mesh, dual geometry and mimetic operators for one refinement level.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub kind: MeshKind,
    pub refine: usize,
    pub mesh: TetMesh,
    pub dual: DualGeometry,
    pub maps: BoundaryMaps,
    pub ops: MfdOperators,
    pub nondegeneracy: NondegeneracyReport,
    /// Set when the requested mesh was not well-centred and the BCC mesh was used instead.
    pub substitution: Option<String>,
}

/// The mesh of the given family and level, renumbered for memory locality.
pub fn build_mesh(kind: MeshKind, refine: usize) -> Result<TetMesh> {
    let mesh = match kind {
        MeshKind::CubePyramids => refine_times(&build_base_cube_pyramids()?, refine)?,
        MeshKind::Bcc => build_bcc_mesh(1 << refine)?,
    };
    reorder_spatially(&mesh)
}

impl Discretization {
    pub fn new(kind: MeshKind, refine: usize) -> Result<Self> {
        let mesh = build_mesh(kind, refine)?;
        match Self::from_mesh(kind, refine, mesh) {
            Ok(d) if d.nondegeneracy.passed => Ok(d),
            first if kind == MeshKind::CubePyramids => {
                let why = match &first {
                    Ok(d) => format!("{} tets not well-centred", d.nondegeneracy.failures),
                    Err(e) => e.to_string(),
                };
                let mut d = Self::from_mesh(MeshKind::Bcc, refine, build_mesh(MeshKind::Bcc, refine)?)?;
                d.substitution = Some(format!("cube-pyramids level {refine} rejected ({why}); using bcc"));
                Ok(d)
            }
            other => other,
        }
    }

    pub fn from_mesh(kind: MeshKind, refine: usize, mesh: TetMesh) -> Result<Self> {
        let dual = DualGeometry::new(&mesh)?;
        let nondegeneracy = check_nondegenerate(&mesh, &dual.circumcenters);
        let maps = BoundaryMaps::new(&mesh);
        let ops = build_operators(&mesh, &dual, &maps);
        Ok(Self { kind, refine, mesh, dual, maps, ops, nondegeneracy, substitution: None })
    }

    pub fn counts(&self) -> MeshCounts {
        let [f, e, v] = self.maps.block_dims();
        MeshCounts {
            vertices: self.mesh.num_vertices(),
            edges: self.mesh.num_edges(),
            faces: self.mesh.num_faces(),
            tets: self.mesh.num_tets(),
            interior_vertices: v,
            interior_edges: e,
            interior_faces: f,
            dofs: f + e + v,
            h: self.mesh.h(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub tets: usize,
    pub interior_vertices: usize,
    pub interior_edges: usize,
    pub interior_faces: usize,
    /// Interior unknowns of the linear system.
    pub dofs: usize,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Largest relative flux divergence over this step's outer iterates
    /// (or of the accepted flux when iterates are not traced).
    #[serde(rename = "divB_max")]
    pub div_b_max: f64,
    pub energy: f64,
    pub err_e_l2: f64,
    pub err_b_l2: f64,
    pub err_e_lumped: f64,
    pub err_b_lumped: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub substitution: Option<String>,
    pub counts: MeshCounts,
    pub steps: Vec<StepRecord>,
    /// Maximum over steps of the selected spatial error norm.
    #[serde(rename = "errE")]
    pub err_e: f64,
    #[serde(rename = "errB")]
    pub err_b: f64,
    /// Mean outer iterations per step, rounded to the nearest integer.
    pub iters_mean: usize,
    pub iters_raw: f64,
    #[serde(rename = "divB_max")]
    pub div_b_max: f64,
    /// Largest relative change of the lumped energy over one step.
    pub energy_drift: f64,
    pub seconds_per_step: f64,
    pub nonconverged_steps: usize,
    pub inner_iterations: usize,
    pub inner_failures: usize,
}

impl RunReport {
    fn finish(config: &RunConfig, disc: &Discretization, steps: Vec<StepRecord>, inner: (usize, usize)) -> Self {
        let n = steps.len().max(1) as f64;
        let max = |f: fn(&StepRecord) -> f64| steps.iter().map(f).fold(0.0, f64::max);
        let (err_e, err_b) = match config.error_norm {
            ErrorNorm::L2 => (max(|s| s.err_e_l2), max(|s| s.err_b_l2)),
            ErrorNorm::Lumped => (max(|s| s.err_e_lumped), max(|s| s.err_b_lumped)),
        };
        let iters_raw = steps.iter().map(|s| s.iterations as f64).sum::<f64>() / n;
        let mut energy_drift = 0.0f64;
        for w in steps.windows(2) {
            if w[0].energy > 0.0 {
                energy_drift = energy_drift.max((w[1].energy - w[0].energy).abs() / w[0].energy);
            }
        }
        let mut report = Self {
            config: config.clone(),
            substitution: disc.substitution.clone(),
            counts: disc.counts(),
            err_e,
            err_b,
            iters_mean: iters_raw.round() as usize,
            iters_raw,
            div_b_max: max(|s| s.div_b_max),
            energy_drift,
            seconds_per_step: steps.iter().map(|s| s.seconds).sum::<f64>() / n,
            nonconverged_steps: steps.iter().filter(|s| !s.converged).count(),
            inner_iterations: inner.0,
            inner_failures: inner.1,
            steps,
        };
        if config.deterministic {
            report.zero_clocks();
        }
        report
    }

    /// Clears wall-clock fields so reports are reproducible byte for byte.
    pub fn zero_clocks(&mut self) {
        self.seconds_per_step = 0.0;
        self.steps.iter_mut().for_each(|s| s.seconds = 0.0);
    }
}

/// What drives the run.
#[derive(Clone, Debug)]
pub enum Scenario {
    /// The manufactured solution with its boundary data and current.
    Manufactured,
    /// Zero current and zero boundary data from the given interior state.
    Free(StateVector),
}

/// Fault injection for negative controls.
#[derive(Clone, Debug, Default)]
pub struct RunHooks {
    /// Added to the flux rows of every right-hand side.
    pub flux_rhs_perturbation: Option<Vec<f64>>,
}

/// Full result of a run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub final_state: StateVector,
    /// Per-step divergence traces over outer iterates (MFD, when tracked).
    pub div_traces: Vec<Vec<f64>>,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let disc = Discretization::new(cfg.mesh, cfg.refine)?;
    run_on(&disc, cfg, &Scenario::Manufactured, &RunHooks::default())
}

/// Dispatches to the mimetic or FE path on a prepared discretization.
pub fn run_on(disc: &Discretization, cfg: &RunConfig, scenario: &Scenario, hooks: &RunHooks) -> Result<RunOutcome> {
    cfg.validate()?;
    match cfg.method {
        Method::Mfd => run_mfd(disc, cfg, scenario, hooks),
        Method::Fem => run_fem(disc, cfg, scenario),
    }
}

fn build_precond(
    kind: PrecondKind,
    fact: impl FnOnce() -> Result<BlockFactorization>,
    cfg: &RunConfig,
    n: usize,
) -> Result<Box<dyn PrecondHandle>> {
    Ok(match kind {
        PrecondKind::None => Box::new(Identity(n)),
        k => Box::new(BlockPreconditioner::new(fact()?, k, &cfg.inner)?),
    })
}

/// A preconditioner with optional inner-solve accounting.
pub(crate) trait PrecondHandle: LinearOperator {
    fn inner_counts(&self) -> (usize, usize) {
        (0, 0)
    }
}

impl PrecondHandle for Identity {}

impl PrecondHandle for BlockPreconditioner {
    fn inner_counts(&self) -> (usize, usize) {
        let s = self.stats();
        (s.iterations, s.failures)
    }
}

/// Boundary values at the next level: exact tangential `E`, zero `p`, and
/// boundary fluxes advanced by the discrete Faraday law
/// `B^n = B^(n-1) - (tau/2) curl (E^n + E^(n-1))`, which involves boundary edges only.
fn advance_boundary(
    maps: &BoundaryMaps,
    curl: &SparseMatrix,
    tau: f64,
    prev: &BoundaryValues,
    e_next: Vec<f64>,
) -> BoundaryValues {
    let sum: Vec<f64> = prev.e.iter().zip(&e_next).map(|(a, b)| a + b).collect();
    let mut full = vec![0.0; maps.boundary_edges.global_len()];
    maps.boundary_edges.prolong_into(&sum, &mut full);
    let c = maps.boundary_faces.restrict(&curl.mul_vec(&full));
    BoundaryValues {
        b: prev.b.iter().zip(c).map(|(b, c)| b - 0.5 * tau * c).collect(),
        e: e_next,
        p: vec![0.0; maps.boundary_vertices.len()],
    }
}

struct Errors {
    e_l2: f64,
    b_l2: f64,
    e_lumped: f64,
    b_lumped: f64,
}

fn errors_at(disc: &Discretization, state: &StateVector, bc: &BoundaryValues, t: f64) -> Errors {
    let sol = ManufacturedSolution;
    let (b, e, _) = merge_global(&disc.maps, state, bc);
    let e_exact = |x: Point3| sol.e(x, t);
    let b_exact = |x: Point3| sol.b(x, t);
    let pe = disc.maps.edges.restrict(&interpolate_e_edges(&disc.mesh, e_exact));
    let pb = disc.maps.faces.restrict(&interpolate_b_faces(&disc.mesh, &disc.dual, b_exact));
    let lumped = |w: &[f64], u: &[f64], v: &[f64]| {
        w.iter().zip(u.iter().zip(v)).map(|(w, (a, b))| w * (a - b).powi(2)).sum::<f64>().sqrt()
    };
    let m = &disc.ops.masses;
    Errors {
        e_l2: l2_error_edge_field(&disc.mesh, &e, e_exact),
        b_l2: l2_error_face_field(&disc.mesh, &b, b_exact),
        e_lumped: lumped(&m.mt_e, &state.e, &pe),
        b_lumped: lumped(&m.mt_b, &state.b, &pb),
    }
}

struct Initial {
    state: StateVector,
    bc: BoundaryValues,
}

fn manufactured_initial(disc: &Discretization, curl: &SparseMatrix, edge_dofs: &dyn Fn(&dyn Fn(Point3) -> Point3) -> Vec<f64>) -> Initial {
    let sol = ManufacturedSolution;
    let maps = &disc.maps;
    let e = edge_dofs(&|x| sol.e(x, 0.0));
    let b = curl.mul_vec(&edge_dofs(&|x| sol.potential(x, 0.0)));
    let p = vec![0.0; disc.mesh.num_vertices()];
    Initial {
        state: StateVector { b: maps.faces.restrict(&b), e: maps.edges.restrict(&e), p: maps.vertices.restrict(&p) },
        bc: BoundaryValues::from_global(maps, &b, &e, &p),
    }
}

fn check_state(disc: &Discretization, s: &StateVector) -> Result<()> {
    if s.dims() != disc.maps.block_dims() {
        return Err(Error::DimensionMismatch("initial state does not match mesh".into()));
    }
    Ok(())
}

fn run_mfd(disc: &Discretization, cfg: &RunConfig, scenario: &Scenario, hooks: &RunHooks) -> Result<RunOutcome> {
    let ops = &disc.ops;
    let maps = &disc.maps;
    let tau = cfg.tau;
    let sol = ManufacturedSolution;
    let system = assemble_system(ops, tau)?;
    let precond = build_precond(cfg.precond, || BlockFactorization::from_mfd(ops, tau), cfg, system.nrows())?;
    let krylov = cfg.krylov();
    let manufactured = matches!(scenario, Scenario::Manufactured);
    let edge_dofs = |f: &dyn Fn(Point3) -> Point3| interpolate_e_edges(&disc.mesh, f);
    let Initial { mut state, mut bc } = match scenario {
        Scenario::Manufactured => manufactured_initial(disc, &ops.global.curl_d, &edge_dofs),
        Scenario::Free(s) => {
            check_state(disc, s)?;
            Initial { state: s.clone(), bc: BoundaryValues::zeros(maps) }
        }
    };
    let zero_j = vec![0.0; maps.edges.len()];
    let current = |t: f64| {
        if manufactured {
            project_current(&disc.mesh, maps, |x| sol.j(x, t))
        } else {
            zero_j.clone()
        }
    };
    let mut records = Vec::with_capacity(cfg.steps);
    let mut traces = Vec::with_capacity(cfg.steps);
    let mut j_prev = current(0.0);
    for n in 1..=cfg.steps {
        let t = n as f64 * tau;
        let bc_next = if manufactured {
            let e = maps.boundary_edges.restrict(&edge_dofs(&|x| sol.e(x, t)));
            advance_boundary(maps, &ops.global.curl_d, tau, &bc, e)
        } else {
            bc.clone()
        };
        let j_curr = current(t);
        let input = StepInput {
            prev: &state,
            bc_prev: &bc,
            bc_next: &bc_next,
            j_prev: &j_prev,
            j_curr: &j_curr,
            rhs_perturbation: hooks.flux_rhs_perturbation.as_deref(),
        };
        let out = step_crank_nicolson(ops, &system, precond.as_ref(), &krylov, &input, cfg.track_divergence)?;
        state = out.state;
        bc = bc_next;
        j_prev = j_curr;
        let div_b_max = if cfg.track_divergence {
            out.div_trace.iter().copied().fold(0.0, f64::max)
        } else {
            divergence_measure(ops, &state.b, &bc.b)
        };
        let err = if manufactured && cfg.errors { Some(errors_at(disc, &state, &bc, t)) } else { None };
        records.push(record(n, t, &out.report, div_b_max, lumped_energy(ops, &state), err));
        traces.push(out.div_trace);
    }
    let report = RunReport::finish(cfg, disc, records, precond.inner_counts());
    Ok(RunOutcome { report, final_state: state, div_traces: traces })
}

fn record(
    step: usize,
    time: f64,
    rep: &crate::sparse::SolveReport,
    div_b_max: f64,
    energy: f64,
    err: Option<Errors>,
) -> StepRecord {
    let err = err.unwrap_or(Errors { e_l2: 0.0, b_l2: 0.0, e_lumped: 0.0, b_lumped: 0.0 });
    StepRecord {
        step,
        time,
        iterations: rep.iterations,
        residual: rep.residual,
        converged: rep.converged,
        div_b_max,
        energy,
        err_e_l2: err.e_l2,
        err_b_l2: err.b_l2,
        err_e_lumped: err.e_lumped,
        err_b_lumped: err.b_lumped,
        seconds: rep.seconds,
    }
}

/// Consistent-mass FE system and factorization for one time step size.
pub fn fe_system(disc: &Discretization, tau: f64) -> Result<FeSystem> {
    FeSystem::new(FeOperators::new(&disc.mesh), MassSet::consistent(&disc.mesh), &disc.maps, tau)
}

fn run_fem(disc: &Discretization, cfg: &RunConfig, scenario: &Scenario) -> Result<RunOutcome> {
    let maps = &disc.maps;
    let tau = cfg.tau;
    let sol = ManufacturedSolution;
    let sys = fe_system(disc, tau)?;
    let precond = build_precond(cfg.precond, || BlockFactorization::from_fe(&sys), cfg, sys.nrows())?;
    let krylov = cfg.krylov();
    let manufactured = matches!(scenario, Scenario::Manufactured);
    let edge_dofs = |f: &dyn Fn(Point3) -> Point3| edge_average_dofs(&disc.mesh, f);
    let Initial { mut state, mut bc } = match scenario {
        Scenario::Manufactured => manufactured_initial(disc, &sys.ops.curl, &edge_dofs),
        Scenario::Free(s) => {
            check_state(disc, s)?;
            Initial { state: s.clone(), bc: BoundaryValues::zeros(maps) }
        }
    };
    let current = |t: f64| {
        if manufactured {
            maps.edges.restrict(&load_edges(&disc.mesh, |x| sol.j(x, t)))
        } else {
            vec![0.0; maps.edges.len()]
        }
    };
    let mut records = Vec::with_capacity(cfg.steps);
    let mut j_prev = current(0.0);
    for n in 1..=cfg.steps {
        let t = n as f64 * tau;
        let bc_next = if manufactured {
            let e = maps.boundary_edges.restrict(&edge_dofs(&|x| sol.e(x, t)));
            advance_boundary(maps, &sys.ops.curl, tau, &bc, e)
        } else {
            bc.clone()
        };
        let j_curr = current(t);
        let input = FeStepInput { prev: &state, bc_prev: &bc, bc_next: &bc_next, j_prev: &j_prev, j_curr: &j_curr };
        let start = Instant::now();
        let (next, mut rep) = step_fe(&sys, precond.as_ref(), &krylov, &input)?;
        rep.seconds = start.elapsed().as_secs_f64();
        state = next;
        bc = bc_next;
        j_prev = j_curr;
        let div_b_max = divergence_measure(&disc.ops, &state.b, &bc.b);
        let err = if manufactured && cfg.errors { Some(errors_at(disc, &state, &bc, t)) } else { None };
        records.push(record(n, t, &rep, div_b_max, lumped_energy(&disc.ops, &state), err));
    }
    let report = RunReport::finish(cfg, disc, records, precond.inner_counts());
    Ok(RunOutcome { report, final_state: state, div_traces: Vec::new() })
}

/// Interior state with entries uniform in `[-1, 1]`, reproducible from `seed`.
pub fn random_state(disc: &Discretization, seed: u64) -> StateVector {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let [nb, ne, np] = disc.maps.block_dims();
    let mut draw = |n: usize| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    StateVector { b: draw(nb), e: draw(ne), p: draw(np) }
}
