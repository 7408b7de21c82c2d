use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mimetic_maxwell::fem::{assemble_scaled_fe_system, check_equivalence};
use mimetic_maxwell::harness::{
    csv_string, emit_csv, emit_json, iteration_table, json_string, random_state, run_convergence, run_on, run_sweep,
    run_timing, Discretization, ErrorNorm, Method, RunConfig, RunHooks, RunReport, Scenario,
};
use mimetic_maxwell::mesh::MeshKind;
use mimetic_maxwell::mfd::assemble_system;
use mimetic_maxwell::precond::{InnerKind, InnerSolverConfig, PrecondKind};
use mimetic_maxwell::Error;

#[derive(Parser)]
#[command(name = "mimetic-maxwell", version, about = "Mimetic finite differences for time-domain Maxwell")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Zero wall-clock fields so reports are reproducible byte for byte.
    #[arg(long, global = true, default_value_t = true, action = clap::ArgAction::Set)]
    deterministic: bool,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Entity counts, mesh size and geometric identities.
    MeshInfo(MeshArgs),
    /// Compare the scaled lumped FE system with the mimetic system.
    CheckEquivalence {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, default_value_t = 0.1)]
        tau: f64,
    },
    /// Spatial convergence over a refinement series.
    Converge {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        refines: Vec<usize>,
    },
    /// Mean iteration counts over a (tau, h) grid, each run to t = 1.
    Sweep {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        refines: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025,0.0125")]
        taus: Vec<f64>,
    },
    /// Per-step solve times over a refinement series and the fitted exponent.
    Timing {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        refines: Vec<usize>,
        /// Runs per level; the median per-step time is kept.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
    /// One run: the manufactured solution, or free evolution of a random state.
    Solve {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 2)]
        refine: usize,
        #[arg(long, value_enum, default_value_t = ScenarioArg::Manufactured)]
        scenario: ScenarioArg,
    },
}

#[derive(Args, Clone)]
struct MeshArgs {
    #[arg(long, value_enum, default_value_t = MeshArg::CubePyramids)]
    mesh: MeshArg,
    #[arg(long, default_value_t = 2)]
    refine: usize,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = MeshArg::CubePyramids)]
    mesh: MeshArg,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = PrecondArg::Lsu)]
    precond: PrecondArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Mfd)]
    method: MethodArg,
    #[arg(long, default_value_t = 1e-8)]
    outer_tol: f64,
    #[arg(long, default_value_t = 1e-2)]
    inner_tol: f64,
    #[arg(long, default_value_t = 100)]
    restart: usize,
    /// Outer iteration budget per step.
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = InnerArg::Gmres)]
    inner: InnerArg,
    #[arg(long, value_enum, default_value_t = NormArg::Lumped)]
    norm: NormArg,
}

#[derive(ValueEnum, Clone, Copy)]
enum MeshArg {
    CubePyramids,
    Bcc,
}

#[derive(ValueEnum, Clone, Copy)]
enum PrecondArg {
    Ls,
    Su,
    Lsu,
    /// LSU with exact Schur-complement inverses.
    Exact,
    None,
}

#[derive(ValueEnum, Clone, Copy)]
enum MethodArg {
    Mfd,
    Fem,
}

#[derive(ValueEnum, Clone, Copy)]
enum InnerArg {
    Gmres,
    Cg,
    Exact,
}

#[derive(ValueEnum, Clone, Copy)]
enum ScenarioArg {
    Manufactured,
    /// Zero current and boundary data from a random interior state drawn with `--seed`.
    Free,
}

#[derive(ValueEnum, Clone, Copy)]
enum NormArg {
    L2,
    Lumped,
}

impl From<MeshArg> for MeshKind {
    fn from(m: MeshArg) -> Self {
        match m {
            MeshArg::CubePyramids => MeshKind::CubePyramids,
            MeshArg::Bcc => MeshKind::Bcc,
        }
    }
}

const EXIT_NONCONVERGED: u8 = 1;
const EXIT_INVARIANT: u8 = 2;

impl SolverArgs {
    fn config(&self, cli: &Cli, refine: usize, tau: f64, steps: usize) -> RunConfig {
        let (precond, inner_kind) = match self.precond {
            PrecondArg::Ls => (PrecondKind::Ls, None),
            PrecondArg::Su => (PrecondKind::Su, None),
            PrecondArg::Lsu => (PrecondKind::Lsu, None),
            PrecondArg::Exact => (PrecondKind::Lsu, Some(InnerKind::Exact)),
            PrecondArg::None => (PrecondKind::None, None),
        };
        let kind = inner_kind.unwrap_or(match self.inner {
            InnerArg::Gmres => InnerKind::Gmres,
            InnerArg::Cg => InnerKind::Cg,
            InnerArg::Exact => InnerKind::Exact,
        });
        RunConfig {
            mesh: self.mesh.into(),
            refine,
            tau: self.tau.unwrap_or(tau),
            steps: self.steps.unwrap_or(steps),
            method: match self.method {
                MethodArg::Mfd => Method::Mfd,
                MethodArg::Fem => Method::Fem,
            },
            precond,
            inner: InnerSolverConfig { kind, tol: self.inner_tol, ..InnerSolverConfig::default() },
            outer_tol: self.outer_tol,
            restart: self.restart,
            max_iter: self.max_iter,
            error_norm: match self.norm {
                NormArg::L2 => ErrorNorm::L2,
                NormArg::Lumped => ErrorNorm::Lumped,
            },
            deterministic: cli.deterministic,
            seed: cli.seed,
            ..RunConfig::default()
        }
    }
}

fn write_or_print(cli: &Cli, text: &str) -> Result<(), Error> {
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sibling(path: &std::path::Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn report_status(reports: &[RunReport]) -> u8 {
    if reports.iter().any(|r| r.nonconverged_steps > 0) {
        EXIT_NONCONVERGED
    } else {
        0
    }
}

fn execute(cli: &Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::MeshInfo(m) => {
            let disc = Discretization::new(m.mesh.into(), m.refine)?;
            let ids = disc.dual.identities();
            let residuals = ids.residuals(disc.mesh.volume());
            let info = serde_json::json!({
                "counts": disc.counts(),
                "euler_characteristic": disc.mesh.euler_characteristic(),
                "volume": disc.mesh.volume(),
                "identities": ids,
                "identity_residuals": residuals,
                "nondegeneracy": disc.nondegeneracy,
                "substitution": disc.substitution,
            });
            write_or_print(cli, &json_string(&info)?)?;
            let ok = disc.nondegeneracy.passed && residuals.iter().all(|&r| r <= 1e-10);
            Ok(if ok { 0 } else { EXIT_INVARIANT })
        }
        Command::CheckEquivalence { mesh, tau } => {
            let disc = Discretization::new(mesh.mesh.into(), mesh.refine)?;
            let mfd = assemble_system(&disc.ops, *tau)?;
            let sfe = assemble_scaled_fe_system(&disc.mesh, &disc.dual, &disc.maps, *tau)?;
            let rep = check_equivalence(&mfd.a, &sfe, 1e-13);
            println!(
                "max abs diff {:.3e}, relative to max|A| {:.3e}, structural mismatches {}: {}",
                rep.max_abs_diff,
                rep.max_abs_diff / rep.scale,
                rep.structural_mismatches,
                if rep.passed { "PASS" } else { "FAIL" }
            );
            if let Some(p) = &cli.out {
                emit_json(&rep, p)?;
            }
            Ok(if rep.passed { 0 } else { EXIT_INVARIANT })
        }
        Command::Converge { solver, refines } => {
            let base = solver.config(cli, 0, 0.0125, 8);
            let table = run_convergence(&base, refines)?;
            for (i, r) in table.reports.iter().enumerate() {
                let rates = if i == 0 {
                    String::new()
                } else {
                    format!("  ratio E {:.3}  ratio B {:.3}", table.ratio_e[i - 1], table.ratio_b[i - 1])
                };
                eprintln!("h = {:.5}: errE {:.4e}  errB {:.4e}{rates}", r.counts.h, r.err_e, r.err_b);
            }
            match &cli.out {
                Some(p) => {
                    emit_csv(&table.reports, p)?;
                    emit_json(&table, &sibling(p, "json"))?;
                }
                None => print!("{}", csv_string(&table.reports)),
            }
            Ok(report_status(&table.reports))
        }
        Command::Sweep { solver, refines, taus } => {
            let base = RunConfig { errors: false, ..solver.config(cli, 0, 0.1, 1) };
            let reports = run_sweep(&base, refines, taus, 1.0)?;
            match &cli.out {
                Some(p) => {
                    emit_csv(&reports, p)?;
                    std::fs::write(sibling(p, "table.csv"), iteration_table(&reports))?;
                    emit_json(&reports, &sibling(p, "json"))?;
                }
                None => print!("{}", iteration_table(&reports)),
            }
            Ok(report_status(&reports))
        }
        Command::Timing { solver, refines, repeats } => {
            let base = solver.config(cli, 0, 0.1, 10);
            let table = run_timing(&base, refines, *repeats)?;
            for r in &table.rows {
                eprintln!("refine {}: N = {}, {:.4e} s/step, {:.2} iterations", r.refine, r.dofs, r.seconds_per_step, r.iters_raw);
            }
            eprintln!("fitted exponent {:.3} (N log N reference {:.3})", table.exponent, table.nlogn_exponent);
            write_or_print(cli, &json_string(&table)?)?;
            Ok(0)
        }
        Command::Solve { solver, refine, scenario } => {
            let cfg = solver.config(cli, *refine, 0.0125, 8);
            cfg.validate()?;
            let disc = Discretization::new(cfg.mesh, cfg.refine)?;
            let scenario = match scenario {
                ScenarioArg::Manufactured => Scenario::Manufactured,
                ScenarioArg::Free => Scenario::Free(random_state(&disc, cli.seed)),
            };
            let report = run_on(&disc, &cfg, &scenario, &RunHooks::default())?.report;
            write_or_print(cli, &json_string(&report)?)?;
            if cfg.method == Method::Mfd && cfg.track_divergence && report.div_b_max > 1e-10 {
                return Ok(EXIT_INVARIANT);
            }
            Ok(report_status(std::slice::from_ref(&report)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::NumericalBreakdown(_) => EXIT_NONCONVERGED,
                _ => EXIT_INVARIANT,
            })
        }
    }
}
