//! Property tests for structural invariants of the discretization.

use std::sync::OnceLock;

use mimetic_maxwell::dual::DualGeometry;
use mimetic_maxwell::harness::{run_on, Discretization, RunConfig, RunHooks, Scenario};
use mimetic_maxwell::mesh::{build_base_cube_pyramids, reorder_spatially, BoundaryMaps, MeshKind};
use mimetic_maxwell::mfd::{
    assemble_system, lumped_energy, step_crank_nicolson, BoundaryValues, StateVector, StepInput,
};
use mimetic_maxwell::precond::{BlockFactorization, BlockPreconditioner, InnerSolverConfig, PrecondKind};
use mimetic_maxwell::sparse::{fgmres, KrylovConfig, KrylovMethod, LinearOperator, SparseMatrix};
use proptest::prelude::*;

fn level1() -> &'static Discretization {
    static D: OnceLock<Discretization> = OnceLock::new();
    D.get_or_init(|| Discretization::new(MeshKind::CubePyramids, 1).unwrap())
}

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn weighted(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum()
}

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn nilpotent(a: &SparseMatrix, b: &SparseMatrix, v: &[f64]) -> f64 {
    inf(&a.mul_vec(&b.mul_vec(v))) / (a.norm_inf() * b.norm_inf() * inf(v).max(f64::MIN_POSITIVE))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compositions_vanish(seed in 0u64..u64::MAX) {
        let ops = &level1().ops;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut draw = |n: usize| (0..n).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect::<Vec<f64>>();
        let g = &ops.global;
        prop_assert!(nilpotent(&g.curl_d, &g.grad_d, &draw(g.grad_d.ncols())) <= 1e-12);
        prop_assert!(nilpotent(&g.div_v, &g.curl_d, &draw(g.curl_d.ncols())) <= 1e-12);
        prop_assert!(nilpotent(&g.div_d, &g.curl_v, &draw(g.curl_v.ncols())) <= 1e-12);
        prop_assert!(nilpotent(&g.curl_v, &g.grad_v, &draw(g.grad_v.ncols())) <= 1e-12);
    }

    /// `M_B curl_D` and `M_E curl_V` are adjoint, as are `M_E grad_D` and `M_p div_D`.
    #[test]
    fn lumped_adjointness(b in vec_of(level1().ops.dims()[0]),
                          e in vec_of(level1().ops.dims()[1]),
                          p in vec_of(level1().ops.dims()[2])) {
        let ops = &level1().ops;
        let m = &ops.masses;
        let lhs = weighted(&m.mt_b, &ops.curl_d.mul_vec(&e), &b);
        let rhs = weighted(&m.mt_e, &ops.curl_v.mul_vec(&b), &e);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
        let lhs = weighted(&m.mt_e, &ops.grad_d.mul_vec(&p), &e);
        let rhs = weighted(&m.mt_p, &ops.div_d.mul_vec(&e), &p);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
    }

    /// The scaled lumped system matrix differs from a skew operator only by its diagonal.
    #[test]
    fn system_is_weighted_skew_plus_diagonal(x in vec_of(level1().counts().dofs),
                                             y in vec_of(level1().counts().dofs),
                                             tau in 0.01f64..0.5) {
        let ops = &level1().ops;
        let sys = assemble_system(ops, tau).unwrap();
        let m = &ops.masses;
        let w: Vec<f64> = m.mt_b.iter().chain(&m.mt_e).chain(&m.mt_p).copied().collect();
        let mut ax = vec![0.0; x.len()];
        let mut ay = vec![0.0; y.len()];
        sys.apply(&x, &mut ax);
        sys.apply(&y, &mut ay);
        let d = 2.0 / tau;
        let yx = weighted(&w, &ax, &y) - d * weighted(&w, &x, &y);
        let xy = weighted(&w, &ay, &x) - d * weighted(&w, &x, &y);
        prop_assert!((yx + xy).abs() <= 1e-10 * (1.0 + yx.abs()));
    }

    /// Free evolution conserves the lumped energy and keeps a discrete-curl flux divergence-free.
    #[test]
    fn free_evolution_invariants(a in vec_of(level1().ops.dims()[1]),
                                 e in vec_of(level1().ops.dims()[1]),
                                 tau in 0.02f64..0.3,
                                 kind in prop::sample::select(PrecondKind::FACTORED.to_vec())) {
        let d = level1();
        let ops = &d.ops;
        let b = ops.curl_d.mul_vec(&a);
        let p = vec![0.0; ops.dims()[2]];
        let state = StateVector { b, e, p };
        let sys = assemble_system(ops, tau).unwrap();
        let fact = BlockFactorization::from_mfd(ops, tau).unwrap();
        let x = BlockPreconditioner::new(fact, kind, &InnerSolverConfig::default()).unwrap();
        let cfg = KrylovConfig { method: KrylovMethod::Fgmres, tol: 1e-12, restart: 100, max_iter: 500 };
        let bc = BoundaryValues::zeros(&d.maps);
        let zero = vec![0.0; ops.dims()[1]];
        let mut prev = state;
        for _ in 0..3 {
            let input = StepInput { prev: &prev, bc_prev: &bc, bc_next: &bc, j_prev: &zero, j_curr: &zero, rhs_perturbation: None };
            let out = step_crank_nicolson(ops, &sys, &x, &cfg, &input, true).unwrap();
            prop_assert!(out.report.converged);
            prop_assert!(out.div_max() <= 1e-10, "divergence {}", out.div_max());
            let (e0, e1) = (lumped_energy(ops, &prev), lumped_energy(ops, &out.state));
            prop_assert!((e1 - e0).abs() <= 1e-9 * e0.max(1e-300));
            prev = out.state;
        }
    }

    #[test]
    fn exact_lsu_inverts_the_system(v in vec_of(level1().counts().dofs), tau in 0.01f64..0.5) {
        let ops = &level1().ops;
        let sys = assemble_system(ops, tau).unwrap();
        let x = BlockPreconditioner::new(BlockFactorization::from_mfd(ops, tau).unwrap(), PrecondKind::Lsu, &InnerSolverConfig::exact()).unwrap();
        let mut av = vec![0.0; v.len()];
        let mut xav = vec![0.0; v.len()];
        sys.apply(&v, &mut av);
        x.apply(&av, &mut xav);
        let err: Vec<f64> = xav.iter().zip(&v).map(|(a, b)| a - b).collect();
        prop_assert!(dot(&err, &err).sqrt() <= 1e-10 * dot(&v, &v).sqrt());
    }

    /// Scaling the mesh by `s` scales volumes by `s^3` and keeps the identities.
    #[test]
    fn identities_survive_scaling(s in 0.1f64..10.0) {
        let mesh = build_base_cube_pyramids().unwrap().scaled(s).unwrap();
        let dual = DualGeometry::new(&mesh).unwrap();
        let vol = 2.0 * s.powi(3);
        for r in dual.identities().residuals(vol) {
            prop_assert!(r <= 1e-12);
        }
    }

    #[test]
    fn fgmres_solves_diagonally_dominant_systems(n in 2usize..40, seed in 0u64..1000) {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 4.0 + rand::Rng::gen::<f64>(&mut rng)));
            for _ in 0..2 {
                let j = rand::Rng::gen_range(&mut rng, 0..n);
                if j != i {
                    trip.push((i, j, rand::Rng::gen_range(&mut rng, -1.0..1.0)));
                }
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &trip);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.5).collect();
        let cfg = KrylovConfig { method: KrylovMethod::Fgmres, tol: 1e-10, restart: 5, max_iter: 500 };
        let (x, rep) = fgmres(&a, &mimetic_maxwell::sparse::Identity(n), &b, &vec![0.0; n], &cfg, None).unwrap();
        prop_assert!(rep.converged);
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(u, v)| u - v).collect();
        prop_assert!(dot(&r, &r).sqrt() <= 1e-9 * dot(&b, &b).sqrt());
    }

    #[test]
    fn transpose_is_an_involution_and_matches_adjoint(
        trip in prop::collection::vec((0usize..12, 0usize..9, -5.0f64..5.0), 0..60),
        x in vec_of(9), y in vec_of(12)) {
        let a = SparseMatrix::from_triplets(12, 9, &trip);
        let at = a.transpose();
        prop_assert_eq!(at.transpose(), a.clone());
        let lhs = dot(&a.mul_vec(&x), &y);
        let rhs = dot(&x, &at.mul_vec(&y));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}

#[test]
fn reordering_leaves_results_unchanged() {
    let raw = mimetic_maxwell::mesh::refine_times(&build_base_cube_pyramids().unwrap(), 1).unwrap();
    let a = Discretization::from_mesh(MeshKind::CubePyramids, 1, raw.clone()).unwrap();
    let b = Discretization::from_mesh(MeshKind::CubePyramids, 1, reorder_spatially(&raw).unwrap()).unwrap();
    let cfg = RunConfig { refine: 1, steps: 3, ..RunConfig::default() };
    let ra = run_on(&a, &cfg, &Scenario::Manufactured, &RunHooks::default()).unwrap().report;
    let rb = run_on(&b, &cfg, &Scenario::Manufactured, &RunHooks::default()).unwrap().report;
    assert!((ra.err_e - rb.err_e).abs() <= 1e-6 * ra.err_e);
    assert!((ra.err_b - rb.err_b).abs() <= 1e-6 * ra.err_b);
    let maps = BoundaryMaps::new(&raw);
    assert_eq!(maps.block_dims(), a.maps.block_dims());
}
