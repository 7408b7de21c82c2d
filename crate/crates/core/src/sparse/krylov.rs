//! Restarted (flexible) GMRES and preconditioned conjugate gradients.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::SparseMatrix;
use crate::error::{Error, Result};

/// A linear map `y = Op x`. Used for system matrices and preconditioners alike.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        SparseMatrix::nrows(self)
    }
    fn ncols(&self) -> usize {
        SparseMatrix::ncols(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv(x, y).expect("operator dimension mismatch");
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

/// The identity map on `R^n`.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn nrows(&self) -> usize {
        self.0
    }
    fn ncols(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

/// Multiplication by a diagonal matrix (e.g. a Jacobi preconditioner).
#[derive(Clone, Debug)]
pub struct Diagonal(pub Vec<f64>);

impl Diagonal {
    /// Inverse of the diagonal of `a`; zero diagonal entries map to one.
    pub fn jacobi(a: &SparseMatrix) -> Self {
        Self(a.diagonal().into_iter().map(|d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect())
    }
}

impl LinearOperator for Diagonal {
    fn nrows(&self) -> usize {
        self.0.len()
    }
    fn ncols(&self) -> usize {
        self.0.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.0) {
            *yi = di * xi;
        }
    }
}

/// Wraps a closure as a square operator.
pub struct FnOperator<F: Fn(&[f64], &mut [f64])> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn nrows(&self) -> usize {
        self.dim
    }
    fn ncols(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KrylovMethod {
    Fgmres,
    Gmres,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    pub method: KrylovMethod,
    /// Relative residual tolerance `||b - A x|| / ||b||`.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self { method: KrylovMethod::Fgmres, tol: 1e-8, restart: 100, max_iter: 1000 }
    }
}

impl KrylovConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} outside (0, 1)", self.tol)));
        }
        if self.restart == 0 || self.max_iter == 0 {
            return Err(Error::InvalidArgument("restart and max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one Krylov solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// True relative residual of the returned iterate.
    pub residual: f64,
    pub converged: bool,
    /// Estimated relative residual after each iteration.
    pub history: Vec<f64>,
    pub seconds: f64,
    pub restarts: usize,
}

const HAPPY_BREAKDOWN: f64 = 1e-14;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn residual(a: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; b.len()];
    a.apply(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    r
}

fn check_finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NumericalBreakdown(format!("non-finite {what}")))
    }
}

/// Back substitution on the leading `k x k` block of the rotated Hessenberg matrix.
fn solve_upper(h: &[Vec<f64>], g: &[f64], k: usize) -> Vec<f64> {
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| h[j][i] * y[j]).sum();
        y[i] = (g[i] - s) / h[i][i];
    }
    y
}

/// Right-preconditioned restarted GMRES with modified Gram-Schmidt.
///
/// With [`KrylovMethod::Fgmres`] the preconditioned directions are stored so
/// `m` may change between applications. `observer` is called with the
/// iteration count and the current iterate after every iteration.
pub fn fgmres(
    a: &dyn LinearOperator,
    m: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    cfg: &KrylovConfig,
    mut observer: Option<&mut dyn FnMut(usize, &[f64])>,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let n = b.len();
    if a.nrows() != n || a.ncols() != n || m.nrows() != n || m.ncols() != n || x0.len() != n {
        return Err(Error::DimensionMismatch("fgmres operands".into()));
    }
    let start = Instant::now();
    let flexible = cfg.method == KrylovMethod::Fgmres;
    let mut report = SolveReport::default();
    let bnorm = norm(b);
    check_finite(bnorm, "right-hand side norm")?;
    if bnorm == 0.0 {
        report.converged = true;
        report.seconds = start.elapsed().as_secs_f64();
        return Ok((vec![0.0; n], report));
    }
    let mut x = x0.to_vec();
    let mut r = residual(a, b, &x);
    let mut rel = norm(&r) / bnorm;
    check_finite(rel, "residual")?;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

    while rel > cfg.tol && report.iterations < cfg.max_iter {
        let beta = norm(&r);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        // Column j of the Hessenberg matrix is stored as h[j].
        let mut h: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<(f64, f64)> = Vec::new();
        let mut g = vec![beta];
        let mut k = 0;
        let mut w = vec![0.0; n];
        let mut z = vec![0.0; n];

        while k < cfg.restart && report.iterations < cfg.max_iter {
            m.apply(&basis[k], &mut z);
            a.apply(&z, &mut w);
            if flexible {
                dirs.push(z.clone());
            }
            let w_norm0 = norm(&w);
            check_finite(w_norm0, "Krylov vector norm")?;
            let mut col = vec![0.0; k + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                col[i] = hij;
                axpy(-hij, v, &mut w);
            }
            let mut w_norm = norm(&w);
            if w_norm < inv_sqrt2 * w_norm0 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    col[i] += c;
                    axpy(-c, v, &mut w);
                }
                w_norm = norm(&w);
            }
            check_finite(w_norm, "orthogonalized vector norm")?;
            col[k + 1] = w_norm;
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a0, a1) = (col[i], col[i + 1]);
                col[i] = c * a0 + s * a1;
                col[i + 1] = -s * a0 + c * a1;
            }
            let denom = col[k].hypot(col[k + 1]);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (col[k] / denom, col[k + 1] / denom) };
            col[k] = denom;
            col[k + 1] = 0.0;
            cs.push((c, s));
            g.push(-s * g[k]);
            g[k] *= c;
            h.push(col);
            k += 1;
            report.iterations += 1;
            let est = g[k].abs() / bnorm;
            report.history.push(est);

            let breakdown = w_norm <= HAPPY_BREAKDOWN * w_norm0.max(f64::MIN_POSITIVE);
            if !breakdown {
                basis.push(w.iter().map(|v| v / w_norm).collect());
            }
            if let Some(obs) = observer.as_deref_mut() {
                let xk = update(&x, &h, &g, k, &basis, &dirs, m, flexible);
                obs(report.iterations, &xk);
            }
            if est <= cfg.tol || breakdown {
                break;
            }
        }
        x = update(&x, &h, &g, k, &basis, &dirs, m, flexible);
        r = residual(a, b, &x);
        rel = norm(&r) / bnorm;
        check_finite(rel, "residual")?;
        if rel > cfg.tol && report.iterations < cfg.max_iter {
            report.restarts += 1;
        }
    }
    report.residual = rel;
    report.converged = rel <= cfg.tol;
    report.seconds = start.elapsed().as_secs_f64();
    Ok((x, report))
}

#[allow(clippy::too_many_arguments)]
fn update(
    x: &[f64],
    h: &[Vec<f64>],
    g: &[f64],
    k: usize,
    basis: &[Vec<f64>],
    dirs: &[Vec<f64>],
    m: &dyn LinearOperator,
    flexible: bool,
) -> Vec<f64> {
    let y = solve_upper(h, g, k);
    let mut out = x.to_vec();
    if flexible {
        for (yi, zi) in y.iter().zip(dirs) {
            axpy(*yi, zi, &mut out);
        }
    } else {
        let mut v = vec![0.0; x.len()];
        for (yi, vi) in y.iter().zip(basis) {
            axpy(*yi, vi, &mut v);
        }
        let mut z = vec![0.0; x.len()];
        m.apply(&v, &mut z);
        axpy(1.0, &z, &mut out);
    }
    out
}

/// Preconditioned conjugate gradients for symmetric positive definite systems.
pub fn cg(
    a: &dyn LinearOperator,
    m: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = b.len();
    let mut report = SolveReport::default();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        report.converged = true;
        return Ok((vec![0.0; n], report));
    }
    let mut x = x0.to_vec();
    let mut r = residual(a, b, &x);
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = norm(&r) / bnorm;
    while rel > tol && report.iterations < max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        check_finite(pap, "curvature")?;
        if pap <= 0.0 {
            return Err(Error::NumericalBreakdown("operator not positive definite".into()));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        rel = norm(&r) / bnorm;
        report.iterations += 1;
        report.history.push(rel);
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    report.residual = norm(&residual(a, b, &x)) / bnorm;
    report.converged = rel <= tol;
    report.seconds = start.elapsed().as_secs_f64();
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(n: usize) -> SparseMatrix {
        SparseMatrix::from_diagonal(&(1..=n).map(|i| i as f64).collect::<Vec<_>>())
    }

    #[test]
    fn identity_converges_in_one_iteration() {
        let b: Vec<f64> = (0..7).map(|i| (i as f64).sin() + 0.3).collect();
        let (x, rep) =
            fgmres(&Identity(7), &Identity(7), &b, &[0.0; 7], &KrylovConfig::default(), None).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        for (a, b) in x.iter().zip(&b) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_inverse_preconditioner_takes_one_iteration() {
        let a = diag(10);
        let m = Diagonal((1..=10).map(|i| 1.0 / i as f64).collect());
        let b = vec![1.0; 10];
        let (_, rep) = fgmres(&a, &m, &b, &[0.0; 10], &KrylovConfig::default(), None).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.residual <= 1e-8);
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let (x, rep) =
            fgmres(&diag(3), &Identity(3), &[0.0; 3], &[1.0; 3], &KrylovConfig::default(), None)
                .unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert!(rep.converged);
    }

    #[test]
    fn nan_input_aborts() {
        let b = [1.0, f64::NAN];
        let r = fgmres(&diag(2), &Identity(2), &b, &[0.0; 2], &KrylovConfig::default(), None);
        assert!(matches!(r, Err(Error::NumericalBreakdown(_))));
    }

    #[test]
    fn restarted_gmres_converges_and_history_decreases_per_cycle() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -2.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t);
        let b = vec![1.0; n];
        let cfg = KrylovConfig { method: KrylovMethod::Gmres, tol: 1e-10, restart: 5, max_iter: 500 };
        let (x, rep) = fgmres(&a, &Identity(n), &b, &vec![0.0; n], &cfg, None).unwrap();
        assert!(rep.converged);
        let r = residual(&a, &b, &x);
        assert!(norm(&r) / norm(&b) <= 1e-10);
        for cycle in rep.history.chunks(cfg.restart) {
            assert!(cycle.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn observer_sees_every_iterate() {
        let a = diag(6);
        let mut seen = Vec::new();
        let mut obs = |k: usize, x: &[f64]| seen.push((k, x.to_vec()));
        let (x, rep) =
            fgmres(&a, &Identity(6), &[1.0; 6], &[0.0; 6], &KrylovConfig::default(), Some(&mut obs))
                .unwrap();
        assert_eq!(seen.len(), rep.iterations);
        let last = &seen.last().unwrap().1;
        for (p, q) in last.iter().zip(&x) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_solves_spd_system() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0)],
        );
        let b = [1.0, 2.0, 3.0];
        let (x, rep) = cg(&a, &Diagonal::jacobi(&a), &b, &[0.0; 3], 1e-12, 50).unwrap();
        assert!(rep.converged);
        let r = residual(&a, &b, &x);
        assert!(norm(&r) < 1e-11);
    }
}
