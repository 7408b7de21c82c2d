use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::LinearOperator;

/// Largest system for which the dense preconditioned operator is formed.
pub const DENSE_EIGEN_CAP: usize = 6000;

#[derive(Clone, Debug, Serialize)]
pub struct EigenReport {
    pub dim: usize,
    pub min_re: f64,
    pub max_re: f64,
    pub max_im: f64,
    /// `max |lambda - 1|`.
    pub max_dist_from_one: f64,
}

/// Spectrum of `X A`, formed densely column by column.
pub fn verify_eigen_clustering(
    a: &dyn LinearOperator,
    precond: &dyn LinearOperator,
    cap: usize,
) -> Result<EigenReport> {
    let n = a.nrows();
    if n > cap {
        return Err(Error::SizeCap { size: n, cap });
    }
    let mut dense = Mat::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut ae = vec![0.0; n];
    let mut xae = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        a.apply(&e, &mut ae);
        precond.apply(&ae, &mut xae);
        for i in 0..n {
            dense[(i, j)] = xae[i];
        }
        e[j] = 0.0;
    }
    let eig = dense.eigenvalues().map_err(|err| Error::NumericalBreakdown(format!("eigensolver: {err:?}")))?;
    let mut rep = EigenReport {
        dim: n,
        min_re: f64::INFINITY,
        max_re: f64::NEG_INFINITY,
        max_im: 0.0,
        max_dist_from_one: 0.0,
    };
    for z in eig {
        rep.min_re = rep.min_re.min(z.re);
        rep.max_re = rep.max_re.max(z.re);
        rep.max_im = rep.max_im.max(z.im.abs());
        rep.max_dist_from_one = rep.max_dist_from_one.max(((z.re - 1.0).powi(2) + z.im.powi(2)).sqrt());
    }
    Ok(rep)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DivergenceReport {
    pub max: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// `(step, iterate)` of the largest value; iterate 0 is the initial guess.
    pub worst: Option<(usize, usize)>,
    pub checked: usize,
}

/// Checks per-step, per-iterate divergence traces against `tolerance`.
pub fn verify_div_preservation(traces: &[Vec<f64>], tolerance: f64) -> DivergenceReport {
    let mut rep = DivergenceReport { tolerance, ..Default::default() };
    for (s, trace) in traces.iter().enumerate() {
        for (k, &v) in trace.iter().enumerate() {
            rep.checked += 1;
            let v = if v.is_nan() { f64::INFINITY } else { v };
            if rep.worst.is_none() || v > rep.max {
                rep.max = v;
                rep.worst = Some((s, k));
            }
        }
    }
    rep.passed = rep.max <= tolerance;
    rep
}
