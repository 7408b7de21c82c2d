//! Convergence, robustness and scaling studies built from single runs.

use serde::{Deserialize, Serialize};

use super::{run_on, Discretization, RunConfig, RunHooks, RunReport, Scenario};
use crate::error::Result;
use crate::mfd::StateVector;

/// Errors over a refinement series with successive ratios `err(h) / err(h/2)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub reports: Vec<RunReport>,
    pub ratio_e: Vec<f64>,
    pub ratio_b: Vec<f64>,
}

fn ratios(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[0] / w[1]).collect()
}

pub fn run_convergence(base: &RunConfig, refines: &[usize]) -> Result<ConvergenceTable> {
    let mut reports = Vec::new();
    for &r in refines {
        let cfg = RunConfig { refine: r, ..base.clone() };
        let disc = Discretization::new(cfg.mesh, r)?;
        reports.push(run_on(&disc, &cfg, &Scenario::Manufactured, &RunHooks::default())?.report);
    }
    let e: Vec<f64> = reports.iter().map(|r| r.err_e).collect();
    let b: Vec<f64> = reports.iter().map(|r| r.err_b).collect();
    Ok(ConvergenceTable { ratio_e: ratios(&e), ratio_b: ratios(&b), reports })
}

/// Time self-convergence at a fixed final time: differences between solutions
/// for successive halvings of `tau`, and their ratios.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelfConvergence {
    pub taus: Vec<f64>,
    pub differences: Vec<f64>,
    pub ratios: Vec<f64>,
}

pub fn run_self_convergence(base: &RunConfig, taus: &[f64], final_time: f64) -> Result<SelfConvergence> {
    let disc = Discretization::new(base.mesh, base.refine)?;
    let mut finals: Vec<StateVector> = Vec::new();
    for &tau in taus {
        let steps = (final_time / tau).round() as usize;
        let cfg = RunConfig { tau, steps, errors: false, track_divergence: false, ..base.clone() };
        finals.push(run_on(&disc, &cfg, &Scenario::Manufactured, &RunHooks::default())?.final_state);
    }
    let m = &disc.ops.masses;
    let diff = |a: &StateVector, b: &StateVector| {
        let d = |w: &[f64], x: &[f64], y: &[f64]| {
            w.iter().zip(x.iter().zip(y)).map(|(w, (p, q))| w * (p - q).powi(2)).sum::<f64>()
        };
        (d(&m.mt_b, &a.b, &b.b) + d(&m.mt_e, &a.e, &b.e) + d(&m.mt_p, &a.p, &b.p)).sqrt()
    };
    let differences: Vec<f64> = finals.windows(2).map(|w| diff(&w[0], &w[1])).collect();
    Ok(SelfConvergence { taus: taus.to_vec(), ratios: ratios(&differences), differences })
}

/// Iteration counts over a `(tau, h)` grid, each cell run to `final_time`.
pub fn run_sweep(base: &RunConfig, refines: &[usize], taus: &[f64], final_time: f64) -> Result<Vec<RunReport>> {
    let mut out = Vec::new();
    for &r in refines {
        let disc = Discretization::new(base.mesh, r)?;
        for &tau in taus {
            let steps = ((final_time / tau).round() as usize).max(1);
            let cfg = RunConfig { refine: r, tau, steps, ..base.clone() };
            out.push(run_on(&disc, &cfg, &Scenario::Manufactured, &RunHooks::default())?.report);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimingRow {
    pub refine: usize,
    pub dofs: usize,
    pub seconds_per_step: f64,
    pub iters_raw: f64,
}

/// Mean per-step solve times and the least-squares exponent `p` in `time ~ N^p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
    pub exponent: f64,
    /// Exponent of `N log N` fitted over the same sizes, for reference.
    pub nlogn_exponent: f64,
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn fit_exponent(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times each level `repeats` times and keeps the median per-step mean.
pub fn run_timing(base: &RunConfig, refines: &[usize], repeats: usize) -> Result<TimingTable> {
    let mut rows = Vec::new();
    for &r in refines {
        let cfg = RunConfig { refine: r, errors: false, track_divergence: false, deterministic: false, ..base.clone() };
        let disc = Discretization::new(cfg.mesh, r)?;
        let mut samples = Vec::new();
        let mut last = None;
        for _ in 0..repeats.max(1) {
            let rep = run_on(&disc, &cfg, &Scenario::Manufactured, &RunHooks::default())?.report;
            samples.push(rep.seconds_per_step);
            last = Some(rep);
        }
        let rep = last.expect("at least one repeat");
        rows.push(TimingRow { refine: r, dofs: rep.counts.dofs, seconds_per_step: median(samples), iters_raw: rep.iters_raw });
    }
    let n: Vec<f64> = rows.iter().map(|r| r.dofs as f64).collect();
    let t: Vec<f64> = rows.iter().map(|r| r.seconds_per_step).collect();
    let nlogn: Vec<f64> = n.iter().map(|v| v * v.ln()).collect();
    Ok(TimingTable { exponent: fit_exponent(&n, &t), nlogn_exponent: fit_exponent(&n, &nlogn), rows })
}
