use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::MeshKind;
use crate::precond::{InnerSolverConfig, PrecondKind};

/// Discretization path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mfd,
    Fem,
}

/// Spatial norm reported as `errE` / `errB`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorNorm {
    /// L2 norm of the field reconstructed from its degrees of freedom.
    L2,
    /// Lumped (diagonal-mass) norm of the degree-of-freedom error.
    Lumped,
}

/// One time-stepping run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshKind,
    /// Uniform refinements of the base mesh; for BCC meshes the lattice has `2^refine` cells per side.
    pub refine: usize,
    pub tau: f64,
    pub steps: usize,
    pub method: Method,
    pub precond: PrecondKind,
    pub inner: InnerSolverConfig,
    pub outer_tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    pub error_norm: ErrorNorm,
    /// Compute errors against the exact solution at every step.
    pub errors: bool,
    /// Record the flux divergence at every outer iterate (MFD only).
    pub track_divergence: bool,
    /// Zero all wall-clock fields in emitted reports.
    pub deterministic: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mesh: MeshKind::CubePyramids,
            refine: 2,
            tau: 0.0125,
            steps: 8,
            method: Method::Mfd,
            precond: PrecondKind::Lsu,
            inner: InnerSolverConfig::default(),
            outer_tol: 1e-8,
            restart: 100,
            max_iter: 1000,
            error_norm: ErrorNorm::Lumped,
            errors: true,
            track_divergence: true,
            deterministic: true,
            seed: 0,
        }
    }
}

/// Largest refinement level accepted.
pub const MAX_REFINE: usize = 6;

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {}", self.tau)));
        }
        if self.refine > MAX_REFINE {
            return Err(Error::InvalidArgument(format!("refine {} exceeds {MAX_REFINE}", self.refine)));
        }
        if !(self.outer_tol > 0.0 && self.outer_tol < 1.0) {
            return Err(Error::InvalidArgument(format!("outer tolerance {} outside (0, 1)", self.outer_tol)));
        }
        if self.restart == 0 || self.max_iter == 0 {
            return Err(Error::InvalidArgument("restart and max_iter must be positive".into()));
        }
        self.inner.validate()
    }

    pub fn krylov(&self) -> crate::sparse::KrylovConfig {
        crate::sparse::KrylovConfig {
            method: crate::sparse::KrylovMethod::Fgmres,
            tol: self.outer_tol,
            restart: self.restart,
            max_iter: self.max_iter,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
