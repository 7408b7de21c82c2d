//! C interface to the mimetic Maxwell solver.
//!
//! Discretizations and run reports are opaque handles created and released
//! through this interface. Every fallible function returns an [`MmStatus`];
//! on failure a message is available from [`mm_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mimetic_maxwell::harness::{run_on, Discretization, RunConfig, RunHooks, RunReport, Scenario};
use mimetic_maxwell::mesh::MeshKind;
use mimetic_maxwell::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidMesh = 3,
    DegenerateGeometry = 4,
    NumericalBreakdown = 5,
    /// The run finished but at least one step did not reach the outer tolerance.
    NotConverged = 6,
    BufferTooSmall = 7,
    Internal = 8,
    Panic = 9,
}

/// Mesh families accepted by [`mm_discretization_new`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmMeshKind {
    CubePyramids = 0,
    Bcc = 1,
}

/// Mesh, dual geometry and operators for one refinement level.
pub struct MmDiscretization {
    inner: Discretization,
}

/// Result of a time-stepping run.
pub struct MmReport {
    inner: RunReport,
    json: String,
}

/// Entity and unknown counts of a discretization.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct MmCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub tets: usize,
    pub interior_vertices: usize,
    pub interior_edges: usize,
    pub interior_faces: usize,
    /// Interior unknowns of the time-stepping system.
    pub dofs: usize,
    pub h: f64,
    /// Largest relative deviation of the four measure identities.
    pub identity_residual: f64,
    /// Nonzero when the requested mesh was replaced by the BCC mesh.
    pub substituted: i32,
}

/// Headline numbers of a run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct MmSummary {
    pub steps: usize,
    pub err_e: f64,
    pub err_b: f64,
    pub iters_mean: f64,
    pub div_b_max: f64,
    pub energy_drift: f64,
    pub nonconverged_steps: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> MmStatus {
    match e {
        Error::InvalidMesh(_) | Error::Parse { .. } => MmStatus::InvalidMesh,
        Error::DegenerateTet { .. } | Error::NegativeMeasure { .. } => MmStatus::DegenerateGeometry,
        Error::NumericalBreakdown(_) | Error::SingularMatrix { .. } | Error::Factorization(_) => {
            MmStatus::NumericalBreakdown
        }
        Error::InvalidArgument(_) | Error::DimensionMismatch(_) | Error::SizeCap { .. } => MmStatus::InvalidArgument,
        Error::Io(_) => MmStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<MmStatus, (MmStatus, String)>) -> MmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside the solver");
            MmStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (MmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (MmStatus, String) {
    (MmStatus::NullPointer, format!("{what} is null"))
}

/// Copies `s` with a terminating NUL into `buf` of capacity `len`, storing the
/// required capacity in `needed` when it is non-null.
unsafe fn write_str(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> MmStatus {
    let need = s.len() + 1;
    if !needed.is_null() {
        *needed = need;
    }
    if buf.is_null() || len < need {
        return MmStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    MmStatus::Ok
}

/// Version string of the library, statically allocated.
#[no_mangle]
pub extern "C" fn mm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message of the calling thread into `buf`.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes; `needed` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mm_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> MmStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    write_str(&msg, buf, len, needed)
}

/// Builds the mesh of family `kind` at refinement level `refine`, its dual
/// geometry and operators. For BCC the lattice has `2^refine` cells per side.
///
/// # Safety
/// `out` must be valid for one write. On success `*out` owns a handle that must
/// be released with [`mm_discretization_free`].
#[no_mangle]
pub unsafe extern "C" fn mm_discretization_new(
    kind: MmMeshKind,
    refine: u32,
    out: *mut *mut MmDiscretization,
) -> MmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if refine as usize > mimetic_maxwell::harness::MAX_REFINE {
            return Err((MmStatus::InvalidArgument, format!("refine {refine} above the supported maximum")));
        }
        let kind = match kind {
            MmMeshKind::CubePyramids => MeshKind::CubePyramids,
            MmMeshKind::Bcc => MeshKind::Bcc,
        };
        let inner = Discretization::new(kind, refine as usize).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MmDiscretization { inner }));
        Ok(MmStatus::Ok)
    })
}

/// Releases a discretization. Null is ignored.
///
/// # Safety
/// `d` must be null or a handle from [`mm_discretization_new`] not yet released.
#[no_mangle]
pub unsafe extern "C" fn mm_discretization_free(d: *mut MmDiscretization) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Fills `out` with entity counts and the measure-identity residual.
///
/// # Safety
/// `d` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mm_discretization_counts(d: *const MmDiscretization, out: *mut MmCounts) -> MmStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("discretization"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let disc = &d.inner;
        let c = disc.counts();
        let kind = if disc.substitution.is_some() { MeshKind::Bcc } else { disc.kind };
        let volume = kind.domain_volume(1 << disc.refine);
        let identity_residual = disc.dual.identities().residuals(volume).into_iter().fold(0.0, f64::max);
        *out = MmCounts {
            vertices: c.vertices,
            edges: c.edges,
            faces: c.faces,
            tets: c.tets,
            interior_vertices: c.interior_vertices,
            interior_edges: c.interior_edges,
            interior_faces: c.interior_faces,
            dofs: c.dofs,
            h: c.h,
            identity_residual,
            substituted: i32::from(disc.substitution.is_some()),
        };
        Ok(MmStatus::Ok)
    })
}

/// Runs the manufactured-solution problem on `d`.
///
/// `config_json` is a run configuration in the JSON form written by the CLI,
/// or null for the defaults; missing fields take their defaults and the mesh fields are replaced by those of `d`.
/// Returns [`MmStatus::NotConverged`] (with a valid report) when some step
/// missed the outer tolerance.
///
/// # Safety
/// `d` must be a live handle, `config_json` null or a NUL-terminated UTF-8
/// string, and `out` valid for one write. On success `*out` must be released
/// with [`mm_report_free`].
#[no_mangle]
pub unsafe extern "C" fn mm_run(
    d: *const MmDiscretization,
    config_json: *const c_char,
    out: *mut *mut MmReport,
) -> MmStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("discretization"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let mut cfg = if config_json.is_null() {
            RunConfig::default()
        } else {
            let s = CStr::from_ptr(config_json)
                .to_str()
                .map_err(|_| (MmStatus::InvalidArgument, "configuration is not UTF-8".to_string()))?;
            RunConfig::from_json(s).map_err(lib_err)?
        };
        cfg.mesh = d.inner.kind;
        cfg.refine = d.inner.refine;
        let report = run_on(&d.inner, &cfg, &Scenario::Manufactured, &RunHooks::default()).map_err(lib_err)?.report;
        let json = serde_json::to_string(&report).map_err(|e| (MmStatus::Internal, e.to_string()))?;
        let status = if report.nonconverged_steps > 0 {
            set_error(format!("{} steps did not converge", report.nonconverged_steps));
            MmStatus::NotConverged
        } else {
            MmStatus::Ok
        };
        *out = Box::into_raw(Box::new(MmReport { inner: report, json }));
        Ok(status)
    })
}

/// Fills `out` with the headline numbers of a report.
///
/// # Safety
/// `r` must be a live report handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mm_report_summary(r: *const MmReport, out: *mut MmSummary) -> MmStatus {
    guard(|| {
        let r = &r.as_ref().ok_or_else(|| null("report"))?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = MmSummary {
            steps: r.steps.len(),
            err_e: r.err_e,
            err_b: r.err_b,
            iters_mean: r.iters_raw,
            div_b_max: r.div_b_max,
            energy_drift: r.energy_drift,
            nonconverged_steps: r.nonconverged_steps,
        };
        Ok(MmStatus::Ok)
    })
}

/// Copies the full JSON report into `buf`. With a null or short buffer
/// the required capacity is still stored in `needed`.
///
/// # Safety
/// `r` must be a live report handle, `buf` null or valid for `len` bytes,
/// and `needed` null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mm_report_json(
    r: *const MmReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> MmStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("report"))?;
        Ok(write_str(&r.json, buf, len, needed))
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `r` must be null or a handle from [`mm_run`] not yet released.
#[no_mangle]
pub unsafe extern "C" fn mm_report_free(r: *mut MmReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
