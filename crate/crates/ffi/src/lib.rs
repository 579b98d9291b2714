//! C ABI for robin-spectra.
//!
//! Every entry point returns an [`RsStatus`]. Results come back through out
//! pointers; on failure the out pointer is left untouched and
//! [`rs_last_error`] describes the problem. Handles ([`RsMesh`],
//! [`RsEstimate`]) are owned by the caller and released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use robin_spectra::discretize::fem::{principal_eigenvalue_fem, BoundaryField};
use robin_spectra::discretize::mesh::{mesh_annulus, mesh_disk, mesh_rectangle, Mesh2D};
use robin_spectra::discretize::meshio::parse_mesh;
use robin_spectra::error::SpectraError;
use robin_spectra::exact1d::principal_eigenvalue_1d;
use robin_spectra::harness::verify::{verify_all, VerifyOptions};
use robin_spectra::radial::{principal_eigenvalue_ball, BallProblem};
use robin_spectra::types::{BoundaryOperator, EigenEstimate, Problem1D, TolerancePolicy};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    SolverFailure = 4,
    /// The call completed but the answer is "no" (a failed verification).
    Failed = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsBoundaryKind {
    Dirichlet = 0,
    Neumann = 1,
    Robin = 2,
}

/// A boundary condition; `beta` is read only for `Robin`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsBoundary {
    pub kind: RsBoundaryKind,
    pub beta: f64,
}

impl From<RsBoundary> for BoundaryOperator {
    fn from(b: RsBoundary) -> Self {
        match b.kind {
            RsBoundaryKind::Dirichlet => BoundaryOperator::Dirichlet,
            RsBoundaryKind::Neumann => BoundaryOperator::Neumann,
            RsBoundaryKind::Robin => BoundaryOperator::Robin(b.beta),
        }
    }
}

/// Opaque triangulation.
pub struct RsMesh(Mesh2D);

/// Opaque eigenvalue estimate with its eigenfunction.
pub struct RsEstimate(EigenEstimate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Fail(RsStatus, String);

impl From<SpectraError> for Fail {
    fn from(e: SpectraError) -> Self {
        let status = match e {
            SpectraError::MeshParse { .. } | SpectraError::Config { .. } | SpectraError::InvalidBoundary(_) => RsStatus::ParseError,
            SpectraError::NonPositiveLength(_)
            | SpectraError::NonPositiveRadius(_)
            | SpectraError::ZeroDimension
            | SpectraError::RadialWithoutNeumannCore(_)
            | SpectraError::InvalidTolerance(_)
            | SpectraError::TooCoarse(..)
            | SpectraError::InvalidMesh(_)
            | SpectraError::DegenerateGeometry(_) => RsStatus::InvalidArgument,
            _ => RsStatus::SolverFailure,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            RsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RsStatus::Panic
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn estimate_out(out: *mut *mut RsEstimate, est: EigenEstimate) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(Box::into_raw(Box::new(RsEstimate(est))));
    Ok(())
}

/// Message for the most recent failure on this thread (empty after a
/// success). Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn rs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Principal eigenvalue of `(0, length)`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_exact1d(length: f64, left: RsBoundary, right: RsBoundary, out: *mut *mut RsEstimate) -> RsStatus {
    guard(|| {
        let p = Problem1D::interval(length, left.into(), right.into());
        estimate_out(out, principal_eigenvalue_1d(&p, &TolerancePolicy::default())?)
    })
}

/// Principal eigenvalue of the ball of `radius` in dimension `dim`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_ball(dim: u32, radius: f64, boundary: RsBoundary, out: *mut *mut RsEstimate) -> RsStatus {
    guard(|| {
        let p = BallProblem::new(dim, radius, boundary.into());
        estimate_out(out, principal_eigenvalue_ball(&p, &TolerancePolicy::default())?)
    })
}

/// Parse a mesh in the text format read by the CLI.
///
/// # Safety
/// `text` must be null or a NUL-terminated string; `out` must be null or
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_mesh_parse(text: *const c_char, out: *mut *mut RsMesh) -> RsStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("mesh text"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|e| Fail(RsStatus::ParseError, e.to_string()))?;
        mesh_out(out, parse_mesh(text)?)
    })
}

unsafe fn mesh_out(out: *mut *mut RsMesh, mesh: Mesh2D) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(Box::into_raw(Box::new(RsMesh(mesh))));
    Ok(())
}

/// Structured `a × b` rectangle with `res` cells per side, Neumann-tagged.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_mesh_rectangle(a: f64, b: f64, res: usize, out: *mut *mut RsMesh) -> RsStatus {
    guard(|| mesh_out(out, mesh_rectangle(a, b, res)?))
}

/// Disk of `radius` with `res` rings, Neumann-tagged.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_mesh_disk(radius: f64, res: usize, out: *mut *mut RsMesh) -> RsStatus {
    guard(|| mesh_out(out, mesh_disk(radius, res)?))
}

/// Annulus `inner < r < outer`, Neumann-tagged.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_mesh_annulus(inner: f64, outer: f64, res: usize, out: *mut *mut RsMesh) -> RsStatus {
    guard(|| mesh_out(out, mesh_annulus(inner, outer, res)?))
}

/// Vertex and triangle counts.
///
/// # Safety
/// `mesh` must be null or a live handle; the out pointers null or writable.
#[no_mangle]
pub unsafe extern "C" fn rs_mesh_size(mesh: *const RsMesh, vertices: *mut usize, triangles: *mut usize) -> RsStatus {
    guard(|| {
        let mesh = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        write_out(vertices, mesh.0.vertices.len())?;
        write_out(triangles, mesh.0.triangles.len())
    })
}

/// # Safety
/// `mesh` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_mesh_free(mesh: *mut RsMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// P1 finite-element eigenvalue. With `boundary` null the mesh's own edge
/// tags are used; otherwise the condition applies on the whole boundary.
///
/// # Safety
/// `mesh` must be a live handle, `boundary` null or readable, `out` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rs_fem(mesh: *const RsMesh, boundary: *const RsBoundary, out: *mut *mut RsEstimate) -> RsStatus {
    guard(|| {
        let mesh = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        let field = match boundary.as_ref() {
            Some(b) => BoundaryField::Uniform((*b).into()),
            None => BoundaryField::FromMesh,
        };
        let tol = TolerancePolicy { eig_rel_tol: 1e-9, ..TolerancePolicy::discretization() };
        let (est, _) = principal_eigenvalue_fem(&mesh.0, &field, None, &tol)?;
        estimate_out(out, est)
    })
}

/// # Safety
/// `est` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate_sigma(est: *const RsEstimate, out: *mut f64) -> RsStatus {
    guard(|| write_out(out, est.as_ref().ok_or_else(|| null("estimate"))?.0.value))
}

/// # Safety
/// `est` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate_residual(est: *const RsEstimate, out: *mut f64) -> RsStatus {
    guard(|| write_out(out, est.as_ref().ok_or_else(|| null("estimate"))?.0.residual))
}

/// Max-normalized eigenfunction of a one-dimensional estimate at `x`.
///
/// # Safety
/// `est` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate_eval(est: *const RsEstimate, x: f64, out: *mut f64) -> RsStatus {
    guard(|| {
        let est = est.as_ref().ok_or_else(|| null("estimate"))?;
        write_out(out, est.0.eigenfunction.eval(x)?)
    })
}

/// Eigenfunction of a mesh estimate at the planar point `(x, y)`.
///
/// # Safety
/// `est` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate_eval_xy(est: *const RsEstimate, x: f64, y: f64, out: *mut f64) -> RsStatus {
    guard(|| {
        let est = est.as_ref().ok_or_else(|| null("estimate"))?;
        write_out(out, est.0.eigenfunction.eval_xy(x, y)?)
    })
}

/// # Safety
/// `est` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate_free(est: *mut RsEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

/// Run the verification suite. Returns `Ok` when every check passes and
/// `Failed` otherwise; the rendered table is available from
/// [`rs_last_error`] in the failing case.
#[no_mangle]
pub extern "C" fn rs_verify(fast: bool) -> RsStatus {
    guard(|| {
        let report = verify_all(&VerifyOptions { fast, ..Default::default() });
        if report.all_passed() {
            Ok(())
        } else {
            Err(Fail(RsStatus::Failed, report.render()))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_outputs_are_rejected() {
        let d = RsBoundary { kind: RsBoundaryKind::Dirichlet, beta: 0.0 };
        assert_eq!(unsafe { rs_exact1d(1.0, d, d, ptr::null_mut()) }, RsStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(rs_last_error()) };
        assert!(msg.to_str().unwrap().contains("null"));
    }

    #[test]
    fn errors_map_to_status_codes() {
        let mut est = ptr::null_mut();
        let d = RsBoundary { kind: RsBoundaryKind::Dirichlet, beta: 0.0 };
        assert_eq!(unsafe { rs_exact1d(-1.0, d, d, &mut est) }, RsStatus::InvalidArgument);
        assert!(est.is_null());
        let mut mesh = ptr::null_mut();
        assert_eq!(unsafe { rs_mesh_parse(c"VERTICES\n0 x\n".as_ptr(), &mut mesh) }, RsStatus::ParseError);
        assert_eq!(unsafe { rs_mesh_disk(1.0, 2, &mut mesh) }, RsStatus::InvalidArgument);
        assert!(mesh.is_null());
    }
}
