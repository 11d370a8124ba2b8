//! C interface to the `wldos` library.
//!
//! Models are opaque handles created by the `wldos_model_*` constructors and
//! released with [`wldos_model_free`]. Every fallible function returns a
//! [`WldosStatus`]; on failure [`wldos_last_error_message`] describes the
//! error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wldos::model::{fibonacci_ssh, periodic_ssh, segment, BoundaryCondition, ModelSpec, Region, TightBindingModel};
use wldos::spectral::idos_curve;
use wldos::windows::{EnergyWindow, PositionWindow};
use wldos::wldos::{Method, Wldos};
use wldos::Error;

/// Opaque model handle.
pub struct WldosModel {
    inner: TightBindingModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WldosStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Problem size above a solver cap.
    CapExceeded = 3,
    /// Output buffer too small; the required length is reported.
    BufferTooSmall = 4,
    NoConvergence = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WldosMethod {
    Dense = 0,
    Kpm = 1,
    Truncated = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WldosRegion {
    Full = 0,
    Bulk = 1,
    Edge = 2,
}

/// Window and method parameters for wLDOS evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WldosParams {
    /// Energy window `exp(-(eta_inv xi)^2)`.
    pub eta_inv: f64,
    /// Position window scale; support `[-2/kappa, 2/kappa]`.
    pub kappa: f64,
    pub method: WldosMethod,
    /// Polynomial degree (KPM only).
    pub order: usize,
    /// Truncation parameter (truncated method only).
    pub alpha: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WldosValue {
    pub value: f64,
    pub budget_polynomial: f64,
    pub budget_truncation: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> WldosStatus {
    match err {
        Error::DenseCapExceeded { .. } => WldosStatus::CapExceeded,
        Error::NoConvergence => WldosStatus::NoConvergence,
        Error::Cell { source, .. } => status_of(source),
        Error::Io(_) | Error::Json(_) => WldosStatus::Internal,
        _ => WldosStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (WldosStatus, String)>) -> WldosStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WldosStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            WldosStatus::Panic
        }
    }
}

fn lib<T>(r: wldos::Result<T>) -> Result<T, (WldosStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (WldosStatus, String) {
    (WldosStatus::NullPointer, format!("{what} is null"))
}

fn bc(periodic: bool) -> BoundaryCondition {
    if periodic {
        BoundaryCondition::Periodic
    } else {
        BoundaryCondition::Dirichlet
    }
}

unsafe fn store(out: *mut *mut WldosModel, model: TightBindingModel) -> Result<(), (WldosStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(WldosModel { inner: model }));
    Ok(())
}

unsafe fn model_ref<'a>(model: *const WldosModel) -> Result<&'a TightBindingModel, (WldosStatus, String)> {
    model.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (WldosStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], (WldosStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wldos_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn wldos_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Fibonacci SSH chain at substitution `stage`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn wldos_model_fibonacci(
    stage: u32,
    t_o: f64,
    t_i_s: f64,
    t_i_l: f64,
    periodic: bool,
    out: *mut *mut WldosModel,
) -> WldosStatus {
    guard(|| store(out, lib(fibonacci_ssh(stage, t_o, t_i_s, t_i_l, bc(periodic)))?))
}

/// Uniform SSH chain with `n_cells` unit cells.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn wldos_model_periodic(
    n_cells: usize,
    t_o: f64,
    t_i: f64,
    periodic: bool,
    out: *mut *mut WldosModel,
) -> WldosStatus {
    guard(|| store(out, lib(periodic_ssh(n_cells, t_o, t_i, bc(periodic)))?))
}

/// Dirichlet segment of the Fibonacci SSH chain: `|x| <= rho` for the bulk,
/// `0 <= x <= rho` for the edge.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn wldos_model_segment(
    t_o: f64,
    t_i_s: f64,
    t_i_l: f64,
    region: WldosRegion,
    rho: f64,
    out: *mut *mut WldosModel,
) -> WldosStatus {
    guard(|| {
        let spec = ModelSpec::SshFibonacci {
            stage: 1,
            t_o,
            t_i_s,
            t_i_l,
            bc: BoundaryCondition::Dirichlet,
        };
        let region = match region {
            WldosRegion::Full => Region::Full,
            WldosRegion::Bulk => Region::Bulk,
            WldosRegion::Edge => Region::Edge,
        };
        store(out, lib(segment(&spec, region, rho))?)
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from a `wldos_model_*` constructor and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn wldos_model_free(model: *mut WldosModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of orbitals (the Hamiltonian dimension).
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn wldos_model_n_orbitals(model: *const WldosModel, out: *mut usize) -> WldosStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = m.n_orbitals();
        Ok(())
    })
}

/// Copies the per-orbital positions into `buf`. `written` receives the
/// number of orbitals, also when `len` is too small.
///
/// # Safety
/// `buf` must be valid for `len` writes; `written` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn wldos_model_positions(
    model: *const WldosModel,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> WldosStatus {
    guard(|| {
        let m = model_ref(model)?;
        copy_out(&m.position_diag(0), buf, len, written)
    })
}

unsafe fn copy_out(
    values: &[f64],
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> Result<(), (WldosStatus, String)> {
    if let Some(w) = written.as_mut() {
        *w = values.len();
    }
    if len < values.len() {
        return Err((
            WldosStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    slice_mut(buf, values.len(), "buf")?.copy_from_slice(values);
    Ok(())
}

/// Eigenvalues in ascending order; see [`wldos_model_positions`] for the
/// buffer protocol.
///
/// # Safety
/// `buf` must be valid for `len` writes; `written` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn wldos_spectrum(
    model: *const WldosModel,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> WldosStatus {
    guard(|| {
        let m = model_ref(model)?;
        let values = lib(wldos::linalg::eigenvalues(m.hamiltonian()))?;
        copy_out(&values, buf, len, written)
    })
}

/// Integrated density of states at `n` energies.
///
/// # Safety
/// `energies` and `out` must be valid for `n` elements.
#[no_mangle]
pub unsafe extern "C" fn wldos_idos(
    model: *const WldosModel,
    energies: *const f64,
    n: usize,
    out: *mut f64,
) -> WldosStatus {
    guard(|| {
        let m = model_ref(model)?;
        let es = slice(energies, n, "energies")?;
        let dst = slice_mut(out, n, "out")?;
        dst.copy_from_slice(&lib(idos_curve(m, es))?);
        Ok(())
    })
}

fn evaluator<'a>(m: &'a TightBindingModel, p: &WldosParams) -> Result<Wldos<'a>, (WldosStatus, String)> {
    let method = match p.method {
        WldosMethod::Dense => Method::Dense,
        WldosMethod::Kpm => Method::Kpm { order: p.order },
        WldosMethod::Truncated => Method::Truncated {
            alpha: p.alpha,
            order: None,
        },
    };
    let f = lib(EnergyWindow::from_eta_inv(p.eta_inv))?;
    let g = lib(PositionWindow::new(p.kappa))?;
    lib(Wldos::new(m, f, g, method))
}

/// wLDOS at one point `(x, energy)`.
///
/// # Safety
/// `params` must point to a valid struct and `out` be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn wldos_evaluate(
    model: *const WldosModel,
    params: *const WldosParams,
    x: f64,
    energy: f64,
    out: *mut WldosValue,
) -> WldosStatus {
    guard(|| {
        let m = model_ref(model)?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = lib(evaluator(m, p)?.evaluate(x, energy))?;
        *out = WldosValue {
            value: r.value,
            budget_polynomial: r.budget.polynomial,
            budget_truncation: r.budget.truncation,
        };
        Ok(())
    })
}

/// wLDOS on the grid `xs x energies`, row-major in `x` (`out[i * ne + k]`
/// belongs to `(xs[i], energies[k])`). `threads = 0` uses every core.
///
/// # Safety
/// `xs`, `energies` must hold `nx`, `ne` values and `out` `nx * ne`.
#[no_mangle]
pub unsafe extern "C" fn wldos_grid(
    model: *const WldosModel,
    params: *const WldosParams,
    xs: *const f64,
    nx: usize,
    energies: *const f64,
    ne: usize,
    threads: usize,
    out: *mut WldosValue,
) -> WldosStatus {
    guard(|| {
        let m = model_ref(model)?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let xs = slice(xs, nx, "xs")?;
        let es = slice(energies, ne, "energies")?;
        let total = nx
            .checked_mul(ne)
            .ok_or((WldosStatus::InvalidArgument, "grid too large".to_string()))?;
        let dst = slice_mut(out, total, "out")?;
        let results = lib(evaluator(m, p)?.grid(xs, es, threads))?;
        for (d, r) in dst.iter_mut().zip(&results) {
            *d = WldosValue {
                value: r.value,
                budget_polynomial: r.budget.polynomial,
                budget_truncation: r.budget.truncation,
            };
        }
        Ok(())
    })
}
