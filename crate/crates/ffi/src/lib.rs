//! C interface to `wvtorus`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` functions
//! and released by the matching `*_free`. Every fallible call returns a
//! [`WvStatus`]; on failure [`wv_last_error`] copies a description of the
//! most recent error on the calling thread. Results are written through out
//! pointers, arrays into caller-owned buffers whose capacity is passed
//! alongside.

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use wvtorus::galerkin::GalerkinSystem;
use wvtorus::measure::{Atom, Continuity, MeasureFunction, Mesh, Segment, Side};
use wvtorus::spde::SpdeProblem;
use wvtorus::spectral::{eig, expand, shooting_spectrum, uniform_grid, Operator};
use wvtorus::stochastic::{cov_bm, cov_bridge, SamplePath};
use wvtorus::Error;

/// Result codes. `WV_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WvStatus {
    WvOk = 0,
    WvNullPointer = 1,
    WvInvalidMeasure = 2,
    WvInvalidMesh = 3,
    WvMeshMismatch = 4,
    WvConstraintViolation = 5,
    WvDirichletViolation = 6,
    WvCoefficientBounds = 7,
    WvNotCoercive = 8,
    WvSingularSystem = 9,
    WvIncompatibleData = 10,
    WvFactorizationFailure = 11,
    WvGridTooCoarse = 12,
    WvDegenerateKernel = 13,
    WvInvalidArgument = 14,
    WvBufferTooSmall = 15,
    WvInternal = 16,
}

/// Which one-sided value to read.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WvSide {
    WvRight = 0,
    WvLeft = 1,
}

/// Continuity class of a measure function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WvContinuity {
    WvCadlag = 0,
    WvCaglad = 1,
}

/// Opaque measure function.
pub struct WvMeasure {
    inner: Arc<MeasureFunction>,
}

/// Opaque mesh (owns references to its two measures).
pub struct WvMesh {
    inner: Arc<Mesh>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> WvStatus {
    match e {
        Error::InvalidMeasure(_) => WvStatus::WvInvalidMeasure,
        Error::InvalidMesh(_) => WvStatus::WvInvalidMesh,
        Error::MeshMismatch(_) => WvStatus::WvMeshMismatch,
        Error::ConstraintViolation(_) => WvStatus::WvConstraintViolation,
        Error::DirichletViolation(_) => WvStatus::WvDirichletViolation,
        Error::CoefficientBounds(_) => WvStatus::WvCoefficientBounds,
        Error::NotCoercive(_) => WvStatus::WvNotCoercive,
        Error::SingularSystem(_) => WvStatus::WvSingularSystem,
        Error::IncompatibleData { .. } => WvStatus::WvIncompatibleData,
        Error::FactorizationFailure(_) => WvStatus::WvFactorizationFailure,
        Error::GridTooCoarse(_) => WvStatus::WvGridTooCoarse,
        Error::DegenerateKernel(_) => WvStatus::WvDegenerateKernel,
        Error::InvalidArgument(_) | Error::Config(_) | Error::Io(_) => WvStatus::WvInvalidArgument,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Buffer { need: usize, have: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WvStatus::WvOk,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for `{what}`"));
            WvStatus::WvNullPointer
        }
        Ok(Err(Failure::Buffer { need, have })) => {
            set_error(format!("output buffer holds {have} values, {need} needed"));
            WvStatus::WvBufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".into());
            WvStatus::WvInternal
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: caller guarantees `ptr` points to `len` initialised values.
    Ok(unsafe { std::slice::from_raw_parts(ptr, len) })
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: caller guarantees `ptr` points to `len` writable values.
    Ok(unsafe { std::slice::from_raw_parts_mut(ptr, len) })
}

unsafe fn out<'a, T>(ptr: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: non-null pointers are required to be valid for writes.
    unsafe { ptr.as_mut() }.ok_or(Failure::Null(what))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: non-null handles come from the matching constructor.
    unsafe { ptr.as_ref() }.ok_or(Failure::Null(what))
}

fn copy_into(dst: &mut [f64], src: &[f64]) -> Result<(), Failure> {
    if dst.len() < src.len() {
        return Err(Failure::Buffer { need: src.len(), have: dst.len() });
    }
    dst[..src.len()].copy_from_slice(src);
    Ok(())
}

fn side(s: WvSide) -> Side {
    match s {
        WvSide::WvRight => Side::Right,
        WvSide::WvLeft => Side::Left,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated when `cap > 0`). Returns the full message length.
///
/// # Safety
/// `buf` must be valid for `cap` bytes or null with `cap == 0`.
#[no_mangle]
pub unsafe extern "C" fn wv_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            // SAFETY: `buf` holds `cap > n` bytes.
            unsafe {
                std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Builds a measure function from `n_segments` breakpoints/slopes and
/// `n_atoms` atom locations/masses.
///
/// # Safety
/// Array arguments must hold the stated number of values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn wv_measure_new(
    continuity: WvContinuity,
    breakpoints: *const f64,
    slopes: *const f64,
    n_segments: usize,
    atom_x: *const f64,
    atom_mass: *const f64,
    n_atoms: usize,
    out_measure: *mut *mut WvMeasure,
) -> WvStatus {
    guard(|| {
        let out_measure = unsafe { out(out_measure, "out_measure")? };
        let xs = unsafe { slice(breakpoints, n_segments, "breakpoints")? };
        let ss = unsafe { slice(slopes, n_segments, "slopes")? };
        let ax = unsafe { slice(atom_x, n_atoms, "atom_x")? };
        let am = unsafe { slice(atom_mass, n_atoms, "atom_mass")? };
        let segments = xs.iter().zip(ss).map(|(&x, &slope)| Segment { x, slope }).collect();
        let atoms = ax.iter().zip(am).map(|(&x, &mass)| Atom { x, mass }).collect();
        let c = match continuity {
            WvContinuity::WvCadlag => Continuity::Cadlag,
            WvContinuity::WvCaglad => Continuity::Caglad,
        };
        let m = MeasureFunction::new(c, segments, atoms)?;
        *out_measure = Box::into_raw(Box::new(WvMeasure { inner: Arc::new(m) }));
        Ok(())
    })
}

/// # Safety
/// `measure` must come from [`wv_measure_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wv_measure_free(measure: *mut WvMeasure) {
    if !measure.is_null() {
        // SAFETY: produced by Box::into_raw in wv_measure_new.
        drop(unsafe { Box::from_raw(measure) });
    }
}

/// `F(x)` or `F(x−)`.
///
/// # Safety
/// `measure` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_measure_eval(measure: *const WvMeasure, x: f64, which: WvSide, value: *mut f64) -> WvStatus {
    guard(|| {
        let m = unsafe { handle(measure, "measure")? };
        *unsafe { out(value, "value")? } = m.inner.eval(x, side(which));
        Ok(())
    })
}

/// `F(1) − F(0)`.
///
/// # Safety
/// `measure` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_measure_total(measure: *const WvMeasure, value: *mut f64) -> WvStatus {
    guard(|| {
        let m = unsafe { handle(measure, "measure")? };
        *unsafe { out(value, "value")? } = m.inner.total();
        Ok(())
    })
}

/// `W(t∧s)` for the motion, `W(t∧s) − W(t)W(s)/W(1)` for the bridge.
///
/// # Safety
/// `w` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_covariance(w: *const WvMeasure, t: f64, s: f64, bridge: bool, value: *mut f64) -> WvStatus {
    guard(|| {
        let w = unsafe { handle(w, "w")? };
        let v = if bridge { cov_bridge(&w.inner, t, s) } else { cov_bm(&w.inner, t, s) };
        *unsafe { out(value, "value")? } = v;
        Ok(())
    })
}

/// Uniform mesh with `n` cells refined by all atoms of `w` and `v`.
///
/// # Safety
/// `w`, `v` must be live handles and `out_mesh` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_mesh_new(
    w: *const WvMeasure,
    v: *const WvMeasure,
    n: usize,
    out_mesh: *mut *mut WvMesh,
) -> WvStatus {
    guard(|| {
        let w = unsafe { handle(w, "w")? };
        let v = unsafe { handle(v, "v")? };
        let out_mesh = unsafe { out(out_mesh, "out_mesh")? };
        let mesh = Mesh::build(w.inner.clone(), v.inner.clone(), n)?;
        *out_mesh = Box::into_raw(Box::new(WvMesh { inner: mesh }));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from [`wv_mesh_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wv_mesh_free(mesh: *mut WvMesh) {
    if !mesh.is_null() {
        // SAFETY: produced by Box::into_raw in wv_mesh_new.
        drop(unsafe { Box::from_raw(mesh) });
    }
}

/// Number of cells `N`; node arrays have `N + 1` entries (closing point 1
/// included).
///
/// # Safety
/// `mesh` must be a live handle and `n_cells` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_mesh_cells(mesh: *const WvMesh, n_cells: *mut usize) -> WvStatus {
    guard(|| {
        let mesh = unsafe { handle(mesh, "mesh")? };
        *unsafe { out(n_cells, "n_cells")? } = mesh.inner.n_cells();
        Ok(())
    })
}

/// Node coordinates `x_0 … x_N` into `points` (capacity `cap ≥ N + 1`).
///
/// # Safety
/// `mesh` must be a live handle; `points` valid for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn wv_mesh_points(mesh: *const WvMesh, points: *mut f64, cap: usize) -> WvStatus {
    guard(|| {
        let mesh = unsafe { handle(mesh, "mesh")? };
        copy_into(unsafe { slice_mut(points, cap, "points")? }, mesh.inner.points())
    })
}

/// The `k` smallest eigenvalues of `−D⁺_V(a·D⁻_W ·)` (`full == false`) or of
/// `κ² − D⁺_V(a·D⁻_W ·)` with constant coefficients, periodic or Dirichlet.
/// Writes `min(k, basis size)` values and their count.
///
/// # Safety
/// `mesh` must be a live handle; `values` valid for `cap` values; `count`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn wv_eigenvalues(
    mesh: *const WvMesh,
    a: f64,
    kappa2: f64,
    full: bool,
    dirichlet: bool,
    k: usize,
    values: *mut f64,
    cap: usize,
    count: *mut usize,
) -> WvStatus {
    guard(|| {
        let mesh = unsafe { handle(mesh, "mesh")? };
        let count = unsafe { out(count, "count")? };
        let sys = GalerkinSystem::assemble_constant(mesh.inner.clone(), a, kappa2, 0.0, dirichlet)?;
        let op = if full { Operator::Full } else { Operator::Laplacian };
        let e = eig(&sys, k, op)?;
        copy_into(unsafe { slice_mut(values, cap, "values")? }, &e.eigenvalues)?;
        *count = e.eigenvalues.len();
        Ok(())
    })
}

/// Periodic eigenvalues in `(0, lambda_max]` from the monodromy matrix,
/// listed with multiplicity.
///
/// # Safety
/// `w`, `v` must be live handles; `values` valid for `cap` values; `count`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn wv_shooting_eigenvalues(
    w: *const WvMeasure,
    v: *const WvMeasure,
    lambda_max: f64,
    grid_points: usize,
    values: *mut f64,
    cap: usize,
    count: *mut usize,
) -> WvStatus {
    guard(|| {
        let w = unsafe { handle(w, "w")? };
        let v = unsafe { handle(v, "v")? };
        let count = unsafe { out(count, "count")? };
        let roots = shooting_spectrum(&w.inner, &v.inner, lambda_max, &uniform_grid(lambda_max, grid_points))?;
        let all = expand(&roots);
        copy_into(unsafe { slice_mut(values, cap, "values")? }, &all)?;
        *count = all.len();
        Ok(())
    })
}

/// One seeded W-Brownian motion (or bridge) on the mesh nodes:
/// `right[i] = B(x_i)`, `left[i] = B(x_i−)`, `i = 0..=N`.
///
/// # Safety
/// `mesh` must be a live handle; `right` and `left` valid for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn wv_sample_path(
    mesh: *const WvMesh,
    seed: u64,
    path_id: u64,
    bridge: bool,
    right: *mut f64,
    left: *mut f64,
    cap: usize,
) -> WvStatus {
    guard(|| {
        let mesh = unsafe { handle(mesh, "mesh")? };
        let p = if bridge {
            SamplePath::bridge(mesh.inner.clone(), seed, path_id)
        } else {
            SamplePath::motion(mesh.inner.clone(), seed, path_id)
        };
        copy_into(unsafe { slice_mut(right, cap, "right")? }, p.values())?;
        copy_into(unsafe { slice_mut(left, cap, "left")? }, p.left_values())
    })
}

/// Nodal values `u(x_0) … u(x_{N−1})` of the solution of
/// `κ²u − D⁺_V(h·D⁻_W u) = Ḃ_W`, `u(0) = 0`, for one noise path.
///
/// # Safety
/// `mesh` must be a live handle; `u` valid for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn wv_spde_solve(
    mesh: *const WvMesh,
    kappa2: f64,
    h: f64,
    seed: u64,
    path_id: u64,
    u: *mut f64,
    cap: usize,
) -> WvStatus {
    guard(|| {
        let mesh = unsafe { handle(mesh, "mesh")? };
        let problem = SpdeProblem::constant(mesh.inner.clone(), kappa2, h)?;
        let sol = problem.solve_path(&SamplePath::motion(mesh.inner.clone(), seed, path_id))?;
        copy_into(unsafe { slice_mut(u, cap, "u")? }, &sol.u.node_values())
    })
}

/// Numeric value of a status code, for bindings without enum support.
#[no_mangle]
pub extern "C" fn wv_status_code(status: WvStatus) -> c_int {
    status as c_int
}
