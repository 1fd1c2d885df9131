//! C ABI over `fermat_lattice`.
//!
//! Every fallible call returns an [`FlStatus`] and writes its result through
//! an out-pointer. Objects are opaque handles released with the matching
//! `*_free` function; strings handed out by the library are released with
//! [`fl_string_free`]. On failure, [`fl_last_error_message`] describes the
//! most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use fermat_lattice::cycles::FermatParams;
use fermat_lattice::lattice::{self, LatticeMeta, LatticeReport, LatticeSource};
use fermat_lattice::pipeline::{Pipeline, RunConfig, Target, VerificationResult};
use fermat_lattice::{snf, Error, IntMatrix};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotSymmetric = 4,
    NotUnimodular = 5,
    Structural = 6,
    Refused = 7,
    Format = 8,
    Io = 9,
    Panic = 10,
    Internal = 11,
}

/// Which lattice `fl_compute` builds.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlTarget {
    FullLinear = 0,
    PrimitiveLinear = 1,
    PrimitiveHodge = 2,
}

/// Dense matrix of arbitrary-precision integers.
pub struct FlMatrix {
    inner: IntMatrix,
}

/// Rank, elementary divisors and discriminant sign of one lattice.
pub struct FlReport {
    inner: LatticeReport,
}

/// Outcome of comparing the linear-cycle and Hodge-cycle lattices.
pub struct FlVerification {
    inner: VerificationResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FlStatus {
    match e {
        Error::DimensionMismatch(_) => FlStatus::DimensionMismatch,
        Error::Asymmetric => FlStatus::NotSymmetric,
        Error::NotUnimodular { .. } => FlStatus::NotUnimodular,
        Error::InvalidParams(_) | Error::NotPrime(_) | Error::ModulusMismatch(..) => FlStatus::InvalidArgument,
        Error::Structural(_) => FlStatus::Structural,
        Error::ResourceCap(_) => FlStatus::Refused,
        Error::Format(_) | Error::Json(_) => FlStatus::Format,
        Error::Io(_) => FlStatus::Io,
        Error::CoefficientGrowth { .. } => FlStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (FlStatus, String)>) -> FlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {msg}"));
            FlStatus::Panic
        }
    }
}

fn lift(e: Error) -> (FlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FlStatus, String) {
    (FlStatus::NullArgument, format!("{what} is NULL"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (FlStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (FlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (FlStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| (FlStatus::Internal, "string contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn write_box<T>(out: *mut *mut T, value: T) -> Result<(), (FlStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FlStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a matrix from `rows * cols` row-major 64-bit entries.
///
/// # Safety
/// `entries` must point to `rows * cols` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_matrix_new(rows: usize, cols: usize, entries: *const i64, out: *mut *mut FlMatrix) -> FlStatus {
    guard(|| {
        let len = rows.checked_mul(cols).ok_or((FlStatus::InvalidArgument, "rows * cols overflows".to_string()))?;
        if entries.is_null() && len > 0 {
            return Err(null("entries"));
        }
        let values = if len == 0 { &[][..] } else { std::slice::from_raw_parts(entries, len) };
        let m = IntMatrix::from_entries(rows, cols, values.iter().map(|&x| x.into()).collect()).map_err(lift)?;
        write_box(out, FlMatrix { inner: m })
    })
}

/// Parses `{"rows":r,"cols":c,"entries":["decimal",...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_matrix_from_json(json: *const c_char, out: *mut *mut FlMatrix) -> FlStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let m = IntMatrix::from_json(text).map_err(lift)?;
        write_box(out, FlMatrix { inner: m })
    })
}

/// # Safety
/// `m` must be NULL or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn fl_matrix_free(m: *mut FlMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of rows, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn fl_matrix_rows(m: *const FlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.rows())
}

/// Number of columns, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn fl_matrix_cols(m: *const FlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.cols())
}

/// # Safety
/// `m` must be a live matrix handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_matrix_to_json(m: *const FlMatrix, out: *mut *mut c_char) -> FlStatus {
    guard(|| {
        let m = borrow(m, "matrix")?;
        write_string(out, m.inner.to_json())
    })
}

/// Elementary divisors as a JSON array of decimal strings.
///
/// # Safety
/// `m` must be a live matrix handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_elementary_divisors(m: *const FlMatrix, out: *mut *mut c_char) -> FlStatus {
    guard(|| {
        let m = borrow(m, "matrix")?;
        let divisors: Vec<String> = snf::elementary_divisors(&m.inner).iter().map(|x| x.to_string()).collect();
        write_string(out, serde_json::to_string(&divisors).map_err(|e| lift(e.into()))?)
    })
}

/// Invariants of `V / V^perp` for a symmetric Gram matrix. `n` and `d`
/// are recorded in the report; pass 0 when they do not apply.
///
/// # Safety
/// `gram` must be a live matrix handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_lattice_invariants(gram: *const FlMatrix, n: u32, d: u32, out: *mut *mut FlReport) -> FlStatus {
    guard(|| {
        let m = borrow(gram, "gram")?;
        let meta = LatticeMeta { n, d, source: LatticeSource::FullLinear };
        let report = lattice::nondegenerate_quotient(&m.inner, meta).map_err(lift)?;
        write_box(out, FlReport { inner: report })
    })
}

unsafe fn config(n: u32, d: u32, target: Target, cache_dir: *const c_char) -> Result<RunConfig, (FlStatus, String)> {
    let mut cfg = RunConfig::new(n, d, target).map_err(lift)?;
    if !cache_dir.is_null() {
        cfg.cache_dir = Some(PathBuf::from(read_str(cache_dir, "cache_dir")?));
    }
    Ok(cfg)
}

/// Runs one branch of the pipeline under default resource caps.
/// `cache_dir` may be NULL.
///
/// # Safety
/// `cache_dir` must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_compute(n: u32, d: u32, target: FlTarget, cache_dir: *const c_char, out: *mut *mut FlReport) -> FlStatus {
    guard(|| {
        let target = match target {
            FlTarget::FullLinear => Target::FullLinear,
            FlTarget::PrimitiveLinear => Target::PrimitiveLinear,
            FlTarget::PrimitiveHodge => Target::PrimitiveHodge,
        };
        let pipeline = Pipeline::new(config(n, d, target, cache_dir)?).map_err(lift)?;
        let report = match target {
            Target::PrimitiveHodge => pipeline.run_hodge_branch(),
            t => pipeline.run_linear_branch(t == Target::PrimitiveLinear),
        }
        .map_err(lift)?;
        write_box(out, FlReport { inner: report })
    })
}

/// Runs both branches and compares them. `cache_dir` may be NULL.
///
/// # Safety
/// `cache_dir` must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_verify(n: u32, d: u32, cache_dir: *const c_char, out: *mut *mut FlVerification) -> FlStatus {
    guard(|| {
        let pipeline = Pipeline::new(config(n, d, Target::Verify, cache_dir)?).map_err(lift)?;
        let result = pipeline.verify().map_err(lift)?;
        write_box(out, FlVerification { inner: result })
    })
}

/// Number of linear cycles on the Fermat variety, as a decimal string.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_cycle_count(n: u32, d: u32, out: *mut *mut c_char) -> FlStatus {
    guard(|| {
        let p = FermatParams::new(n, d).map_err(lift)?;
        write_string(out, p.cycle_count().to_string())
    })
}

/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn fl_report_free(r: *mut FlReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Rank of the nondegenerate quotient, or 0 for NULL.
///
/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn fl_report_rank(r: *const FlReport) -> usize {
    r.as_ref().map_or(0, |r| r.inner.rank)
}

/// Discriminant sign, +1 or -1; 0 for NULL.
///
/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn fl_report_sign(r: *const FlReport) -> i32 {
    r.as_ref().map_or(0, |r| r.inner.sign)
}

/// Divisors in table notation with the sign, e.g. `+1^26·5^10·25^1`.
///
/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_report_divisors(r: *const FlReport, out: *mut *mut c_char) -> FlStatus {
    guard(|| write_string(out, borrow(r, "report")?.inner.signed_divisors()))
}

/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_report_to_json(r: *const FlReport, out: *mut *mut c_char) -> FlStatus {
    guard(|| {
        let json = serde_json::to_string(&borrow(r, "report")?.inner).map_err(|e| lift(e.into()))?;
        write_string(out, json)
    })
}

/// # Safety
/// `v` must be NULL or a live verification handle.
#[no_mangle]
pub unsafe extern "C" fn fl_verification_free(v: *mut FlVerification) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `v` must be NULL or a live verification handle.
#[no_mangle]
pub unsafe extern "C" fn fl_verification_lists_equal(v: *const FlVerification) -> bool {
    v.as_ref().is_some_and(|v| v.inner.verify.lists_equal)
}

/// # Safety
/// `v` must be NULL or a live verification handle.
#[no_mangle]
pub unsafe extern "C" fn fl_verification_table_relation_ok(v: *const FlVerification) -> bool {
    v.as_ref().is_some_and(|v| v.inner.verify.table_relation_ok)
}

/// # Safety
/// `v` must be NULL or a live verification handle.
#[no_mangle]
pub unsafe extern "C" fn fl_verification_condition_eq1(v: *const FlVerification) -> bool {
    v.as_ref().is_some_and(|v| v.inner.verify.condition_eq1)
}

/// # Safety
/// `v` must be a live verification handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_verification_to_json(v: *const FlVerification, out: *mut *mut c_char) -> FlStatus {
    guard(|| {
        let json = serde_json::to_string(&borrow(v, "verification")?.inner).map_err(|e| lift(e.into()))?;
        write_string(out, json)
    })
}
