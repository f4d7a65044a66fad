//! C ABI over `commlab`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CommlabStatus`]; on failure the message is available from
//! [`commlab_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use commlab::bounds::{
    bound_summary, cover_number, Budget, CoverMode, CoverStatus, DEFAULT_CATALOG_CAP,
};
use commlab::cli::instance::{parse_instance, Instance};
use commlab::functions::{gen_function, ColoredFunction, FunctionKind};
use commlab::verify::{
    batch_experiment, evaluate_case, BatchConfig, Generator, Inequality, RhoMode, Suite,
};
use commlab::CommlabError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommlabStatus {
    Ok = 0,
    InvalidInput = 1,
    UncoveredCell = 2,
    InvalidSelector = 3,
    InvalidTree = 4,
    GenerationFailure = 5,
    Degenerate = 6,
    SizeCap = 7,
    /// A required pointer argument was null.
    NullPointer = 8,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 9,
    /// An exact search stopped at its time limit; bounds are still filled.
    Timeout = 10,
    /// Internal panic caught at the boundary.
    Internal = 11,
}

/// Built-in function families for [`commlab_function_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommlabFunctionKind {
    Xor = 0,
    Eq = 1,
    MatVec = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommlabRhoMode {
    Global = 0,
    MaxBox = 1,
    Expected = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommlabSuite {
    Main = 0,
    Transcript = 1,
    Ic = 2,
    Multiparty = 3,
    Tree = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommlabGenerator {
    Partition = 0,
    RandomBounded = 1,
}

/// Opaque validated instance.
pub struct CommlabInstance(Instance);

/// Opaque colored function.
pub struct CommlabFunction(ColoredFunction);

/// Headline quantities of one instance. Two-party-only values are NaN for
/// other arities.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommlabProfile {
    pub arity: usize,
    pub rho_global: u32,
    pub rho_box_max: u32,
    pub h_t: f64,
    pub i_xy: f64,
    pub i_xy_given_t: f64,
    pub ic: f64,
    pub margin_main: f64,
}

/// Exact cover outcome; `lower == upper` unless the search timed out.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommlabCover {
    pub lower: usize,
    pub upper: usize,
    pub greedy: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommlabBounds {
    pub color_count: usize,
    pub cover_lower: usize,
    pub cover_upper: usize,
    pub cover_greedy: usize,
    pub fooling_best: usize,
    pub rank_rational: usize,
    pub rank_gf2: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommlabBatchSummary {
    pub rows: usize,
    pub violations: usize,
    pub errors: usize,
    /// Smallest margin over all checks of all rows.
    pub min_margin: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &CommlabError) -> CommlabStatus {
    match e {
        CommlabError::InvalidInput(_) => CommlabStatus::InvalidInput,
        CommlabError::UncoveredCell { .. } => CommlabStatus::UncoveredCell,
        CommlabError::InvalidSelector { .. } => CommlabStatus::InvalidSelector,
        CommlabError::InvalidTree(_) => CommlabStatus::InvalidTree,
        CommlabError::GenerationFailure { .. } => CommlabStatus::GenerationFailure,
        CommlabError::Degenerate(_) => CommlabStatus::Degenerate,
        CommlabError::SizeCap(_) => CommlabStatus::SizeCap,
    }
}

struct Fail(CommlabStatus, String);

impl From<CommlabError> for Fail {
    fn from(e: CommlabError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null() -> Fail {
    Fail(CommlabStatus::NullPointer, "null pointer argument".into())
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<CommlabStatus, Fail>) -> CommlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            CommlabStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(CommlabStatus::InvalidUtf8, e.to_string()))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(null)
}

fn rho(mode: CommlabRhoMode) -> RhoMode {
    match mode {
        CommlabRhoMode::Global => RhoMode::Global,
        CommlabRhoMode::MaxBox => RhoMode::MaxBox,
        CommlabRhoMode::Expected => RhoMode::Expected,
    }
}

fn duration(timeout_s: f64) -> Option<Duration> {
    (timeout_s > 0.0 && timeout_s.is_finite()).then(|| Duration::from_secs_f64(timeout_s))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn commlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn commlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn commlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates an instance document (`commlab-instance-v1`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_instance_from_json(
    json: *const c_char,
    out: *mut *mut CommlabInstance,
) -> CommlabStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let inst = parse_instance(str_arg(json)?)?;
        *out = Box::into_raw(Box::new(CommlabInstance(inst)));
        Ok(CommlabStatus::Ok)
    })
}

/// Canonical JSON of an instance; free with [`commlab_string_free`].
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_instance_to_json(
    inst: *const CommlabInstance,
    out: *mut *mut c_char,
) -> CommlabStatus {
    guard(|| {
        let out = out_arg(out)?;
        let inst = inst.as_ref().ok_or_else(null)?;
        let s = CString::new(inst.0.file.to_canonical_json()).expect("JSON has no NUL");
        *out = s.into_raw();
        Ok(CommlabStatus::Ok)
    })
}

/// # Safety
/// `inst` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn commlab_instance_free(inst: *mut CommlabInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Information profile and main-inequality margin of an instance.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_instance_profile(
    inst: *const CommlabInstance,
    rho_mode: CommlabRhoMode,
    out: *mut CommlabProfile,
) -> CommlabStatus {
    guard(|| {
        let out = out_arg(out)?;
        let inst = inst.as_ref().ok_or_else(null)?;
        let (p, reports) = evaluate_case(&inst.0.to_case(), Suite::Main, rho(rho_mode))?;
        let margin = reports
            .iter()
            .find(|r| r.inequality == Inequality::Main)
            .map_or(f64::NAN, |r| r.margin);
        *out = CommlabProfile {
            arity: p.arity,
            rho_global: p.rho_global,
            rho_box_max: p.rho_box_max,
            h_t: p.h_t,
            i_xy: p.i_xy.unwrap_or(f64::NAN),
            i_xy_given_t: p.i_xy_given_t.unwrap_or(f64::NAN),
            ic: p.ic.unwrap_or(f64::NAN),
            margin_main: margin,
        };
        Ok(CommlabStatus::Ok)
    })
}

/// Builds a built-in function. `parties` is used by `MatVec` only.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_function_new(
    kind: CommlabFunctionKind,
    n: u32,
    parties: usize,
    out: *mut *mut CommlabFunction,
) -> CommlabStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let fk = match kind {
            CommlabFunctionKind::Xor => FunctionKind::Xor { n },
            CommlabFunctionKind::Eq => FunctionKind::Eq { n },
            CommlabFunctionKind::MatVec => FunctionKind::MatVec { parties, n },
        };
        *out = Box::into_raw(Box::new(CommlabFunction(gen_function(&fk)?)));
        Ok(CommlabStatus::Ok)
    })
}

/// Number of distinct colors.
///
/// # Safety
/// `f` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn commlab_function_num_colors(f: *const CommlabFunction) -> u32 {
    f.as_ref().map_or(0, |f| f.0.num_colors())
}

/// # Safety
/// `f` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn commlab_function_free(f: *mut CommlabFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Monochromatic cover number. With `exact == false` only the greedy value
/// is computed and `lower`/`upper` equal it. A non-positive `timeout_s`
/// means no limit. Returns `Timeout` with valid bounds if time ran out.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_cover_number(
    f: *const CommlabFunction,
    exact: bool,
    timeout_s: f64,
    out: *mut CommlabCover,
) -> CommlabStatus {
    guard(|| {
        let out = out_arg(out)?;
        let f = &f.as_ref().ok_or_else(null)?.0;
        let greedy = cover_number(f, CoverMode::Greedy)?.upper;
        *out = CommlabCover {
            lower: greedy,
            upper: greedy,
            greedy,
        };
        if !exact {
            return Ok(CommlabStatus::Ok);
        }
        let r = cover_number(
            f,
            CoverMode::Exact {
                timeout: duration(timeout_s),
            },
        )?;
        out.lower = r.lower;
        out.upper = r.upper;
        Ok(if r.status == CoverStatus::Timeout {
            set_error(format!(
                "exact cover timed out in [{}, {}]",
                r.lower, r.upper
            ));
            CommlabStatus::Timeout
        } else {
            CommlabStatus::Ok
        })
    })
}

/// All lower and upper bounds at once. Fooling set and ranks are summed
/// over colors.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_bounds(
    f: *const CommlabFunction,
    timeout_s: f64,
    out: *mut CommlabBounds,
) -> CommlabStatus {
    guard(|| {
        let out = out_arg(out)?;
        let f = &f.as_ref().ok_or_else(null)?.0;
        let s = bound_summary(
            f,
            &Budget {
                timeout: duration(timeout_s),
                catalog_cap: DEFAULT_CATALOG_CAP,
            },
        )?;
        let greedy = s.cover_greedy.unwrap_or(0);
        let (lower, upper) = s
            .cover
            .as_ref()
            .map_or((s.color_count, greedy), |c| (c.lower, c.upper));
        *out = CommlabBounds {
            color_count: s.color_count,
            cover_lower: lower,
            cover_upper: upper,
            cover_greedy: greedy,
            fooling_best: s.fooling_best(),
            rank_rational: s.rank_rational_total(),
            rank_gf2: s.rank_gf2_total(),
        };
        Ok(if s.timed_out() {
            CommlabStatus::Timeout
        } else {
            CommlabStatus::Ok
        })
    })
}

/// Runs a verification suite over seeds `seed_lo..=seed_hi`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn commlab_verify_batch(
    suite: CommlabSuite,
    generator: CommlabGenerator,
    arity: usize,
    max_side: usize,
    rho_max: u32,
    seed_lo: u64,
    seed_hi: u64,
    rho_mode: CommlabRhoMode,
    tol: f64,
    out: *mut CommlabBatchSummary,
) -> CommlabStatus {
    guard(|| {
        let out = out_arg(out)?;
        let suite = match suite {
            CommlabSuite::Main => Suite::Main,
            CommlabSuite::Transcript => Suite::Transcript,
            CommlabSuite::Ic => Suite::Ic,
            CommlabSuite::Multiparty => Suite::Multiparty,
            CommlabSuite::Tree => Suite::Tree,
        };
        let generator = match generator {
            CommlabGenerator::Partition => Generator::Partition { arity, max_side },
            CommlabGenerator::RandomBounded => Generator::RandomBounded {
                arity,
                max_side,
                rho_max,
            },
        };
        if seed_lo > seed_hi {
            return Err(Fail(CommlabStatus::InvalidInput, "empty seed range".into()));
        }
        let result = batch_experiment(&BatchConfig {
            suite,
            generator,
            seeds: (seed_lo..=seed_hi).collect(),
            rho_mode: rho(rho_mode),
            tol,
        })?;
        let min_margin = result
            .rows
            .iter()
            .flat_map(|r| r.reports.iter().map(|m| m.margin))
            .fold(f64::INFINITY, f64::min);
        *out = CommlabBatchSummary {
            rows: result.rows.len(),
            violations: result.violations,
            errors: result.errors,
            min_margin,
        };
        Ok(CommlabStatus::Ok)
    })
}
