//! C ABI over `loewner`: an opaque chain handle, status codes and a
//! thread-local last-error message.
//!
//! Every function returns a [`LoewnerStatus`]; on failure the message is
//! available from [`loewner_last_error_message`] until the next call on
//! the same thread. Strings returned through out-pointers are owned by the
//! caller and released with [`loewner_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use loewner::action::{dirichlet_energy, log_action_series, theorem1_rhs, verify_theorem1_from};
use loewner::config::RunConfig;
use loewner::driving::{laplacian_density, DrivingSpec};
use loewner::evolution::{evolve_between, ChainState};
use loewner::{Complex64, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoewnerStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInput = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Evolving chain: driver, step size and the current state.
pub struct LoewnerChain {
    driver: DrivingSpec,
    dt: f64,
    state: ChainState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: LoewnerStatus, message: impl Into<String>) -> LoewnerStatus {
    set_error(message.into());
    status
}

fn from_error(e: Error) -> LoewnerStatus {
    let status = if e.is_validation() { LoewnerStatus::InvalidInput } else { LoewnerStatus::Numerical };
    fail(status, format!("{}: {e}", e.code()))
}

fn guard(f: impl FnOnce() -> LoewnerStatus) -> LoewnerStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(LoewnerStatus::Panic, "panic inside loewner"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, LoewnerStatus> {
    if s.is_null() {
        return Err(fail(LoewnerStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(LoewnerStatus::InvalidArgument, "string argument is not UTF-8"))
}

fn into_c_string(s: String, out: *mut *mut c_char) -> LoewnerStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: callers check `out` for null before building the string.
            unsafe { *out = c.into_raw() };
            LoewnerStatus::Ok
        }
        Err(_) => fail(LoewnerStatus::Numerical, "output contains a NUL byte"),
    }
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next `loewner_*` call on the same thread.
#[no_mangle]
pub extern "C" fn loewner_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a chain at `t = 0` from a run configuration (JSON text; the
/// driver, `N`, `dt` and `f0` fields are used).
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer
/// to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn loewner_chain_new(config_json: *const c_char, out: *mut *mut LoewnerChain) -> LoewnerStatus {
    guard(|| {
        if out.is_null() {
            return fail(LoewnerStatus::NullPointer, "out is null");
        }
        let text = match read_str(config_json) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let cfg = match RunConfig::from_json(text) {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        let f0 = match cfg.initial_map() {
            Ok(f) => f,
            Err(e) => return from_error(e),
        };
        let chain = LoewnerChain { driver: cfg.driver, dt: cfg.dt, state: ChainState::new(0.0, f0) };
        *out = Box::into_raw(Box::new(chain));
        LoewnerStatus::Ok
    })
}

/// Releases a chain; NULL is ignored.
///
/// # Safety
/// `chain` must be NULL or a handle from [`loewner_chain_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn loewner_chain_free(chain: *mut LoewnerChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

unsafe fn chain_ref<'a>(chain: *const LoewnerChain) -> Result<&'a LoewnerChain, LoewnerStatus> {
    chain.as_ref().ok_or_else(|| fail(LoewnerStatus::NullPointer, "chain is null"))
}

/// Integrates the chain from its current time to `t` (either direction).
/// On failure the chain keeps its previous state.
///
/// # Safety
/// `chain` must be a live handle from [`loewner_chain_new`].
#[no_mangle]
pub unsafe extern "C" fn loewner_chain_evolve_to(chain: *mut LoewnerChain, t: f64) -> LoewnerStatus {
    guard(|| {
        let Some(c) = chain.as_mut() else { return fail(LoewnerStatus::NullPointer, "chain is null") };
        if !t.is_finite() || t < 0.0 {
            return fail(LoewnerStatus::InvalidArgument, format!("target time must be finite and non-negative, got {t}"));
        }
        match evolve_between(&c.state, &c.driver, t, c.dt) {
            Ok(s) => {
                c.state = s;
                LoewnerStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Current time and truncation order.
///
/// # Safety
/// `chain` must be a live handle; `out_t` and `out_order` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn loewner_chain_info(
    chain: *const LoewnerChain,
    out_t: *mut f64,
    out_order: *mut usize,
) -> LoewnerStatus {
    guard(|| {
        let c = match chain_ref(chain) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if out_t.is_null() || out_order.is_null() {
            return fail(LoewnerStatus::NullPointer, "output pointer is null");
        }
        *out_t = c.state.t;
        *out_order = c.state.order();
        LoewnerStatus::Ok
    })
}

/// Writes `a_1 .. a_N` as interleaved `(re, im)` pairs into `out`, which
/// holds `len` doubles (at least `2N`).
///
/// # Safety
/// `chain` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn loewner_chain_coefficients(chain: *const LoewnerChain, out: *mut f64, len: usize) -> LoewnerStatus {
    guard(|| {
        let c = match chain_ref(chain) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(LoewnerStatus::NullPointer, "output buffer is null");
        }
        let a = c.state.f.coefficients();
        if len < 2 * a.len() {
            return fail(LoewnerStatus::BufferTooSmall, format!("need {} doubles, got {len}", 2 * a.len()));
        }
        let buf = std::slice::from_raw_parts_mut(out, 2 * a.len());
        for (pair, z) in buf.chunks_exact_mut(2).zip(a) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        LoewnerStatus::Ok
    })
}

/// `f(z, t)` at the current time.
///
/// # Safety
/// `chain` must be a live handle; `out_re` and `out_im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn loewner_chain_evaluate(
    chain: *const LoewnerChain,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> LoewnerStatus {
    guard(|| {
        let c = match chain_ref(chain) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if out_re.is_null() || out_im.is_null() {
            return fail(LoewnerStatus::NullPointer, "output pointer is null");
        }
        let v = c.state.f.evaluate(Complex64::new(re, im));
        *out_re = v.re;
        *out_im = v.im;
        LoewnerStatus::Ok
    })
}

/// Dirichlet energy and logarithmic action (series route) at the current time.
///
/// # Safety
/// `chain` must be a live handle; both outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn loewner_chain_energies(
    chain: *const LoewnerChain,
    out_dirichlet: *mut f64,
    out_log_action: *mut f64,
) -> LoewnerStatus {
    guard(|| {
        let c = match chain_ref(chain) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if out_dirichlet.is_null() || out_log_action.is_null() {
            return fail(LoewnerStatus::NullPointer, "output pointer is null");
        }
        match log_action_series(&c.state) {
            Ok(s) => {
                *out_dirichlet = dirichlet_energy(&c.state);
                *out_log_action = s.value;
                LoewnerStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Boundary terms of the action derivative at the current time for the
/// chain's own density. Slit drivers have none and return `InvalidInput`.
///
/// # Safety
/// `chain` must be a live handle; all outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn loewner_chain_action_rate(
    chain: *const LoewnerChain,
    out_term1: *mut f64,
    out_term2: *mut f64,
    out_rhs: *mut f64,
) -> LoewnerStatus {
    guard(|| {
        let c = match chain_ref(chain) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if out_term1.is_null() || out_term2.is_null() || out_rhs.is_null() {
            return fail(LoewnerStatus::NullPointer, "output pointer is null");
        }
        let density = match &c.driver {
            DrivingSpec::LaplacianGrowth => match laplacian_density(&c.state.f, c.state.order(), c.state.t) {
                Ok(d) => d,
                Err(e) => return from_error(e),
            },
            d => match d.density_at(c.state.t) {
                Some(d) => d,
                None => return fail(LoewnerStatus::InvalidInput, "driver has no boundary density"),
            },
        };
        match theorem1_rhs(&c.state, &density) {
            Ok(terms) => {
                *out_term1 = terms.term1;
                *out_term2 = terms.term2;
                *out_rhs = terms.rhs;
                LoewnerStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Runs the finite-difference check at time `t` for a run configuration
/// and returns the report as JSON.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn loewner_verify_theorem1_json(
    config_json: *const c_char,
    t: f64,
    out_json: *mut *mut c_char,
) -> LoewnerStatus {
    guard(|| {
        if out_json.is_null() {
            return fail(LoewnerStatus::NullPointer, "out_json is null");
        }
        let text = match read_str(config_json) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let result = RunConfig::from_json(text).and_then(|cfg| {
            let f0 = cfg.initial_map()?;
            verify_theorem1_from(&f0, &cfg.driver, t, &cfg.verify_controls())
        });
        match result.and_then(|r| serde_json::to_string(&r).map_err(Error::from)) {
            Ok(s) => into_c_string(s, out_json),
            Err(e) => from_error(e),
        }
    })
}

/// Neretin polynomials `P_2 .. P_kmax` as the JSON table of the CLI.
///
/// # Safety
/// `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn loewner_neretin_table_json(kmax: usize, charge: f64, out_json: *mut *mut c_char) -> LoewnerStatus {
    guard(|| {
        if out_json.is_null() {
            return fail(LoewnerStatus::NullPointer, "out_json is null");
        }
        if kmax < 2 || !charge.is_finite() {
            return fail(LoewnerStatus::InvalidArgument, "kmax must be at least 2 and charge finite");
        }
        match loewner::cli::neretin_table(kmax, charge).and_then(|t| serde_json::to_string(&t).map_err(Error::from)) {
            Ok(s) => into_c_string(s, out_json),
            Err(e) => from_error(e),
        }
    })
}

/// Releases a string returned by this library; NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn loewner_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
