//! C interface to `fdrd-core`.
//!
//! All functions return an [`FdrdStatus`] and write results through out
//! pointers. Objects are opaque handles created by `*_new` functions and
//! released with the matching `*_free`. The message for the most recent
//! failure on the calling thread is available from [`fdrd_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fdrd_core::cli::{execute, RunConfig};
use fdrd_core::delay_series::{Delay, DelaySeriesProblem};
use fdrd_core::history::HistoryFunction;
use fdrd_core::pde_verify::{default_params, named_solution, AssembledSolution, SolutionName, SolutionParams};
use fdrd_core::special::prabhakar_value;
use fdrd_core::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdrdStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad parameters, violated constraint or malformed configuration.
    InvalidArgument = 2,
    /// A series, quadrature or solver failed to reach its tolerance.
    Numerical = 3,
    Io = 4,
    /// The output buffer is too small; the required length was written.
    BufferTooSmall = 5,
    Panic = 6,
}

/// Coefficient problem for one mode: `D^alpha A = lambda A + sum delta_i A(t - tau_i) + c0`.
pub struct FdrdProblem(DelaySeriesProblem);

/// Assembled solution `u(x, t)`.
pub struct FdrdSolution(AssembledSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FdrdStatus {
    if matches!(e, Error::Io(_)) {
        FdrdStatus::Io
    } else if e.is_validation() {
        FdrdStatus::InvalidArgument
    } else {
        FdrdStatus::Numerical
    }
}

fn guard<F: FnOnce() -> Result<(), FdrdStatus>>(f: F) -> FdrdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FdrdStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".to_string());
            FdrdStatus::Panic
        }
    }
}

fn fail(e: Error) -> FdrdStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> FdrdStatus {
    set_error(format!("{what} is null"));
    FdrdStatus::NullPointer
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], FdrdStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, FdrdStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        FdrdStatus::InvalidArgument
    })
}

/// Copy the last error message of this thread into `buf` (NUL-terminated).
///
/// Returns the message length excluding the terminator, or 0 when there is
/// no error. The message is truncated when `len` is too small.
///
/// # Safety
/// `buf` must be valid for `len` bytes or be null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn fdrd_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Three-parameter Mittag-Leffler function `E^gamma_{alpha,beta}(z)`.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn fdrd_prabhakar(alpha: f64, beta: f64, gamma: f64, z: f64, out: *mut f64) -> FdrdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = prabhakar_value(alpha, beta, gamma, z).map_err(fail)?;
        Ok(())
    })
}

/// Create a coefficient problem with a polynomial history
/// `phi(t) = sum history[k] t^k` on `[-max tau, 0]`.
///
/// # Safety
/// `taus` and `deltas` must hold `n_delays` values, `history` must hold
/// `n_history` values, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdrd_problem_new(
    alpha: f64,
    lambda: f64,
    c0: f64,
    taus: *const f64,
    deltas: *const f64,
    n_delays: usize,
    history: *const f64,
    n_history: usize,
    out: *mut *mut FdrdProblem,
) -> FdrdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let taus = slice(taus, n_delays, "taus")?;
        let deltas = slice(deltas, n_delays, "deltas")?;
        let coeffs = slice(history, n_history, "history")?.to_vec();
        let delays: Vec<Delay> = taus
            .iter()
            .zip(deltas)
            .map(|(&tau, &delta)| Delay { tau, delta })
            .collect();
        let tau_star = taus.iter().copied().fold(0.0, f64::max);
        let hist = HistoryFunction::polynomial(coeffs, tau_star).map_err(fail)?;
        let p = DelaySeriesProblem::new(alpha, lambda, c0, delays, hist).map_err(fail)?;
        *out = Box::into_raw(Box::new(FdrdProblem(p)));
        Ok(())
    })
}

/// Evaluate the coefficient `A(t)` (the history for `t <= 0`).
///
/// # Safety
/// `problem` must come from [`fdrd_problem_new`] and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fdrd_problem_eval(problem: *const FdrdProblem, t: f64, out: *mut f64) -> FdrdStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = p.0.eval(t).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `problem` must come from [`fdrd_problem_new`] or be null, and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fdrd_problem_free(problem: *mut FdrdProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Build a named solution (for example `"trig3d_H1"`). `params_json` may be
/// null for the default parameters, otherwise it is a JSON object with the
/// fields `alpha, a, b, c1, c0, delays, histories` (and optional `reaction`).
///
/// # Safety
/// `name` and a non-null `params_json` must be NUL-terminated strings and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fdrd_solution_new(
    name: *const c_char,
    params_json: *const c_char,
    out: *mut *mut FdrdSolution,
) -> FdrdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let name: SolutionName = string(name, "name")?.parse().map_err(fail)?;
        let params: SolutionParams = if params_json.is_null() {
            default_params(name)
        } else {
            let text = string(params_json, "params_json")?;
            serde_json::from_str(text).map_err(|e| fail(Error::config("params", e.to_string())))?
        };
        let sol = named_solution(name, &params).map_err(fail)?;
        *out = Box::into_raw(Box::new(FdrdSolution(sol)));
        Ok(())
    })
}

/// Dimension of the solution's invariant subspace.
///
/// # Safety
/// `solution` must come from [`fdrd_solution_new`] and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fdrd_solution_dim(solution: *const FdrdSolution, out: *mut usize) -> FdrdStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.0.subspace.dim();
        Ok(())
    })
}

/// Evaluate `u(x, t)`.
///
/// # Safety
/// `solution` must come from [`fdrd_solution_new`] and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fdrd_solution_eval(
    solution: *const FdrdSolution,
    x: f64,
    t: f64,
    out: *mut f64,
) -> FdrdStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.0.eval(x, t).map_err(fail)?;
        Ok(())
    })
}

/// Write the coefficients `A_1(t) .. A_n(t)` into `buf`. When `len` is
/// smaller than the dimension, the dimension is written to `needed` and
/// `BufferTooSmall` is returned. `needed` may be null.
///
/// # Safety
/// `buf` must be valid for `len` doubles; `needed` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn fdrd_solution_coefficients(
    solution: *const FdrdSolution,
    t: f64,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FdrdStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let dim = s.0.subspace.dim();
        if !needed.is_null() {
            *needed = dim;
        }
        if len < dim {
            set_error(format!("buffer holds {len} values, {dim} needed"));
            return Err(FdrdStatus::BufferTooSmall);
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let a = s.0.coefficients_at(t).map_err(fail)?;
        ptr::copy_nonoverlapping(a.as_ptr(), buf, dim);
        Ok(())
    })
}

/// # Safety
/// `solution` must come from [`fdrd_solution_new`] or be null, and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fdrd_solution_free(solution: *mut FdrdSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Run a JSON run configuration (the format accepted by `fdrd --config`)
/// and write its output files into `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn fdrd_run_config(config_json: *const c_char, out_dir: *const c_char) -> FdrdStatus {
    guard(|| {
        let text = string(config_json, "config_json")?;
        let dir = string(out_dir, "out_dir")?;
        let mut cfg = RunConfig::from_json(text).map_err(fail)?;
        cfg.materialize().map_err(fail)?;
        cfg.validate().map_err(fail)?;
        let artifacts = execute(&cfg).map_err(fail)?;
        artifacts.write_to(Path::new(dir)).map_err(fail)?;
        Ok(())
    })
}
