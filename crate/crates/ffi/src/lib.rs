//! C interface to rkopt.
//!
//! Every function returns an `RkoStatus`; on failure the message is
//! available from `rko_last_error` on the same thread. Handles are opaque
//! and must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rkopt::problems::{Instance, ProblemKind};
use rkopt::solvers::{run_portfolio, ParamSet, SolveOptions, SolverKind};
use rkopt::{Decoder, Error, Fitness, RunResult, StopCriterion};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RkoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    ParseError = 4,
    IoError = 5,
    Infeasible = 6,
    TooLarge = 7,
    Panic = 8,
}

/// Method selector for `RkoOptions::method`: the full portfolio.
pub const RKO_PORTFOLIO: i32 = -1;

/// Run settings. A non-positive `time_limit` and a zero `max_evaluations`
/// mean "unset"; at least one must be set.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RkoOptions {
    pub seed: u64,
    pub time_limit: f64,
    pub max_evaluations: u64,
    /// `RKO_PORTFOLIO`, or 0..7 for BRKGA, GA, SA, GRASP, ILS, VNS, PSO, LNS.
    pub method: i32,
    pub q_learning: bool,
    /// Run portfolio solvers on separate threads.
    pub parallel: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RkoFitness {
    pub objective: f64,
    pub penalty: f64,
    pub feasible: bool,
}

/// Decoder callback: maps `n` keys to a fitness. Called concurrently when
/// `parallel` is set, so it must then be thread-safe.
pub type RkoDecodeFn = extern "C" fn(keys: *const f64, n: usize, user: *mut c_void) -> RkoFitness;

/// A loaded problem instance.
pub struct RkoProblem {
    instance: Instance,
}

/// Outcome of a solve.
pub struct RkoResult {
    result: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> RkoStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::InvalidDimension(_) => RkoStatus::DimensionMismatch,
        Error::Parse { .. } | Error::InvalidInstance(_) => RkoStatus::ParseError,
        Error::Io { .. } => RkoStatus::IoError,
        Error::Infeasible => RkoStatus::Infeasible,
        Error::TooLarge(_) => RkoStatus::TooLarge,
        _ => RkoStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status and a message.
fn guard(f: impl FnOnce() -> Result<(), (RkoStatus, String)>) -> RkoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RkoStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            RkoStatus::Panic
        }
    }
}

fn fail(e: Error) -> (RkoStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RkoStatus, String) {
    (RkoStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RkoStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (RkoStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Last error message of this thread, or null. Valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn rko_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn rko_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default options: seed 1, 10 s, portfolio on threads, table parameters.
#[no_mangle]
pub extern "C" fn rko_options_default() -> RkoOptions {
    RkoOptions {
        seed: 1,
        time_limit: 10.0,
        max_evaluations: 0,
        method: RKO_PORTFOLIO,
        q_learning: false,
        parallel: true,
    }
}

/// Loads an instance. `problem` is one of "tsp", "setcover", "anpmp",
/// "ncgpp", "thlp"; `alpha` is used by the p-median family only.
///
/// # Safety
/// `problem` and `path` are NUL-terminated strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rko_problem_load(
    problem: *const c_char,
    path: *const c_char,
    alpha: usize,
    out: *mut *mut RkoProblem,
) -> RkoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let kind: ProblemKind = text(problem, "problem")?.parse().map_err(fail)?;
        let path = text(path, "path")?;
        let alpha = (alpha > 0).then_some(alpha);
        let instance = Instance::load(kind, Path::new(path), alpha).map_err(fail)?;
        *out = Box::into_raw(Box::new(RkoProblem { instance }));
        Ok(())
    })
}

/// # Safety
/// `problem` is null or a handle from `rko_problem_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rko_problem_free(problem: *mut RkoProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of keys a solution vector of `problem` carries.
///
/// # Safety
/// `problem` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rko_problem_dimension(problem: *const RkoProblem, out: *mut usize) -> RkoStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = p.instance.decoder().dimension();
        Ok(())
    })
}

/// Decodes one key vector.
///
/// # Safety
/// `keys` points to `n` doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rko_problem_evaluate(
    problem: *const RkoProblem,
    keys: *const f64,
    n: usize,
    out: *mut RkoFitness,
) -> RkoStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if keys.is_null() {
            return Err(null("keys"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let keys = std::slice::from_raw_parts(keys, n);
        let d = p.instance.decoder();
        if n != d.dimension() {
            return Err(fail(Error::DimensionMismatch { expected: d.dimension(), got: n }));
        }
        if keys.iter().any(|k| !(0.0..1.0).contains(k)) {
            return Err((RkoStatus::InvalidArgument, "keys must lie in [0, 1)".into()));
        }
        *out = to_c(d.decode(keys));
        Ok(())
    })
}

/// Exact optimum of a tiny instance by enumeration.
///
/// # Safety
/// `problem` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rko_problem_brute_force(problem: *const RkoProblem, out: *mut f64) -> RkoStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = p.instance.brute_force().map_err(fail)?.objective;
        Ok(())
    })
}

fn to_c(f: Fitness) -> RkoFitness {
    RkoFitness {
        objective: f.objective,
        penalty: f.penalty,
        feasible: f.feasible,
    }
}

fn run(decoder: &dyn Decoder, params: &ParamSet, opts: &RkoOptions) -> Result<RunResult, (RkoStatus, String)> {
    let bad = |m: &str| (RkoStatus::InvalidArgument, m.to_string());
    let time = opts.time_limit > 0.0;
    let evals = opts.max_evaluations > 0;
    let stop = match (time, evals) {
        (true, true) => StopCriterion::time(opts.time_limit).map(|s| s.with_max_evaluations(opts.max_evaluations)),
        (true, false) => StopCriterion::time(opts.time_limit),
        (false, true) => StopCriterion::evaluations(opts.max_evaluations),
        (false, false) => return Err(bad("set time_limit or max_evaluations")),
    }
    .map_err(fail)?;
    let kinds: Vec<SolverKind> = match opts.method {
        RKO_PORTFOLIO => SolverKind::ALL.to_vec(),
        m => vec![*usize::try_from(m)
            .ok()
            .and_then(|i| SolverKind::ALL.get(i))
            .ok_or_else(|| bad("method must be -1 or 0..7"))?],
    };
    let mut so = SolveOptions::new(opts.seed, stop).with_q_learning(opts.q_learning);
    if !opts.parallel {
        so = so.sequential();
    }
    run_portfolio(decoder, &kinds, params, &so).map(|r| r.best).map_err(fail)
}

/// Solves a loaded instance with the tuned parameters of its problem.
///
/// # Safety
/// `problem` is a live handle; `opts` is null (defaults) or valid; `out` is
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rko_solve(
    problem: *const RkoProblem,
    opts: *const RkoOptions,
    out: *mut *mut RkoResult,
) -> RkoStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = opts.as_ref().copied().unwrap_or_else(|| rko_options_default());
        let params = ParamSet::for_problem(p.instance.kind());
        let result = run(p.instance.decoder(), &params, &opts)?;
        *out = Box::into_raw(Box::new(RkoResult { result }));
        Ok(())
    })
}

struct Callback {
    dimension: usize,
    decode: RkoDecodeFn,
    user: *mut c_void,
}

// The caller promises a thread-safe callback when solving in parallel.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

impl Decoder for Callback {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn decode(&self, keys: &[f64]) -> Fitness {
        let f = (self.decode)(keys.as_ptr(), keys.len(), self.user);
        let penalty = if f.penalty > 0.0 { f.penalty } else { 0.0 };
        Fitness {
            objective: f.objective,
            penalty,
            feasible: f.feasible && penalty == 0.0,
        }
    }
}

/// Solves a problem given by a decoder callback, with the p-median
/// parameter table.
///
/// # Safety
/// `decode` must be safe to call with `user` for the whole run (from several
/// threads when `opts->parallel` is set); `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rko_solve_callback(
    dimension: usize,
    decode: Option<extern "C" fn(keys: *const f64, n: usize, user: *mut c_void) -> RkoFitness>,
    user: *mut c_void,
    opts: *const RkoOptions,
    out: *mut *mut RkoResult,
) -> RkoStatus {
    guard(|| {
        let decode = decode.ok_or_else(|| null("decode"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if dimension == 0 {
            return Err(fail(Error::InvalidDimension(0)));
        }
        let opts = opts.as_ref().copied().unwrap_or_else(|| rko_options_default());
        let cb = Callback { dimension, decode, user };
        let result = run(&cb, &ParamSet::pmedian(), &opts)?;
        *out = Box::into_raw(Box::new(RkoResult { result }));
        Ok(())
    })
}

/// # Safety
/// `result` is null or a handle from a solve call not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rko_result_free(result: *mut RkoResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Best fitness found.
///
/// # Safety
/// `result` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rko_result_fitness(result: *const RkoResult, out: *mut RkoFitness) -> RkoStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_c(r.result.fitness);
        Ok(())
    })
}

/// Seconds to the best solution and total evaluations.
///
/// # Safety
/// `result` is a live handle; each output pointer is null or writable.
#[no_mangle]
pub unsafe extern "C" fn rko_result_stats(
    result: *const RkoResult,
    time_to_best: *mut f64,
    evaluations: *mut u64,
) -> RkoStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if let Some(t) = time_to_best.as_mut() {
            *t = r.result.time_to_best;
        }
        if let Some(e) = evaluations.as_mut() {
            *e = r.result.evaluations;
        }
        Ok(())
    })
}

/// Copies the best key vector into `buf`. `len` receives the dimension;
/// `buf` may be null to query it.
///
/// # Safety
/// `buf` is null or holds `cap` doubles; `len` is writable.
#[no_mangle]
pub unsafe extern "C" fn rko_result_keys(
    result: *const RkoResult,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> RkoStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if len.is_null() {
            return Err(null("len"));
        }
        let keys = r.result.keys.as_slice();
        *len = keys.len();
        if buf.is_null() {
            return Ok(());
        }
        if cap < keys.len() {
            return Err(fail(Error::DimensionMismatch { expected: keys.len(), got: cap }));
        }
        ptr::copy_nonoverlapping(keys.as_ptr(), buf, keys.len());
        Ok(())
    })
}
