//! C interface to the dividend barrier solver.
//!
//! Every entry point returns a [`DivoptStatus`]; results come back through out
//! pointers. Objects are opaque handles created by `*_new`/`divopt_solve` and
//! released with the matching `*_free`. On failure a message is kept per thread
//! and can be read with [`divopt_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use divopt::{
    build_scale_set, simulate_value, solve_optimal, value_bubl, BarrierPair, BarrierSolution, Error, JumpPhase,
    LevyModel, PiecewiseValue, ScaleSets, SimConfig, Strategy,
};

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivoptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    Domain = 4,
    Root = 5,
    InvalidPair = 6,
    Solver = 7,
    Quadrature = 8,
    Simulation = 9,
    Config = 10,
    Panic = 11,
}

/// Barrier levels of a solved problem.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DivoptBarriers {
    pub b_bar: f64,
    pub b_star: f64,
    pub b_u_star: f64,
    pub b_l_star: f64,
    pub kappa: f64,
    /// `b_l* = 0`: pay everything at the first decision time above `b_u*`.
    pub liquidation: bool,
}

/// Monte Carlo estimate.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DivoptEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub n_ruined: u64,
    pub truncation_bound: f64,
}

/// A surplus model together with decision rate `gamma` and discount `delta`.
pub struct DivoptProblem {
    model: LevyModel,
    sets: ScaleSets,
}

/// Optimal barriers and the value function they induce.
pub struct DivoptSolution {
    solution: BarrierSolution,
    value: PiecewiseValue,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let clean = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

fn status_of(e: &Error) -> DivoptStatus {
    match e {
        Error::InvalidModel(_) => DivoptStatus::InvalidModel,
        Error::Domain(_) => DivoptStatus::Domain,
        Error::Root(_) => DivoptStatus::Root,
        Error::InvalidPair(_) => DivoptStatus::InvalidPair,
        Error::Solver(_) => DivoptStatus::Solver,
        Error::Quadrature { .. } => DivoptStatus::Quadrature,
        Error::Simulation(_) => DivoptStatus::Simulation,
        Error::Config { .. } => DivoptStatus::Config,
    }
}

struct Failure(DivoptStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DivoptStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> DivoptStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DivoptStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            DivoptStatus::Panic
        }
    }
}

/// Message of the most recent failure on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn divopt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn divopt_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string has an interior NUL"),
    };
    VERSION.as_ptr()
}

/// Builds a problem from drift `c`, volatility `sigma`, claim intensity
/// `lambda`, `n_phases` mixture weights and rates, decision rate `gamma` and
/// discount rate `delta`.
///
/// # Safety
/// `weights` and `rates` must point to `n_phases` readable doubles (they may be
/// null when `n_phases == 0`); `out` must be a valid pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn divopt_problem_new(
    c: f64,
    sigma: f64,
    lambda: f64,
    weights: *const f64,
    rates: *const f64,
    n_phases: usize,
    gamma: f64,
    delta: f64,
    out: *mut *mut DivoptProblem,
) -> DivoptStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let mut mixture = Vec::with_capacity(n_phases);
        if n_phases > 0 {
            if weights.is_null() {
                return Err(null("weights"));
            }
            if rates.is_null() {
                return Err(null("rates"));
            }
            let w = std::slice::from_raw_parts(weights, n_phases);
            let r = std::slice::from_raw_parts(rates, n_phases);
            mixture.extend(w.iter().zip(r).map(|(&p, &b)| JumpPhase::new(p, b)));
        }
        let model = LevyModel::new(c, sigma, lambda, mixture)?;
        let sets = build_scale_set(&model, gamma, delta)?;
        *out = Box::into_raw(Box::new(DivoptProblem { model, sets }));
        Ok(())
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must come from [`divopt_problem_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn divopt_problem_free(problem: *mut DivoptProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves for the optimal barriers under fixed cost `kappa > 0`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn divopt_solve(
    problem: *const DivoptProblem,
    kappa: f64,
    out: *mut *mut DivoptSolution,
) -> DivoptStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if kappa.is_nan() || kappa <= 0.0 {
            return Err(Failure(DivoptStatus::InvalidArgument, format!("kappa must be positive, got {kappa}")));
        }
        let solution = solve_optimal(&p.sets, kappa)?;
        let value = solution.value(&p.sets)?;
        *out = Box::into_raw(Box::new(DivoptSolution { solution, value }));
        Ok(())
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must come from [`divopt_solve`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn divopt_solution_free(solution: *mut DivoptSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Copies the barrier levels of a solution.
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn divopt_solution_barriers(
    solution: *const DivoptSolution,
    out: *mut DivoptBarriers,
) -> DivoptStatus {
    guard(|| {
        let s = &solution.as_ref().ok_or_else(|| null("solution"))?.solution;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = DivoptBarriers {
            b_bar: s.b_bar,
            b_star: s.b_star,
            b_u_star: s.b_u_star,
            b_l_star: s.b_l_star,
            kappa: s.kappa,
            liquidation: s.liquidation,
        };
        Ok(())
    })
}

/// Optimal value (`order == 0`) or its first or second derivative at `x`.
/// Derivatives at `b_u*` are taken from the right.
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn divopt_solution_value(
    solution: *const DivoptSolution,
    x: f64,
    order: u32,
    out: *mut f64,
) -> DivoptStatus {
    guard(|| {
        let v = &solution.as_ref().ok_or_else(|| null("solution"))?.value;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if x.is_nan() {
            return Err(Failure(DivoptStatus::InvalidArgument, "x is NaN".into()));
        }
        *out = match order {
            0 => v.eval(x),
            1 | 2 => v.derivative(x, order)?,
            _ => return Err(Failure(DivoptStatus::InvalidArgument, format!("order must be 0, 1 or 2, got {order}"))),
        };
        Ok(())
    })
}

/// Value at `x` of the strategy paying down to `b_l` whenever the surplus is at
/// least `b_u` at a decision time, each payment costing `kappa`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn divopt_pair_value(
    problem: *const DivoptProblem,
    b_u: f64,
    b_l: f64,
    kappa: f64,
    x: f64,
    out: *mut f64,
) -> DivoptStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let v = value_bubl(&p.sets, &BarrierPair::new(b_u, b_l, kappa)?)?;
        *out = v.eval(x);
        Ok(())
    })
}

/// Monte Carlo estimate of the same strategy value from `x0`, with `n_paths`
/// paths and the given seed. Deterministic for fixed inputs.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn divopt_simulate_pair(
    problem: *const DivoptProblem,
    b_u: f64,
    b_l: f64,
    kappa: f64,
    x0: f64,
    n_paths: u64,
    seed: u64,
    out: *mut DivoptEstimate,
) -> DivoptStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let pair = BarrierPair::new(b_u, b_l, kappa)?;
        let n = usize::try_from(n_paths)
            .map_err(|_| Failure(DivoptStatus::InvalidArgument, format!("n_paths {n_paths} too large")))?;
        let cfg = SimConfig::new(n, p.sets.delta, seed);
        let est = simulate_value(&p.model, p.sets.gamma, p.sets.delta, &Strategy::Pair(pair), x0, &cfg)?;
        *out = DivoptEstimate {
            mean: est.mean,
            std_error: est.stderr,
            n_paths: est.n_paths as u64,
            n_ruined: est.n_ruined as u64,
            truncation_bound: est.truncation_bound,
        };
        Ok(())
    })
}
