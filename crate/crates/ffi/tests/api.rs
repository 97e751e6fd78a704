use std::ffi::CStr;
use std::ptr;

use divopt_ffi::*;

const WEIGHTS: [f64; 2] = [0.9, 0.1];
const RATES: [f64; 2] = [1.9, 0.19];

fn reference() -> *mut DivoptProblem {
    let mut p = ptr::null_mut();
    let st = unsafe { divopt_problem_new(11.0, 1.0, 10.0, WEIGHTS.as_ptr(), RATES.as_ptr(), 2, 1.0, 0.2, &mut p) };
    assert_eq!(st, DivoptStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(divopt_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn solve_matches_library() {
    let p = reference();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { divopt_solve(p, 0.2, &mut s) }, DivoptStatus::Ok);
    let mut b = DivoptBarriers::default();
    assert_eq!(unsafe { divopt_solution_barriers(s, &mut b) }, DivoptStatus::Ok);

    let sets = divopt::build_scale_set(&divopt::LevyModel::reference(), 1.0, 0.2).unwrap();
    let lib = divopt::solve_optimal(&sets, 0.2).unwrap();
    assert_eq!(b.b_u_star, lib.b_u_star);
    assert_eq!(b.b_l_star, lib.b_l_star);
    assert_eq!(b.b_star, lib.b_star);
    assert!(!b.liquidation);

    let mut d1 = 0.0;
    assert_eq!(unsafe { divopt_solution_value(s, b.b_l_star, 1, &mut d1) }, DivoptStatus::Ok);
    assert!((d1 - 1.0).abs() < 1e-8);
    let mut v = 0.0;
    assert_eq!(unsafe { divopt_solution_value(s, -1.0, 0, &mut v) }, DivoptStatus::Ok);
    assert_eq!(v, 0.0);

    let mut pv = 0.0;
    let x = b.b_u_star + 1.0;
    assert_eq!(unsafe { divopt_pair_value(p, b.b_u_star, b.b_l_star, 0.2, x, &mut pv) }, DivoptStatus::Ok);
    assert_eq!(unsafe { divopt_solution_value(s, x, 0, &mut v) }, DivoptStatus::Ok);
    assert!((pv - v).abs() < 1e-12 * v);

    unsafe {
        divopt_solution_free(s);
        divopt_problem_free(p);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut p = ptr::null_mut();
    let bad = [0.5, 0.1];
    let st = unsafe { divopt_problem_new(11.0, 1.0, 10.0, bad.as_ptr(), RATES.as_ptr(), 2, 1.0, 0.2, &mut p) };
    assert_eq!(st, DivoptStatus::InvalidModel);
    assert!(p.is_null());
    assert!(last_error().contains("weights"), "{}", last_error());

    let st = unsafe { divopt_problem_new(11.0, 1.0, 10.0, ptr::null(), RATES.as_ptr(), 2, 1.0, 0.2, &mut p) };
    assert_eq!(st, DivoptStatus::NullPointer);

    let p = reference();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { divopt_solve(p, 0.0, &mut s) }, DivoptStatus::InvalidArgument);
    assert!(last_error().contains("kappa must be positive"));
    assert!(s.is_null());
    assert_eq!(unsafe { divopt_solve(ptr::null(), 0.2, &mut s) }, DivoptStatus::NullPointer);
    assert_eq!(unsafe { divopt_solve(p, 0.2, ptr::null_mut()) }, DivoptStatus::NullPointer);

    let mut v = 0.0;
    assert_eq!(unsafe { divopt_pair_value(p, 1.0, 0.9, 0.2, 1.0, &mut v) }, DivoptStatus::InvalidPair);

    assert_eq!(unsafe { divopt_solve(p, 0.2, &mut s) }, DivoptStatus::Ok);
    assert_eq!(unsafe { divopt_solution_value(s, 1.0, 3, &mut v) }, DivoptStatus::InvalidArgument);
    assert_eq!(unsafe { divopt_solution_value(s, f64::NAN, 0, &mut v) }, DivoptStatus::InvalidArgument);

    let mut e = DivoptEstimate::default();
    assert_eq!(unsafe { divopt_simulate_pair(p, 3.0, 1.0, 0.2, 1.0, 0, 1, &mut e) }, DivoptStatus::Simulation);

    unsafe {
        divopt_solution_free(s);
        divopt_problem_free(p);
        divopt_solution_free(ptr::null_mut());
        divopt_problem_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    let mut p = ptr::null_mut();
    unsafe { divopt_problem_new(1.0, -1.0, 0.0, ptr::null(), ptr::null(), 0, 1.0, 0.2, &mut p) };
    let here = last_error();
    assert!(here.contains("sigma"));
    let there = std::thread::spawn(last_error).join().unwrap();
    assert!(there.is_empty());
}

#[test]
fn simulation_is_deterministic_and_close() {
    let p = reference();
    let run = |seed| {
        let mut e = DivoptEstimate::default();
        assert_eq!(unsafe { divopt_simulate_pair(p, 3.2, 1.5, 0.2, 2.0, 50_000, seed, &mut e) }, DivoptStatus::Ok);
        e
    };
    let (a, b) = (run(3), run(3));
    assert_eq!(a, b);
    let mut v = 0.0;
    unsafe { divopt_pair_value(p, 3.2, 1.5, 0.2, 2.0, &mut v) };
    assert!(((a.mean - v) / a.std_error).abs() < 3.0, "{a:?} vs {v}");
    unsafe { divopt_problem_free(p) };
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(divopt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
