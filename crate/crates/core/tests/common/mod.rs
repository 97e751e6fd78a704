//! Test oracles that do not share code with the library.
#![allow(dead_code)]

use divopt::{build_scale_set, LevyModel, ScaleSets};

pub fn reference_sets() -> ScaleSets {
    build_scale_set(&LevyModel::reference(), 1.0, 0.2).unwrap()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Simpson on `[a, a + len]` split into unit pieces, for integrands decaying
/// fast enough that the tail beyond `len` is negligible.
pub fn simpson_long<F: Fn(f64) -> f64>(f: F, a: f64, len: f64, per_unit: usize) -> f64 {
    let pieces = len.ceil() as usize;
    let step = len / pieces as f64;
    (0..pieces)
        .map(|k| simpson(&f, a + k as f64 * step, a + (k + 1) as f64 * step, per_unit))
        .sum()
}

pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
