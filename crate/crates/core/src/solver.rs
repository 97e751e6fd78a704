//! Optimal barriers: `b_bar`, `b*`, the smooth upper barrier for a given lower
//! barrier, the optimal pair, and a numerical check of the HJB inequality.

use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::quad::integrate;
use crate::roots::{bisect, count_sign_changes, expand_until};
use crate::scale::ScaleSets;
use crate::value::{gamma_condition, gamma_condition_dg, lower_coefficient, value_bubl, BarrierPair, PiecewiseValue};

/// Cap on bracket expansion for `b*` and the smooth gap.
pub const B_MAX: f64 = 200.0;
/// Cap on the search for the inflection point of `W_delta`.
pub const B_BAR_MAX: f64 = 100.0;
/// `Z''(0)` above `-Z_TIE` counts as nonnegative, giving `b* = 0`.
pub const Z_TIE: f64 = 1e-12;

const GAP_SCAN: usize = 2000;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// `|W''_delta(b_bar)|`
    pub b_bar_residual: f64,
    /// `|h(b*)|`
    pub b_star_residual: f64,
    /// `|Gamma_{b_l*}(b_u* - b_l*)|`
    pub gamma_residual: f64,
    /// `|G(b_l*) - 1|` (zero in the liquidation regime)
    pub g_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierSolution {
    pub b_star: f64,
    pub b_bar: f64,
    pub b_u_star: f64,
    pub b_l_star: f64,
    pub kappa: f64,
    /// `b_l* = 0` because the smooth pair from 0 already has `V'(0) <= 1`.
    pub liquidation: bool,
    pub diagnostics: Diagnostics,
}

impl BarrierSolution {
    pub fn pair(&self) -> BarrierPair {
        BarrierPair { b_u: self.b_u_star, b_l: self.b_l_star, kappa: self.kappa }
    }

    pub fn value(&self, sets: &ScaleSets) -> Result<PiecewiseValue> {
        value_bubl(sets, &self.pair())
    }
}

/// Inflection point of `W_delta`: 0 if `W''_delta(0+) >= 0`, else the root of `W''_delta`.
pub fn find_b_bar(sets: &ScaleSets) -> Result<f64> {
    let w2 = &sets.lower.w_d2;
    if w2.eval(0.0) >= 0.0 {
        return Ok(0.0);
    }
    // W''' > 0, so the sign of W'' changes at most once; scale by e^{-phi x}
    // to keep the objective bounded
    let phi = sets.lower.phi;
    let f = |x: f64| (-phi * x).exp() * w2.eval(x);
    let hi = expand_until(f, 0.0, 0.5, B_BAR_MAX, true)
        .map_err(|_| Error::Solver(format!("W''_delta has no sign change on [0, {B_BAR_MAX}]")))?;
    bisect(f, 0.0, hi)
}

/// Optimal periodic barrier without costs: 0 if `Z''(0) >= 0`, else the root of `h`.
pub fn find_b_star(sets: &ScaleSets) -> Result<f64> {
    if sets.z_d2.eval(0.0) >= -Z_TIE {
        return Ok(0.0);
    }
    let hi = expand_until(|x| sets.h(x), 0.0, 0.5, B_MAX, true)
        .map_err(|_| Error::Solver(format!("h has no sign change on [0, {B_MAX}]")))?;
    bisect(|x| sets.h(x), 0.0, hi)
}

fn gamma_scale(sets: &ScaleSets, b_l: f64, g: f64, kappa: f64) -> f64 {
    1.0 + ((g - kappa) * sets.z_d1.eval(b_l + g)).abs() + sets.gamma / sets.phi() * sets.lower.w(b_l + g).abs()
}

/// Upper barrier `b_u = b_l + g` with `Gamma_{b_l}(g) = 0`, `g > kappa`.
pub fn solve_bu_given_bl(sets: &ScaleSets, b_l: f64, kappa: f64) -> Result<f64> {
    if !(b_l >= 0.0) || !b_l.is_finite() {
        return Err(Error::Domain(format!("b_l must be nonnegative, got {b_l}")));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let f = |g: f64| gamma_condition(sets, b_l, g, kappa);
    let left = f(kappa);
    if !(left < 0.0) {
        return Err(Error::Solver(format!("Gamma(kappa) = {left:e} is not negative at b_l = {b_l}")));
    }
    let span = expand_until(|g| f(kappa + g), 0.0, 0.25, B_MAX, true)
        .map_err(|_| Error::Solver(format!("Gamma_{{b_l}} stays negative up to g = {B_MAX} (b_l = {b_l})")))?;
    let hi = kappa + span;
    let changes = count_sign_changes(f, kappa, hi, GAP_SCAN);
    if changes > 1 {
        return Err(Error::Solver(format!("Gamma_{{b_l}} changes sign {changes} times on [{kappa}, {hi}]")));
    }
    let g = bisect(f, kappa, hi)?;
    let res = f(g).abs();
    if res > 1e-11 * gamma_scale(sets, b_l, g, kappa) {
        return Err(Error::Solver(format!("smoothness residual {res:e} at b_l = {b_l}")));
    }
    if !(gamma_condition_dg(sets, b_l, g, kappa) > 0.0) {
        return Err(Error::Solver(format!("Gamma_{{b_l}} is not increasing at its root g = {g}")));
    }
    Ok(b_l + g)
}

/// `G(b_l) = V'(b_l)` for the smooth pair `(b_u(b_l), b_l)`, with the `b_u` used.
pub fn g_function(sets: &ScaleSets, b_l: f64, kappa: f64) -> Result<(f64, f64)> {
    let b_u = solve_bu_given_bl(sets, b_l, kappa)?;
    let c = lower_coefficient(sets, &BarrierPair { b_u, b_l, kappa })?;
    Ok((c * sets.lower.w_d1.eval(b_l), b_u))
}

/// Optimal `(b_u*, b_l*)` for fixed cost `kappa`.
pub fn solve_optimal(sets: &ScaleSets, kappa: f64) -> Result<BarrierSolution> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let b_bar = find_b_bar(sets)?;
    let b_star = find_b_star(sets)?;
    let mut diagnostics = Diagnostics {
        b_bar_residual: if b_bar > 0.0 { sets.lower.w_d2.eval(b_bar).abs() } else { 0.0 },
        b_star_residual: if b_star > 0.0 { sets.h(b_star).abs() } else { 0.0 },
        ..Diagnostics::default()
    };

    let (g0, bu0) = g_function(sets, 0.0, kappa)?;
    let (b_l, b_u, liquidation) = if g0 <= 1.0 {
        (0.0, bu0, true)
    } else {
        let (g_end, _) = g_function(sets, b_star, kappa)?;
        if g_end >= 1.0 {
            return Err(Error::Solver(format!("G(b*) = {g_end} is not below 1")));
        }
        let obj = |bl: f64| g_function(sets, bl, kappa).map(|(g, _)| g - 1.0).unwrap_or(f64::NAN);
        let b_l = bisect(obj, 0.0, b_star)?;
        let (g, b_u) = g_function(sets, b_l, kappa)?;
        diagnostics.g_residual = (g - 1.0).abs();
        if diagnostics.g_residual > 1e-9 {
            return Err(Error::Solver(format!("G(b_l*) - 1 = {:e}", g - 1.0)));
        }
        (b_l, b_u, false)
    };
    diagnostics.gamma_residual = gamma_condition(sets, b_l, b_u - b_l, kappa).abs();

    let sol = BarrierSolution { b_star, b_bar, b_u_star: b_u, b_l_star: b_l, kappa, liquidation, diagnostics };
    check_solution(sets, &sol)?;
    Ok(sol)
}

fn check_solution(sets: &ScaleSets, s: &BarrierSolution) -> Result<()> {
    let fail = |what: &str| Err(Error::Solver(format!("solution violates {what}: {s:?}")));
    if s.b_l_star > 0.0 && !(s.b_l_star < s.b_star) {
        return fail("b_l* < b*");
    }
    if !(s.b_u_star > s.b_star) {
        return fail("b_u* > b*");
    }
    if s.b_star > 0.0 && s.b_star > s.b_bar + 1e-9 {
        return fail("b* <= b_bar");
    }
    if !(s.b_u_star - s.b_l_star >= s.kappa) {
        return fail("b_u* - b_l* >= kappa");
    }
    if !(sets.z_d2.eval(s.b_u_star) > 0.0) {
        return fail("Z''(b_u*) > 0");
    }
    Ok(())
}

/// One grid point of the HJB check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HjbPoint {
    pub x: f64,
    pub value: f64,
    /// `(L - delta) V(x) + gamma max_l [(l - kappa) 1_{l > 0} + V(x - l) - V(x)]`
    pub expression: f64,
    /// Payment `l` attaining the inner maximum.
    pub maximizer: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HjbReport {
    pub points: Vec<HjbPoint>,
    /// `max_x expression / (1 + |V(x)|)`; `<= 1e-6` passes.
    pub max_violation: f64,
    /// `max_x |expression| / (1 + |V(x)|)`
    pub max_abs_residual: f64,
}

impl HjbReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

fn generator_jump_integral(model: &LevyModel, v: &PiecewiseValue, x: f64) -> Result<f64> {
    if model.lambda() == 0.0 || x <= 0.0 {
        return Ok(0.0);
    }
    let density = |z: f64| -> f64 { model.mixture().iter().map(|p| p.weight * p.rate * (-p.rate * z).exp()).sum() };
    let f = |z: f64| v.eval(x - z) * density(z);
    let kink = x - v.split;
    if kink > 0.0 && kink < x {
        Ok(integrate(f, 0.0, kink, 1e-14, 1e-12)? + integrate(f, kink, x, 1e-14, 1e-12)?)
    } else {
        integrate(f, 0.0, x, 1e-14, 1e-12)
    }
}

/// `(L - delta) V(x)` with `LV = c V' + sigma^2/2 V'' + lambda int_0^x V(x - z) f(z) dz - lambda V(x)`.
pub fn generator(sets: &ScaleSets, v: &PiecewiseValue, x: f64) -> Result<f64> {
    let m = sets.model();
    let jumps = generator_jump_integral(m, v, x)?;
    Ok(m.c() * v.derivative(x, 1)? + 0.5 * m.sigma() * m.sigma() * v.derivative(x, 2)? + m.lambda() * jumps
        - (m.lambda() + sets.delta) * v.eval(x))
}

fn payment_gain(v: &PiecewiseValue, kappa: f64, x: f64, l: f64) -> f64 {
    let fee = if l > 0.0 { l - kappa } else { 0.0 };
    fee + v.eval(x - l) - v.eval(x)
}

/// Maximizes the payment gain over `l in [0, x]`: coarse scan, golden-section
/// refinement around the best cell, and the candidates `0`, `x - b_l`, `x`.
fn best_payment(v: &PiecewiseValue, kappa: f64, b_l: f64, x: f64) -> (f64, f64) {
    let gain = |l: f64| payment_gain(v, kappa, x, l);
    let mut best = (gain(0.0), 0.0);
    let consider = |l: f64, best: &mut (f64, f64)| {
        if (0.0..=x).contains(&l) {
            let g = gain(l);
            if g > best.0 {
                *best = (g, l);
            }
        }
    };
    consider(x, &mut best);
    consider(x - b_l, &mut best);
    if x <= 0.0 {
        return best;
    }
    const N: usize = 64;
    let step = x / N as f64;
    let mut k_best = 1;
    let mut g_best = f64::NEG_INFINITY;
    for k in 1..=N {
        let g = gain(k as f64 * step);
        if g > g_best {
            g_best = g;
            k_best = k;
        }
    }
    let (mut a, mut b) = (((k_best - 1) as f64 * step).max(1e-300), (k_best as f64 * step).min(x));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (gain(c), gain(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (1.0 + x) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = gain(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = gain(d);
        }
    }
    consider(0.5 * (a + b), &mut best);
    consider(k_best as f64 * step, &mut best);
    best
}

/// Evaluates the HJB expression for the value of `solution` on `x_grid`.
pub fn verify_hjb(sets: &ScaleSets, solution: &BarrierSolution, x_grid: &[f64]) -> Result<HjbReport> {
    let v = solution.value(sets)?;
    let mut points = Vec::with_capacity(x_grid.len());
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_abs = 0.0f64;
    for &x in x_grid {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("HJB grid point {x} is negative")));
        }
        let lv = generator(sets, &v, x)?;
        let (gain, l) = best_payment(&v, solution.kappa, solution.b_l_star, x);
        let expression = lv + sets.gamma * gain;
        let value = v.eval(x);
        let scaled = expression / (1.0 + value.abs());
        max_violation = max_violation.max(scaled);
        max_abs = max_abs.max(scaled.abs());
        points.push(HjbPoint { x, value, expression, maximizer: l });
    }
    Ok(HjbReport { points, max_violation, max_abs_residual: max_abs })
}
