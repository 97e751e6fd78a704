//! Scale functions of the mixed-exponential model in closed form.
//!
//! `1 / (psi(theta) - q)` is rational with simple poles at the real roots
//! `r_j` of `psi(theta) = q`, so `W_q(x) = sum_j e^{r_j x} / psi'(r_j)`. All
//! derived objects (integrals, tilted and convolved scale functions) follow by
//! exponential-sum calculus.

use crate::error::{Error, Result};
use crate::expsum::ExpSum;
use crate::levy_model::LevyModel;
use crate::roots::{bisect, bisect_open, expand_until};

/// Roots of `psi(theta) = q` sorted descending and their partial-fraction
/// coefficients `1 / psi'(r_j)`.
pub fn find_roots(model: &LevyModel, q: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!("discount rate must be positive, got {q}")));
    }
    let f = |t: f64| model.psi(t) - q;
    let rates = model.sorted_rates();
    let mut roots = Vec::with_capacity(rates.len() + 2);

    // positive root: f(0) = -q < 0 and f grows without bound
    let hi = expand_until(f, 0.0, 1.0, 1e12, true)?;
    roots.push(bisect(f, 0.0, hi)?);

    if rates.is_empty() && !model.has_diffusion() {
        // pure drift: no negative root
    } else if rates.is_empty() {
        // pure diffusion: one negative root
        let lo = -expand_until(|t| f(-t), 0.0, 1.0, 1e12, true)?;
        roots.push(bisect(f, lo, 0.0)?);
    } else {
        // f -> +inf just right of each pole, -inf just left of it
        roots.push(bisect_open(f, -rates[0], 0.0, true)?);
        for k in 0..rates.len() - 1 {
            roots.push(bisect_open(f, -rates[k + 1], -rates[k], true)?);
        }
        if model.has_diffusion() {
            let pole = -rates[rates.len() - 1];
            let lo = pole - expand_until(|t| f(pole - t), 0.0, 1.0, 1e12, true)?;
            roots.push(bisect_open(f, lo, pole, true).or_else(|_| bisect(f, lo, pole))?);
        }
    }

    let expected = rates.len() + if model.has_diffusion() { 2 } else { 1 };
    if roots.len() != expected {
        return Err(Error::Root(format!("found {} roots of psi = q, expected {expected}", roots.len())));
    }

    for r in roots.iter_mut() {
        let res = f(*r);
        let d = model.psi_prime(*r);
        let cand = *r - res / d;
        if cand.is_finite() && f(cand).abs() < res.abs() {
            *r = cand;
        }
        let res = f(*r);
        // the residual floor near a pole is |psi'| times one ulp of the root
        let floor = 4.0 * model.psi_prime(*r).abs() * f64::EPSILON * r.abs().max(1e-300);
        if res.abs() > (1e-12 * (1.0 + q)).max(floor) {
            return Err(Error::Root(format!("root {r} has residual {res:e}")));
        }
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for w in roots.windows(2) {
        if w[0] == w[1] {
            return Err(Error::Root(format!("repeated root {}", w[0])));
        }
    }
    let coefs = roots.iter().map(|&r| 1.0 / model.psi_prime(r)).collect();
    Ok((roots, coefs))
}

/// `W_q` and its calculus for one discount rate `q`.
#[derive(Clone, Debug)]
pub struct ScaleSet {
    model: LevyModel,
    pub q: f64,
    pub roots: Vec<f64>,
    pub coefs: Vec<f64>,
    /// Largest root; the right inverse of psi at `q`.
    pub phi: f64,
    pub w: ExpSum,
    pub w_d1: ExpSum,
    pub w_d2: ExpSum,
    pub w_d3: ExpSum,
    /// `int_0^x W_q`
    pub w_bar: ExpSum,
    /// `int_0^x int_0^y W_q`
    pub w_barbar: ExpSum,
}

impl ScaleSet {
    pub fn new(model: &LevyModel, q: f64) -> Result<Self> {
        let (roots, coefs) = find_roots(model, q)?;
        let w = ExpSum::new(
            0.0,
            roots
                .iter()
                .zip(&coefs)
                .map(|(&r, &a)| crate::expsum::Term::new(a, r, 0))
                .collect(),
        );
        let w_d1 = w.derivative();
        let w_d2 = w_d1.derivative();
        let w_d3 = w_d2.derivative();
        let w_bar = w.antiderivative(0.0);
        let w_barbar = w_bar.antiderivative(0.0);
        Ok(ScaleSet {
            model: model.clone(),
            q,
            phi: roots[0],
            roots,
            coefs,
            w,
            w_d1,
            w_d2,
            w_d3,
            w_bar,
            w_barbar,
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn w(&self, x: f64) -> f64 {
        self.w.eval(x)
    }

    /// `Z_q(x) = 1 + q int_0^x W_q` for `x >= 0`.
    pub fn z(&self) -> ExpSum {
        &ExpSum::constant(0.0, 1.0) + &self.w_bar.scale(self.q)
    }

    /// Tilted scale function
    /// `Z_q(x, theta) = e^{theta x} (1 - (psi(theta) - q) int_0^x e^{-theta y} W_q(y) dy)`
    /// for `x >= 0`, `theta >= 0`.
    pub fn z_tilted(&self, theta: f64) -> Result<ExpSum> {
        let gap = self.model.laplace_exponent(theta)? - self.q;
        let inner = self.w.tilt(-theta).antiderivative(0.0).tilt(theta).scale(-gap);
        Ok(&ExpSum::exponential(1.0, theta) + &inner)
    }
}

/// Everything needed for a fixed pair of decision rate `gamma` and discount
/// rate `delta`.
#[derive(Clone, Debug)]
pub struct ScaleSets {
    pub gamma: f64,
    pub delta: f64,
    /// Scale functions at `q = delta`.
    pub lower: ScaleSet,
    /// Scale functions at `q = gamma + delta`.
    pub upper: ScaleSet,
    /// `Z_{gamma,delta}(x) = gamma int_0^inf e^{-phi_{gamma+delta} u} W_delta(x + u) du`
    pub z: ExpSum,
    pub z_d1: ExpSum,
    pub z_d2: ExpSum,
    /// `h(x) = e^{-phi_{gamma+delta} x} Z''_{gamma,delta}(x)`
    pub h: ExpSum,
}

pub fn build_scale_set(model: &LevyModel, gamma: f64, delta: f64) -> Result<ScaleSets> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let lower = ScaleSet::new(model, delta)?;
    let upper = ScaleSet::new(model, gamma + delta)?;
    let phi = upper.phi;
    if !(phi > lower.phi) {
        return Err(Error::Root(format!(
            "phi(gamma+delta) = {phi} does not exceed phi(delta) = {}",
            lower.phi
        )));
    }
    let z = ExpSum::new(
        0.0,
        lower
            .roots
            .iter()
            .zip(&lower.coefs)
            .map(|(&r, &a)| crate::expsum::Term::new(gamma * a / (phi - r), r, 0))
            .collect(),
    );
    let z_d1 = z.derivative();
    let z_d2 = z_d1.derivative();
    let h = z_d2.tilt(-phi);
    Ok(ScaleSets { gamma, delta, lower, upper, z, z_d1, z_d2, h })
}

impl ScaleSets {
    pub fn model(&self) -> &LevyModel {
        self.lower.model()
    }

    /// `phi_{gamma+delta}`
    pub fn phi(&self) -> f64 {
        self.upper.phi
    }

    /// `W_{gamma,delta,b}` on `[b, inf)`:
    /// `W_delta(x) + gamma int_b^x W_{gamma+delta}(x - y) W_delta(y) dy`.
    pub fn w_gamma_delta_b_expsum(&self, b: f64) -> ExpSum {
        let tail = self.lower.w.rebase(b);
        let conv = self.upper.w.convolve(&tail).scale(self.gamma);
        &tail + &conv
    }

    /// Same function as [`Self::w_gamma_delta_b_expsum`] after the `W_delta`
    /// modes have cancelled: on `[b, inf)`, with `y = x - b`,
    /// `sum_k A_k e^{s_k y} gamma sum_j a_j e^{r_j b} / (s_k - r_j)` where
    /// `(s_k, A_k)` belong to `W_{gamma+delta}` and `(r_j, a_j)` to `W_delta`.
    pub fn w_gamma_delta_b_reduced(&self, b: f64) -> ExpSum {
        let terms = self
            .upper
            .roots
            .iter()
            .zip(&self.upper.coefs)
            .map(|(&s, &big_a)| {
                let inner: f64 = self
                    .lower
                    .roots
                    .iter()
                    .zip(&self.lower.coefs)
                    .map(|(&r, &a)| a * (r * b).exp() / (s - r))
                    .sum();
                crate::expsum::Term::new(big_a * self.gamma * inner, s, 0)
            })
            .collect();
        ExpSum::new(b, terms)
    }

    /// `W_{gamma,delta,b}(x)`; equals `W_delta(x)` for `x <= b`.
    pub fn w_gamma_delta_b(&self, b: f64, x: f64) -> f64 {
        if x <= b {
            self.lower.w(x)
        } else {
            self.w_gamma_delta_b_expsum(b).eval(x)
        }
    }

    pub fn h(&self, x: f64) -> f64 {
        self.h.eval(x)
    }
}

fn check_interval(x: f64, a: f64, b: f64) -> Result<()> {
    if !(a < b) {
        return Err(Error::Domain(format!("exit interval needs a < b, got a = {a}, b = {b}")));
    }
    if !(a <= x && x <= b) {
        return Err(Error::Domain(format!("start {x} outside [{a}, {b}]")));
    }
    Ok(())
}

/// `E_x[e^{-q tau_b^+}; tau_b^+ < tau_a^-] = W_q(x - a) / W_q(b - a)`.
pub fn two_sided_exit_up(set: &ScaleSet, x: f64, a: f64, b: f64) -> Result<f64> {
    check_interval(x, a, b)?;
    if x == b {
        return Ok(1.0);
    }
    Ok(set.w(x - a) / set.w(b - a))
}

/// `E_x[e^{-q tau_a^-}; tau_a^- < tau_b^+]` with tilt `theta`:
/// `Z_q(x - a, theta) - Z_q(b - a, theta) W_q(x - a) / W_q(b - a)`.
pub fn two_sided_exit_down(set: &ScaleSet, theta: f64, x: f64, a: f64, b: f64) -> Result<f64> {
    check_interval(x, a, b)?;
    let z = set.z_tilted(theta)?;
    let ratio = if x == b { 1.0 } else { set.w(x - a) / set.w(b - a) };
    Ok(z.eval(x - a) - z.eval(b - a) * ratio)
}
