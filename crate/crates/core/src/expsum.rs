//! Finite sums `sum_j c_j t^{k_j} e^{r_j t}` in a local coordinate
//! `t = x - origin`, identically zero for `x < origin`.
//!
//! Every scale function of the mixed-exponential model, and everything built
//! from them (antiderivatives, derivatives, shifted copies, convolutions), is
//! of this form, so the value functions are carried around in closed form.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Merged coefficients below this fraction of their summed magnitudes are dropped.
pub const PRUNE_REL: f64 = 1e-14;
/// Rates closer than this are treated as equal.
pub const RATE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub rate: f64,
    pub power: u32,
}

impl Term {
    pub fn new(coef: f64, rate: f64, power: u32) -> Self {
        Term { coef, rate, power }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpSum {
    origin: f64,
    terms: Vec<Term>,
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

fn falling(n: u32, j: u32) -> f64 {
    (0..j).map(|i| (n - i) as f64).product()
}

/// `int_0^t s^n e^{rate s} ds` as terms in `t`.
fn integral_terms(n: u32, rate: f64, out: &mut Vec<Term>, scale: f64) {
    if rate.abs() < RATE_TOL {
        out.push(Term::new(scale / (n + 1) as f64, 0.0, n + 1));
        return;
    }
    // e^{rt} sum_j (-1)^j n!/(n-j)! t^{n-j} / r^{j+1}  -  (-1)^n n! / r^{n+1}
    for j in 0..=n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * falling(n, j) / rate.powi(j as i32 + 1);
        out.push(Term::new(scale * c, rate, n - j));
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    out.push(Term::new(-scale * sign * falling(n, n) / rate.powi(n as i32 + 1), 0.0, 0));
}

impl ExpSum {
    pub fn new(origin: f64, terms: Vec<Term>) -> Self {
        let mut s = ExpSum { origin, terms };
        s.simplify();
        s
    }

    pub fn zero(origin: f64) -> Self {
        ExpSum { origin, terms: Vec::new() }
    }

    /// `coef * e^{rate x}` on `[0, inf)`.
    pub fn exponential(coef: f64, rate: f64) -> Self {
        ExpSum::new(0.0, vec![Term::new(coef, rate, 0)])
    }

    pub fn constant(origin: f64, value: f64) -> Self {
        ExpSum::new(origin, vec![Term::new(value, 0.0, 0)])
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest exponential rate present, if any.
    pub fn max_rate(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.rate).fold(None, |m, r| Some(m.map_or(r, |m: f64| m.max(r))))
    }

    /// Merges equal (rate, power) pairs. A merged coefficient that is only
    /// rounding residue of its contributions is dropped.
    fn simplify(&mut self) {
        self.terms.retain(|t| t.coef != 0.0);
        self.terms.sort_by(|a, b| {
            a.power
                .cmp(&b.power)
                .then(a.rate.partial_cmp(&b.rate).unwrap_or(std::cmp::Ordering::Equal))
        });
        let mut merged: Vec<(Term, f64)> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some((last, mass)) if last.power == t.power && (last.rate - t.rate).abs() < RATE_TOL => {
                    last.coef += t.coef;
                    *mass += t.coef.abs();
                }
                _ => merged.push((t, t.coef.abs())),
            }
        }
        self.terms = merged
            .into_iter()
            .filter(|(t, mass)| t.coef != 0.0 && t.coef.abs() >= PRUNE_REL * mass)
            .map(|(t, _)| t)
            .collect();
    }

    /// Value at `x`; zero below the origin.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.origin {
            return 0.0;
        }
        self.eval_local(x - self.origin)
    }

    /// Value at local coordinate `t >= 0`, evaluated as
    /// `e^{r_max t} sum_j c_j t^k e^{(r_j - r_max) t}` so large positive rates
    /// do not overflow before the final scaling.
    pub fn eval_local(&self, t: f64) -> f64 {
        let Some(rmax) = self.max_rate() else {
            return 0.0;
        };
        let shift = if rmax > 0.0 { rmax } else { 0.0 };
        let mut sum = 0.0;
        for term in &self.terms {
            let poly = if term.power == 0 { 1.0 } else { t.powi(term.power as i32) };
            sum += term.coef * poly * ((term.rate - shift) * t).exp();
        }
        if shift > 0.0 {
            sum * (shift * t).exp()
        } else {
            sum
        }
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.rate != 0.0 {
                out.push(Term::new(t.coef * t.rate, t.rate, t.power));
            }
            if t.power > 0 {
                out.push(Term::new(t.coef * t.power as f64, t.rate, t.power - 1));
            }
        }
        ExpSum::new(self.origin, out)
    }

    pub fn nth_derivative(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.derivative())
    }

    /// `F(x) = constant + int_origin^x f`, same origin.
    pub fn antiderivative(&self, constant: f64) -> Self {
        let mut out = vec![Term::new(constant, 0.0, 0)];
        for t in &self.terms {
            integral_terms(t.power, t.rate, &mut out, t.coef);
        }
        ExpSum::new(self.origin, out)
    }

    /// `x -> f(x - shift)`.
    pub fn translate(&self, shift: f64) -> Self {
        ExpSum { origin: self.origin + shift, terms: self.terms.clone() }
    }

    /// Same function restricted to `[new_origin, inf)`, re-expressed in the
    /// coordinate `t = x - new_origin`. Requires `new_origin >= origin`.
    pub fn rebase(&self, new_origin: f64) -> Self {
        assert!(new_origin >= self.origin, "rebase must move the origin forward");
        let d = new_origin - self.origin;
        if d == 0.0 {
            return self.clone();
        }
        let mut out = Vec::new();
        for t in &self.terms {
            let base = t.coef * (t.rate * d).exp();
            for i in 0..=t.power {
                let c = base * binomial(t.power, i) * d.powi((t.power - i) as i32);
                out.push(Term::new(c, t.rate, i));
            }
        }
        ExpSum::new(new_origin, out)
    }

    /// Removes every term whose rate is within `RATE_TOL` of `rate`.
    pub fn drop_rate(&self, rate: f64) -> Self {
        ExpSum {
            origin: self.origin,
            terms: self.terms.iter().copied().filter(|t| (t.rate - rate).abs() >= RATE_TOL).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        ExpSum::new(
            self.origin,
            self.terms.iter().map(|t| Term::new(a * t.coef, t.rate, t.power)).collect(),
        )
    }

    /// Multiplies by `e^{theta t}` in local coordinates.
    pub fn tilt(&self, theta: f64) -> Self {
        ExpSum::new(
            self.origin,
            self.terms.iter().map(|t| Term::new(t.coef, t.rate + theta, t.power)).collect(),
        )
    }

    fn combine(&self, other: &ExpSum, sign: f64) -> Self {
        assert!(
            self.origin == other.origin,
            "cannot add ExpSums with origins {} and {}; rebase first",
            self.origin,
            other.origin
        );
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| Term::new(sign * t.coef, t.rate, t.power)));
        ExpSum::new(self.origin, terms)
    }

    /// `(f * g)(x) = int f(x - y) g(y) dy`; the result starts at the sum of
    /// both origins. Equal rates produce polynomial-weighted terms. Rates that
    /// are close but not equal give coefficients of size `|r_f - r_g|^{-k-1}`
    /// that cancel for small arguments, so accuracy degrades there.
    pub fn convolve(&self, other: &ExpSum) -> Self {
        let mut out = Vec::new();
        for f in &self.terms {
            for g in &other.terms {
                // int_0^t (t-s)^k e^{a(t-s)} s^m e^{b s} ds
                //   = e^{a t} sum_i C(k,i) (-1)^i t^{k-i} int_0^t s^{m+i} e^{(b-a)s} ds
                let (k, m) = (f.power, g.power);
                let rel = g.rate - f.rate;
                for i in 0..=k {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    let scale = f.coef * g.coef * binomial(k, i) * sign;
                    let mut inner = Vec::new();
                    integral_terms(m + i, rel, &mut inner, scale);
                    for t in inner {
                        let rate = if rel.abs() < RATE_TOL { f.rate } else { t.rate + f.rate };
                        out.push(Term::new(t.coef, rate, t.power + (k - i)));
                    }
                }
            }
        }
        ExpSum::new(self.origin + other.origin, out)
    }
}

impl Add for &ExpSum {
    type Output = ExpSum;
    fn add(self, rhs: &ExpSum) -> ExpSum {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &ExpSum {
    type Output = ExpSum;
    fn sub(self, rhs: &ExpSum) -> ExpSum {
        self.combine(rhs, -1.0)
    }
}

impl Mul<f64> for &ExpSum {
    type Output = ExpSum;
    fn mul(self, rhs: f64) -> ExpSum {
        self.scale(rhs)
    }
}

impl Neg for &ExpSum {
    type Output = ExpSum;
    fn neg(self) -> ExpSum {
        self.scale(-1.0)
    }
}

impl fmt::Display for ExpSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let t = if self.origin == 0.0 { "x".to_string() } else { format!("(x - {})", self.origin) };
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{:e}", term.coef)?;
            if term.power > 0 {
                write!(f, "·{t}^{}", term.power)?;
            }
            if term.rate != 0.0 {
                write!(f, "·exp({:e}·{t})", term.rate)?;
            }
        }
        Ok(())
    }
}
