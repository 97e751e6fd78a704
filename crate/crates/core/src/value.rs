//! Value functions of periodic `(b_u, b_l)` strategies and of periodic barrier
//! strategies without costs.

use crate::error::{Error, Result};
use crate::expsum::ExpSum;
use crate::scale::ScaleSets;

/// At each decision time, if the surplus is at least `b_u`, pay it down to `b_l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierPair {
    pub b_u: f64,
    pub b_l: f64,
    pub kappa: f64,
}

impl BarrierPair {
    /// Requires `0 <= b_l <= b_u` and `b_u - b_l >= kappa >= 0`. A zero cost is
    /// accepted so that the periodic barrier strategy is the pair `(b, b, 0)`.
    pub fn new(b_u: f64, b_l: f64, kappa: f64) -> Result<Self> {
        if !(b_l >= 0.0) || !b_u.is_finite() || !(b_u >= b_l) {
            return Err(Error::InvalidPair(format!("need 0 <= b_l <= b_u, got b_u = {b_u}, b_l = {b_l}")));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidPair(format!("kappa must be nonnegative, got {kappa}")));
        }
        if !gap_covers_cost(b_u, b_l, kappa) {
            return Err(Error::InvalidPair(format!(
                "inadmissible pair: b_u - b_l = {} < kappa = {kappa}",
                b_u - b_l
            )));
        }
        Ok(BarrierPair { b_u, b_l, kappa })
    }

    pub fn gap(&self) -> f64 {
        self.b_u - self.b_l
    }
}

/// `b_u - b_l >= kappa`, forgiving the rounding of the subtraction so that
/// pairs built as `(b_l + kappa, b_l)` are accepted.
pub(crate) fn gap_covers_cost(b_u: f64, b_l: f64, kappa: f64) -> bool {
    b_u - b_l >= kappa - 4.0 * f64::EPSILON * b_u.abs().max(1.0)
}

/// `V(x)`: zero below 0, `C W_delta(x)` on `[0, b_u)`, closed form on `[b_u, inf)`.
#[derive(Clone, Debug)]
pub struct PiecewiseValue {
    pub lower: ExpSum,
    pub upper: ExpSum,
    pub split: f64,
    pub coef: f64,
    lower_d: [ExpSum; 2],
    upper_d: [ExpSum; 2],
}

impl PiecewiseValue {
    fn new(lower: ExpSum, upper: ExpSum, split: f64, coef: f64) -> Self {
        let l1 = lower.derivative();
        let l2 = l1.derivative();
        let u1 = upper.derivative();
        let u2 = u1.derivative();
        PiecewiseValue { lower, upper, split, coef, lower_d: [l1, l2], upper_d: [u1, u2] }
    }

    /// `V(x)`. Values are nonnegative; rounding residue below zero near
    /// `x = 0` is clamped.
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x < self.split {
            self.lower.eval(x).max(0.0)
        } else {
            self.upper.eval(x)
        }
    }

    /// Derivative of order 1 or 2. At `x = b_u` the right derivative is returned.
    pub fn derivative(&self, x: f64, order: u32) -> Result<f64> {
        self.branch_derivative(x, order, x >= self.split)
    }

    /// Derivative from the left at `x` (differs from [`Self::derivative`] only at `b_u`).
    pub fn left_derivative(&self, x: f64, order: u32) -> Result<f64> {
        self.branch_derivative(x, order, x > self.split)
    }

    /// `V(b_u-)`, the limit of the lower branch.
    pub fn left_limit(&self) -> f64 {
        self.lower.eval(self.split)
    }

    fn branch_derivative(&self, x: f64, order: u32, upper: bool) -> Result<f64> {
        if !(1..=2).contains(&order) {
            return Err(Error::Domain(format!("derivative order {order} unsupported (1 or 2)")));
        }
        if x < 0.0 {
            return Ok(0.0);
        }
        let idx = order as usize - 1;
        Ok(if upper { self.upper_d[idx].eval(x) } else { self.lower_d[idx].eval(x) })
    }
}

/// Coefficient of the lower branch, `gamma (1/phi + g - kappa) / (phi Z(b_u) - gamma W_delta(b_l))`.
pub fn lower_coefficient(sets: &ScaleSets, pair: &BarrierPair) -> Result<f64> {
    let phi = sets.phi();
    let denom = phi * sets.z.eval(pair.b_u) - sets.gamma * sets.lower.w(pair.b_l);
    if !(denom > 0.0) {
        return Err(Error::InvalidPair(format!(
            "value denominator {denom:e} is not positive for b_u = {}, b_l = {}",
            pair.b_u, pair.b_l
        )));
    }
    Ok(sets.gamma * (1.0 / phi + pair.gap() - pair.kappa) / denom)
}

/// Value function of the periodic `(b_u, b_l)` strategy.
pub fn value_bubl(sets: &ScaleSets, pair: &BarrierPair) -> Result<PiecewiseValue> {
    let c = lower_coefficient(sets, pair)?;
    let gamma = sets.gamma;
    let b_u = pair.b_u;
    let lower = sets.lower.w.scale(c);

    let w_bar = sets.upper.w_bar.translate(b_u);
    let w_barbar = sets.upper.w_barbar.translate(b_u);
    let conv = sets.w_gamma_delta_b_reduced(b_u);
    let a = &conv - &w_bar.scale(gamma * sets.lower.w(pair.b_l));
    let b = &w_barbar + &w_bar.scale(pair.gap() - pair.kappa);
    // the e^{phi y} coefficient is C (phi Z(b_u) - gamma W(b_l)) / phi - gamma (1/phi + g - kappa) / phi = 0
    let upper = (&a.scale(c) - &b.scale(gamma)).drop_rate(sets.phi());
    Ok(PiecewiseValue::new(lower, upper, b_u, c))
}

/// Value of the periodic barrier strategy at level `b` with no transaction
/// cost; on `[0, b]` it is `gamma / (phi Z'(b)) W_delta(x)`.
pub fn value_barrier_no_cost(sets: &ScaleSets, b: f64) -> Result<PiecewiseValue> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("barrier must be a nonnegative number, got {b}")));
    }
    let zp = sets.z_d1.eval(b);
    if !(zp > 0.0) {
        return Err(Error::Solver(format!("Z'(b) = {zp:e} is not positive at b = {b}")));
    }
    value_bubl(sets, &BarrierPair { b_u: b, b_l: b, kappa: 0.0 })
}

/// Smoothness function
/// `Gamma_{b_l}(g) = (g - kappa) Z'(b_l + g) - (gamma/phi) (W_delta(b_l + g) - W_delta(b_l))`.
pub fn gamma_condition(sets: &ScaleSets, b_l: f64, g: f64, kappa: f64) -> f64 {
    let b_u = b_l + g;
    (g - kappa) * sets.z_d1.eval(b_u) - sets.gamma / sets.phi() * (sets.lower.w(b_u) - sets.lower.w(b_l))
}

/// `d Gamma_{b_l} / dg = (1/phi + g - kappa) Z''(b_l + g)`.
pub fn gamma_condition_dg(sets: &ScaleSets, b_l: f64, g: f64, kappa: f64) -> f64 {
    (1.0 / sets.phi() + g - kappa) * sets.z_d2.eval(b_l + g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::LevyModel;
    use crate::scale::build_scale_set;

    fn sets() -> ScaleSets {
        build_scale_set(&LevyModel::reference(), 1.0, 0.2).unwrap()
    }

    #[test]
    fn pair_validation() {
        assert!(BarrierPair::new(1.0, 0.5, 0.2).is_ok());
        assert!(BarrierPair::new(1.0, 0.9, 0.2).is_err());
        assert!(BarrierPair::new(0.5, 1.0, 0.0).is_err());
        assert!(BarrierPair::new(1.0, -0.1, 0.2).is_err());
        assert!(BarrierPair::new(1.0, 0.5, -0.2).is_err());
    }

    #[test]
    fn zero_below_origin_and_continuous_at_split() {
        let s = sets();
        let v = value_bubl(&s, &BarrierPair::new(3.0, 1.0, 0.2).unwrap()).unwrap();
        assert_eq!(v.eval(-1.0), 0.0);
        assert!(v.eval(0.0) >= 0.0 && v.eval(0.0) < 1e-12);
        assert!((v.left_limit() - v.eval(3.0)).abs() < 1e-12);
    }

    #[test]
    fn upper_branch_has_no_growing_mode() {
        let s = sets();
        let v = value_bubl(&s, &BarrierPair::new(2.5, 0.5, 0.3).unwrap()).unwrap();
        assert!(v.upper.terms().iter().all(|t| t.rate <= 1e-9));
        // asymptotic slope gamma / (gamma + delta)
        let d = v.derivative(2.5 + 150.0, 1).unwrap();
        assert!((d - 1.0 / 1.2).abs() < 1e-6);
    }

    #[test]
    fn gamma_condition_left_end_negative() {
        let s = sets();
        for &bl in &[0.0, 0.5, 2.0] {
            assert!(gamma_condition(&s, bl, 0.2, 0.2) < 0.0);
        }
        assert!(gamma_condition(&s, 0.5, 50.0, 0.2) > 0.0);
    }

    #[test]
    fn gamma_condition_derivative_matches_finite_difference() {
        let s = sets();
        for &(bl, g) in &[(0.0, 1.0), (0.7, 2.5), (1.5, 0.4)] {
            let h = 1e-5;
            let fd = (gamma_condition(&s, bl, g + h, 0.2) - gamma_condition(&s, bl, g - h, 0.2)) / (2.0 * h);
            let an = gamma_condition_dg(&s, bl, g, 0.2);
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{fd} vs {an}");
        }
    }

    #[test]
    fn derivative_order_checked() {
        let s = sets();
        let v = value_barrier_no_cost(&s, 1.0).unwrap();
        assert!(v.derivative(0.5, 3).is_err());
        assert!(v.derivative(0.5, 0).is_err());
        assert_eq!(v.derivative(-0.5, 1).unwrap(), 0.0);
    }

    #[test]
    fn no_cost_lower_branch_coefficient() {
        let s = sets();
        for &b in &[0.0, 0.8, 2.0] {
            let v = value_barrier_no_cost(&s, b).unwrap();
            let expect = s.gamma / (s.phi() * s.z_d1.eval(b));
            assert!((v.coef - expect).abs() < 1e-12 * expect);
        }
        assert!(value_barrier_no_cost(&s, -1.0).is_err());
    }
}
