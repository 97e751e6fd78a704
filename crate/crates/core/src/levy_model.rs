//! Surplus process: drift, Brownian noise and downward jumps whose sizes follow
//! a finite mixture of exponentials.
//!
//! The Laplace exponent is
//!
//! ```text
//! psi(theta) = c theta + sigma^2 theta^2 / 2 + lambda * sum_i p_i beta_i / (beta_i + theta) - lambda
//! ```
//!
//! which is rational in `theta` with simple poles at `-beta_i`. Every jump
//! density of this class is completely monotone.

use crate::error::{Error, Result};

/// Relative separation below which two exponential rates count as duplicates.
const DUPLICATE_RATE_TOL: f64 = 1e-9;

/// One exponential phase of the jump-size mixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpPhase {
    pub weight: f64,
    pub rate: f64,
}

impl JumpPhase {
    pub fn new(weight: f64, rate: f64) -> Self {
        JumpPhase { weight, rate }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevyModel {
    c: f64,
    sigma: f64,
    lambda: f64,
    mixture: Vec<JumpPhase>,
}

/// Mean and variance of the unit-time increment, plus the claim-size ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelMoments {
    pub mu: f64,
    pub varsigma2: f64,
    /// `beta_1 / beta_2`; 1 when there are fewer than two phases.
    pub m_ratio: f64,
}

impl LevyModel {
    /// Validates and builds a model. With `lambda == 0` the mixture is
    /// irrelevant and is dropped.
    pub fn new(c: f64, sigma: f64, lambda: f64, mixture: Vec<JumpPhase>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidModel(msg.to_string()));
        if !c.is_finite() || !sigma.is_finite() || !lambda.is_finite() {
            return bad("parameters must be finite");
        }
        if sigma < 0.0 {
            return bad("sigma must be nonnegative");
        }
        if lambda < 0.0 {
            return bad("lambda must be nonnegative");
        }
        if sigma == 0.0 && lambda == 0.0 {
            return bad("sigma = 0 and lambda = 0 gives a monotone path");
        }
        if sigma == 0.0 && c <= 0.0 {
            return bad("sigma = 0 requires c > 0, otherwise the path is monotone");
        }
        let mixture = if lambda == 0.0 { Vec::new() } else { mixture };
        if lambda > 0.0 {
            if mixture.is_empty() {
                return bad("lambda > 0 requires at least one jump phase");
            }
            let mut total = 0.0;
            for (i, ph) in mixture.iter().enumerate() {
                if !(ph.weight.is_finite() && ph.weight > 0.0) {
                    return Err(Error::InvalidModel(format!("weight p{} must be positive", i + 1)));
                }
                if !(ph.rate.is_finite() && ph.rate > 0.0) {
                    return Err(Error::InvalidModel(format!("rate beta{} must be positive", i + 1)));
                }
                total += ph.weight;
            }
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidModel(format!("mixture weights sum to {total}, expected 1")));
            }
            for i in 0..mixture.len() {
                for j in (i + 1)..mixture.len() {
                    let (a, b) = (mixture[i].rate, mixture[j].rate);
                    if (a - b).abs() <= DUPLICATE_RATE_TOL * a.max(b) {
                        return Err(Error::InvalidModel(format!(
                            "beta{} and beta{} coincide; merge the weights instead",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(LevyModel { c, sigma, lambda, mixture })
    }

    /// Two-phase reference model: c = 11, sigma = 1, lambda = 10,
    /// p = (0.9, 0.1), beta = (1.9, 0.19). Net drift 1.
    pub fn reference() -> Self {
        LevyModel::new(
            11.0,
            1.0,
            10.0,
            vec![JumpPhase::new(0.9, 1.9), JumpPhase::new(0.1, 0.19)],
        )
        .expect("reference model is valid")
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mixture(&self) -> &[JumpPhase] {
        &self.mixture
    }

    /// Unbounded variation iff there is a Brownian component.
    pub fn has_diffusion(&self) -> bool {
        self.sigma > 0.0
    }

    /// Jump rates sorted ascending.
    pub fn sorted_rates(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.mixture.iter().map(|p| p.rate).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        r
    }

    /// psi on the nonnegative half line.
    pub fn laplace_exponent(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) {
            return Err(Error::Domain(format!("laplace exponent needs theta >= 0, got {theta}")));
        }
        Ok(self.psi(theta))
    }

    pub fn laplace_exponent_derivative(&self, theta: f64) -> Result<f64> {
        if self.mixture.iter().any(|p| theta == -p.rate) {
            return Err(Error::Domain(format!("theta = {theta} is a pole of psi")));
        }
        let min_rate = self.mixture.iter().map(|p| p.rate).fold(f64::INFINITY, f64::min);
        if !(theta > -min_rate) {
            return Err(Error::Domain(format!(
                "derivative requires theta > -min beta = {}",
                -min_rate
            )));
        }
        Ok(self.psi_prime(theta))
    }

    /// Analytic continuation of psi to every theta that is not a pole.
    pub(crate) fn psi(&self, theta: f64) -> f64 {
        // sum p (beta / (beta + theta) - 1), written so psi(0) is exactly 0
        let jumps: f64 = self
            .mixture
            .iter()
            .map(|p| p.weight * theta / (p.rate + theta))
            .sum();
        let jump_part = if self.lambda > 0.0 { -self.lambda * jumps } else { 0.0 };
        self.c * theta + 0.5 * self.sigma * self.sigma * theta * theta + jump_part
    }

    pub(crate) fn psi_prime(&self, theta: f64) -> f64 {
        let jumps: f64 = self
            .mixture
            .iter()
            .map(|p| {
                let d = p.rate + theta;
                p.weight * p.rate / (d * d)
            })
            .sum();
        self.c + self.sigma * self.sigma * theta - self.lambda * jumps
    }

    pub fn moments(&self) -> ModelMoments {
        let mean_claim: f64 = self.mixture.iter().map(|p| p.weight / p.rate).sum();
        let second: f64 = self.mixture.iter().map(|p| 2.0 * p.weight / (p.rate * p.rate)).sum();
        let m_ratio = if self.mixture.len() >= 2 {
            self.mixture[0].rate / self.mixture[1].rate
        } else {
            1.0
        };
        ModelMoments {
            mu: self.c - self.lambda * mean_claim,
            varsigma2: self.sigma * self.sigma + self.lambda * second,
            m_ratio,
        }
    }

    /// Mean jump size `sum_i p_i / beta_i`.
    pub fn mean_claim(&self) -> f64 {
        self.mixture.iter().map(|p| p.weight / p.rate).sum()
    }
}

/// Folds a proportional cost `rho` into the fixed cost.
///
/// Paying `xi` under costs `rho * xi + kappa` nets `(1 - rho)(xi - kappa / (1 - rho))`,
/// so the problem is the fixed-cost problem with `kappa / (1 - rho)` and the
/// value scaled by `1 - rho`. Barriers are unchanged. Returns
/// `(kappa_eff, value_scale)`.
pub fn reduce_proportional_cost(kappa: f64, rho: f64) -> Result<(f64, f64)> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be nonnegative, got {kappa}")));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [0, 1), got {rho}")));
    }
    let scale = 1.0 - rho;
    Ok((kappa / scale, scale))
}
