//! Monte Carlo simulation of the controlled surplus process.
//!
//! Time advances from event to event (claims at rate `lambda`, decisions at
//! rate `gamma`), with the Brownian part sampled exactly over each gap. Ruin
//! between events is detected either exactly through the Brownian-bridge
//! crossing probability, or only at the points of a refinement grid of
//! step `<= dt`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::value::{gap_covers_cost, BarrierPair};

/// Bridge probabilities below this are treated as zero when deciding which
/// of two boundaries was crossed first.
const BRIDGE_EPS: f64 = 1e-12;
const MAX_BISECT_DEPTH: u32 = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monitor {
    /// Exact continuous monitoring through bridge crossing probabilities.
    Bridge,
    /// Ruin checked only at grid points of step `<= dt` and at claims.
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
    pub antithetic: bool,
    pub monitor: Monitor,
}

impl SimConfig {
    /// Horizon with `e^{-delta t_max} = 1e-6`.
    pub fn horizon_for(delta: f64) -> f64 {
        (1e6f64).ln() / delta
    }

    pub fn new(n_paths: usize, delta: f64, seed: u64) -> Self {
        SimConfig {
            n_paths,
            dt: 1e-3,
            t_max: Self::horizon_for(delta),
            seed,
            antithetic: false,
            monitor: Monitor::Bridge,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Simulation("n_paths must be at least 1".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Simulation(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::Simulation(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.antithetic && !self.n_paths.is_multiple_of(2) {
            return Err(Error::Simulation("antithetic sampling needs an even n_paths".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub n_ruined: usize,
    /// Bound on the discounted payouts lost by stopping at `t_max`.
    pub truncation_bound: f64,
}

impl SimEstimate {
    /// `(analytic - mean) / stderr`. With a zero standard error the score is 0
    /// if the two agree to rounding and infinite otherwise.
    pub fn z_score(&self, analytic: f64) -> f64 {
        let d = analytic - self.mean;
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d.abs() <= 1e-12 * (1.0 + analytic.abs()) {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    Pair(BarrierPair),
    /// Periodic barrier without costs.
    Barrier(f64),
    Never,
}

impl Strategy {
    fn pair(&self) -> Option<BarrierPair> {
        match *self {
            Strategy::Pair(p) => Some(p),
            Strategy::Barrier(b) => Some(BarrierPair { b_u: b, b_l: b, kappa: 0.0 }),
            Strategy::Never => None,
        }
    }
}

/// Path random source; the antithetic twin negates every normal draw.
struct PathRng {
    rng: ChaCha8Rng,
    sign: f64,
}

impl PathRng {
    fn new(seed: u64, stream: u64, sign: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        PathRng { rng, sign }
    }

    fn normal(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.sign * z
    }

    fn exp(&mut self, rate: f64) -> f64 {
        let e: f64 = Exp1.sample(&mut self.rng);
        e / rate
    }

    fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    fn child(&mut self) -> PathRng {
        let seed = self.rng.next_u64();
        PathRng { rng: ChaCha8Rng::seed_from_u64(seed), sign: self.sign }
    }
}

/// `P(min of a Brownian bridge from x to y over tau with variance s2 per unit time < level)`
/// for `x, y >= level`.
fn bridge_cross_below(x: f64, y: f64, level: f64, s2tau: f64) -> f64 {
    if x <= level || y <= level {
        return 1.0;
    }
    if s2tau <= 0.0 {
        return 0.0;
    }
    (-2.0 * (x - level) * (y - level) / s2tau).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Crossing {
    None,
    Down,
    Up,
}

/// Decides which of the levels `lo < hi` (either may be infinite) a Brownian
/// bridge from `x` to `y` over `tau` crosses first, subdividing by exact
/// bridge midpoints while both crossings remain possible.
#[allow(clippy::too_many_arguments)]
fn resolve_bridge(rng: &mut PathRng, sigma: f64, x: f64, y: f64, tau: f64, lo: f64, hi: f64, depth: u32) -> Crossing {
    let s2tau = sigma * sigma * tau;
    let p_down = bridge_cross_below(x, y, lo, s2tau);
    let p_up = bridge_cross_below(-x, -y, -hi, s2tau);
    if p_down <= BRIDGE_EPS && p_up <= BRIDGE_EPS {
        return Crossing::None;
    }
    if p_up <= BRIDGE_EPS || (depth >= MAX_BISECT_DEPTH && p_down >= p_up) {
        return if p_down >= 1.0 || rng.uniform() < p_down { Crossing::Down } else { Crossing::None };
    }
    if p_down <= BRIDGE_EPS || depth >= MAX_BISECT_DEPTH {
        return if p_up >= 1.0 || rng.uniform() < p_up { Crossing::Up } else { Crossing::None };
    }
    let mid = 0.5 * (x + y) + sigma * (0.25 * tau).sqrt() * rng.normal();
    match resolve_bridge(rng, sigma, x, mid, 0.5 * tau, lo, hi, depth + 1) {
        Crossing::None => resolve_bridge(rng, sigma, mid, y, 0.5 * tau, lo, hi, depth + 1),
        hit => hit,
    }
}

/// Grid monitoring: refines the gap dyadically by bridge midpoints until cells
/// are at most `dt` and reports whether any grid value is below 0. Levels are
/// drawn coarse to fine from a dedicated stream, so halving `dt` keeps every
/// coarser point and only adds the next level.
fn grid_ruined(rng: &mut PathRng, sigma: f64, x: f64, y: f64, tau: f64, dt: f64) -> bool {
    if y < 0.0 {
        return true;
    }
    if sigma == 0.0 {
        return false;
    }
    // drawn unconditionally so the path stream does not depend on dt
    let mut sub = rng.child();
    if tau <= dt {
        return false;
    }
    let levels = (tau / dt).log2().ceil() as u32;
    let mut pts = vec![x, y];
    let mut cell = tau;
    for _ in 0..levels {
        let sd = sigma * (0.25 * cell).sqrt();
        let mut next = Vec::with_capacity(2 * pts.len() - 1);
        for w in pts.windows(2) {
            let m = 0.5 * (w[0] + w[1]) + sd * sub.normal();
            if m < 0.0 {
                return true;
            }
            next.push(w[0]);
            next.push(m);
        }
        next.push(*pts.last().unwrap());
        pts = next;
        cell *= 0.5;
    }
    false
}

struct Path<'a> {
    model: &'a LevyModel,
    gamma: f64,
    delta: f64,
    cfg: &'a SimConfig,
}

fn sample_claim(model: &LevyModel, rng: &mut PathRng) -> f64 {
    let mix = model.mixture();
    let u = rng.uniform();
    let mut acc = 0.0;
    for p in &mix[..mix.len() - 1] {
        acc += p.weight;
        if u < acc {
            return rng.exp(p.rate);
        }
    }
    rng.exp(mix[mix.len() - 1].rate)
}

impl Path<'_> {
    /// Discounted net dividends of one path and whether it was ruined.
    fn run(&self, pair: &BarrierPair, x0: f64, rng: &mut PathRng) -> Result<(f64, bool)> {
        let (c, sigma, lambda) = (self.model.c(), self.model.sigma(), self.model.lambda());
        let rate = lambda + self.gamma;
        let mut x = x0;
        let mut t = 0.0;
        let mut total = 0.0;
        loop {
            let gap = rng.exp(rate);
            let remaining = self.cfg.t_max - t;
            let tau = gap.min(remaining);
            let y = x + c * tau + sigma * tau.sqrt() * rng.normal();
            if !y.is_finite() {
                return Err(Error::Simulation(format!("surplus became {y} at t = {t}")));
            }
            let ruined = match self.cfg.monitor {
                Monitor::Bridge => {
                    y < 0.0 || resolve_bridge(rng, sigma, x, y, tau, 0.0, f64::INFINITY, 0) == Crossing::Down
                }
                Monitor::Grid => grid_ruined(rng, sigma, x, y, tau, self.cfg.dt),
            };
            if ruined {
                return Ok((total, true));
            }
            t += tau;
            if gap >= remaining {
                return Ok((total, false));
            }
            if rng.uniform() * rate < lambda {
                x = y - sample_claim(self.model, rng);
                if x < 0.0 {
                    return Ok((total, true));
                }
            } else if y >= pair.b_u {
                let paid = y - pair.b_l;
                if paid > 0.0 {
                    total += (-self.delta * t).exp() * (paid - pair.kappa);
                }
                x = pair.b_l;
            } else {
                x = y;
            }
        }
    }
}

/// Neumaier-compensated mean and standard error, summed in index order.
fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let sum = |it: &mut dyn Iterator<Item = f64>| {
        let (mut s, mut comp) = (0.0f64, 0.0f64);
        for v in it {
            let t = s + v;
            comp += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
            s = t;
        }
        s + comp
    };
    let mean = sum(&mut samples.iter().copied()) / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = sum(&mut samples.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `f` over path indices (pairs when antithetic) and reduces in order.
fn estimate<F>(cfg: &SimConfig, f: F) -> Result<(f64, f64, usize)>
where
    F: Fn(&mut PathRng) -> Result<(f64, bool)> + Sync,
{
    cfg.validate()?;
    let units = if cfg.antithetic { cfg.n_paths / 2 } else { cfg.n_paths };
    let out: Vec<Result<(f64, usize)>> = (0..units as u64)
        .into_par_iter()
        .map(|i| {
            if cfg.antithetic {
                let (a, ra) = f(&mut PathRng::new(cfg.seed, i, 1.0))?;
                let (b, rb) = f(&mut PathRng::new(cfg.seed, i, -1.0))?;
                Ok((0.5 * (a + b), ra as usize + rb as usize))
            } else {
                let (a, r) = f(&mut PathRng::new(cfg.seed, i, 1.0))?;
                Ok((a, r as usize))
            }
        })
        .collect();
    let mut samples = Vec::with_capacity(units);
    let mut ruined = 0;
    for r in out {
        let (v, k) = r?;
        samples.push(v);
        ruined += k;
    }
    let (mean, se) = mean_stderr(&samples);
    Ok((mean, se, ruined))
}

/// Estimates `E_x[sum_i e^{-delta T_i} (xi_i - kappa) 1_{xi_i > 0}]` for `strategy`.
pub fn simulate_value(
    model: &LevyModel,
    gamma: f64,
    delta: f64,
    strategy: &Strategy,
    x0: f64,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    cfg.validate()?;
    if !(gamma > 0.0) || !(delta > 0.0) {
        return Err(Error::Simulation(format!("gamma and delta must be positive, got {gamma}, {delta}")));
    }
    if x0.is_nan() {
        return Err(Error::Simulation("initial surplus is NaN".into()));
    }
    let zero = SimEstimate { mean: 0.0, stderr: 0.0, n_paths: cfg.n_paths, n_ruined: 0, truncation_bound: 0.0 };
    if x0 < 0.0 {
        return Ok(SimEstimate { n_ruined: cfg.n_paths, ..zero });
    }
    let Some(pair) = strategy.pair() else {
        return Ok(zero);
    };
    if !(pair.b_l >= 0.0 && pair.b_u >= pair.b_l && pair.kappa >= 0.0 && gap_covers_cost(pair.b_u, pair.b_l, pair.kappa)) {
        return Err(Error::Simulation(format!("inadmissible strategy {pair:?}")));
    }
    let path = Path { model, gamma, delta, cfg };
    let (mean, stderr, n_ruined) = estimate(cfg, |rng| path.run(&pair, x0, rng))?;
    let scale = x0.max(pair.b_u) + (model.c().max(0.0) + model.sigma()) / delta;
    Ok(SimEstimate {
        mean,
        stderr,
        n_paths: cfg.n_paths,
        n_ruined,
        truncation_bound: (-delta * cfg.t_max).exp() * scale,
    })
}

/// Estimates `E_x[e^{-delta tau_b^+}; tau_b^+ < tau_a^-]` using an independent
/// exponential killing time of rate `delta` (no killing when `delta = 0`).
pub fn simulate_exit(model: &LevyModel, delta: f64, x0: f64, a: f64, b: f64, cfg: &SimConfig) -> Result<SimEstimate> {
    cfg.validate()?;
    if !(a < b) || !(a <= x0 && x0 <= b) {
        return Err(Error::Simulation(format!("exit problem needs a <= x0 <= b, a < b; got {a}, {x0}, {b}")));
    }
    if !(delta >= 0.0) {
        return Err(Error::Simulation(format!("delta must be nonnegative, got {delta}")));
    }
    let (c, sigma, lambda) = (model.c(), model.sigma(), model.lambda());
    let run = |rng: &mut PathRng| -> Result<(f64, bool)> {
        if x0 >= b {
            return Ok((1.0, false));
        }
        let horizon = if delta > 0.0 { rng.exp(delta).min(cfg.t_max) } else { cfg.t_max };
        let mut x = x0;
        let mut t = 0.0;
        loop {
            let gap = if lambda > 0.0 { rng.exp(lambda) } else { f64::INFINITY };
            let remaining = horizon - t;
            let tau = gap.min(remaining);
            let y = x + c * tau + sigma * tau.sqrt() * rng.normal();
            if !y.is_finite() {
                return Err(Error::Simulation(format!("surplus became {y} at t = {t}")));
            }
            let hit = if sigma > 0.0 {
                match resolve_bridge(rng, sigma, x, y, tau, a, b, 0) {
                    Crossing::None if y >= b => Crossing::Up,
                    Crossing::None if y < a => Crossing::Down,
                    h => h,
                }
            } else if y >= b {
                Crossing::Up
            } else {
                Crossing::None
            };
            match hit {
                Crossing::Up => return Ok((1.0, false)),
                Crossing::Down => return Ok((0.0, true)),
                Crossing::None => {}
            }
            t += tau;
            if gap >= remaining {
                return Ok((0.0, false));
            }
            x = y - sample_claim(model, rng);
            if x < a {
                return Ok((0.0, true));
            }
        }
    };
    let (mean, stderr, n_ruined) = estimate(cfg, run)?;
    let truncation_bound = if delta > 0.0 { (-delta * cfg.t_max).exp() } else { 0.0 };
    Ok(SimEstimate { mean, stderr, n_paths: cfg.n_paths, n_ruined, truncation_bound })
}
