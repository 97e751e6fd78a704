//! Command implementations behind the `divopt` binary. Each returns the CSV
//! text it would print.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::levy_model::{JumpPhase, LevyModel};
use crate::mc::{simulate_exit, simulate_value, Strategy};
use crate::scale::{build_scale_set, two_sided_exit_up, ScaleSets};
use crate::solver::{solve_optimal, BarrierSolution};
use crate::value::{value_bubl, BarrierPair, PiecewiseValue};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Scale sets and optimal solution for the effective fixed cost.
pub fn solve_config(cfg: &RunConfig) -> Result<(ScaleSets, BarrierSolution)> {
    let (kappa, _) = cfg.effective_cost()?;
    let sets = build_scale_set(&cfg.model, cfg.gamma, cfg.delta)?;
    let sol = solve_optimal(&sets, kappa)?;
    Ok((sets, sol))
}

/// Pair used by `value` and `simulate`: explicit if configured, else optimal.
fn chosen_pair(cfg: &RunConfig) -> Result<(ScaleSets, BarrierPair, Option<BarrierSolution>)> {
    let (kappa, _) = cfg.effective_cost()?;
    match cfg.pair {
        Some((u, l)) => {
            let sets = build_scale_set(&cfg.model, cfg.gamma, cfg.delta)?;
            Ok((sets, BarrierPair::new(u, l, kappa)?, None))
        }
        None => {
            let (sets, sol) = solve_config(cfg)?;
            Ok((sets, sol.pair(), Some(sol)))
        }
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<String> {
    let (_, s) = solve_config(cfg)?;
    let d = s.diagnostics;
    let mut out = String::from(
        "b_bar,b_star,b_u_star,b_l_star,kappa,liquidation,b_bar_residual,b_star_residual,gamma_residual,g_residual\n",
    );
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        num(s.b_bar),
        num(s.b_star),
        num(s.b_u_star),
        num(s.b_l_star),
        num(s.kappa),
        s.liquidation,
        num(d.b_bar_residual),
        num(d.b_star_residual),
        num(d.gamma_residual),
        num(d.g_residual)
    );
    Ok(out)
}

/// `x, V, V', V''` rows. Without explicit points, `x = b_u + k` for `k = 0..=40`.
pub fn cmd_value(cfg: &RunConfig, xs: Option<&[f64]>) -> Result<String> {
    let (sets, pair, _) = chosen_pair(cfg)?;
    let (_, scale) = cfg.effective_cost()?;
    let v = value_bubl(&sets, &pair)?;
    let default: Vec<f64> = (0..=40).map(|k| pair.b_u + k as f64).collect();
    let mut out = String::from("x,V,V1,V2\n");
    for &x in xs.unwrap_or(&default) {
        let (v0, v1, v2) = if x < 0.0 { (0.0, 0.0, 0.0) } else { (v.eval(x), v.derivative(x, 1)?, v.derivative(x, 2)?) };
        let _ = writeln!(out, "{},{},{},{}", num(x), num(scale * v0), num(scale * v1), num(scale * v2));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Kappa,
    Gamma,
    Sigma,
    /// Weight of the first phase with `M = beta1/beta2` and `mu` fixed.
    P1,
    /// `M = beta1/beta2` with `p1` and `mu` fixed.
    M,
    /// Weight of the first phase with `beta1` and `mu` fixed.
    P1Small,
    C,
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "kappa" => SweepParam::Kappa,
            "gamma" => SweepParam::Gamma,
            "sigma" => SweepParam::Sigma,
            "p1" => SweepParam::P1,
            "M" => SweepParam::M,
            "p1-small" => SweepParam::P1Small,
            "c" => SweepParam::C,
            _ => return Err(Error::config(format!("unknown sweep parameter '{s}' (kappa, gamma, sigma, p1, M, p1-small, c)"))),
        })
    }
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Kappa => "kappa",
            SweepParam::Gamma => "gamma",
            SweepParam::Sigma => "sigma",
            SweepParam::P1 => "p1",
            SweepParam::M => "M",
            SweepParam::P1Small => "p1-small",
            SweepParam::C => "c",
        }
    }
}

fn two_phase(model: &LevyModel) -> Result<(f64, f64, f64)> {
    match model.mixture() {
        [a, b] => Ok((a.weight, a.rate, b.rate)),
        _ => Err(Error::config("p1, M and p1-small sweeps need a two-phase mixture")),
    }
}

/// Configuration at one sweep point, re-deriving dependent parameters.
pub fn sweep_point(base: &RunConfig, param: SweepParam, value: f64) -> Result<RunConfig> {
    let mut cfg = base.clone();
    let m = &base.model;
    let rebuild = |p1: f64, b1: f64, b2: f64| {
        LevyModel::new(m.c(), m.sigma(), m.lambda(), vec![JumpPhase::new(p1, b1), JumpPhase::new(1.0 - p1, b2)])
    };
    match param {
        SweepParam::Kappa => cfg.kappa = value,
        SweepParam::Gamma => cfg.gamma = value,
        SweepParam::Sigma => cfg.model = LevyModel::new(m.c(), value, m.lambda(), m.mixture().to_vec())?,
        SweepParam::C => cfg.model = LevyModel::new(value, m.sigma(), m.lambda(), m.mixture().to_vec())?,
        SweepParam::P1 | SweepParam::M => {
            let (p1, b1, b2) = two_phase(m)?;
            let mean = m.mean_claim();
            let (p1, ratio) = if param == SweepParam::P1 { (value, b1 / b2) } else { (p1, value) };
            let beta1 = (p1 + (1.0 - p1) * ratio) / mean;
            cfg.model = rebuild(p1, beta1, beta1 / ratio)?;
        }
        SweepParam::P1Small => {
            let (_, b1, _) = two_phase(m)?;
            let rest = m.mean_claim() - value / b1;
            if !(rest > 0.0) {
                return Err(Error::config(format!("p1 = {value} leaves no room for the large-claim mean")));
            }
            cfg.model = rebuild(value, b1, (1.0 - value) / rest)?;
        }
    }
    if !(cfg.kappa > 0.0) || !(cfg.gamma > 0.0) {
        return Err(Error::config("kappa and gamma must stay positive"));
    }
    Ok(cfg)
}

/// Evenly spaced points from `from` to `to` inclusive.
pub fn sweep_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(Error::config("sweep needs finite bounds and at least one step"));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps).map(|k| from + (to - from) * k as f64 / (steps - 1) as f64).collect())
}

/// One row per point; points whose solve fails carry the message in `error`.
pub fn cmd_sweep(cfg: &RunConfig, param: SweepParam, from: f64, to: f64, steps: usize) -> Result<String> {
    let grid = sweep_grid(from, to, steps)?;
    let rows: Vec<String> = grid
        .par_iter()
        .map(|&p| {
            let point = sweep_point(cfg, param, p);
            let moments = point.as_ref().ok().map(|c| c.model.moments());
            let solved = point.and_then(|c| solve_config(&c).map(|(_, s)| s));
            let (mu, var) = moments.map_or((f64::NAN, f64::NAN), |m| (m.mu, m.varsigma2));
            match solved {
                Ok(s) => format!(
                    "{},{},{},{},{},{},{},",
                    num(p),
                    num(s.b_l_star),
                    num(s.b_star),
                    num(s.b_u_star),
                    num(mu),
                    num(var),
                    s.liquidation
                ),
                Err(e) => format!(
                    "{},NaN,NaN,NaN,{},{},,{}",
                    num(p),
                    num(mu),
                    num(var),
                    csv_text(&e.to_string())
                ),
            }
        })
        .collect();
    let mut out = format!("{},b_l_star,b_star,b_u_star,mu,varsigma2,liquidation,error\n", param.name());
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}

fn value_points(pair: &BarrierPair) -> Vec<f64> {
    vec![0.0, 1.0, pair.b_l, pair.b_u, pair.b_u + 2.0]
}

/// Analytic value against simulation. Default points: `0, 1, b_l, b_u, b_u + 2`.
pub fn cmd_simulate(cfg: &RunConfig, xs: Option<&[f64]>) -> Result<String> {
    let (sets, pair, _) = chosen_pair(cfg)?;
    let (_, scale) = cfg.effective_cost()?;
    let v: PiecewiseValue = value_bubl(&sets, &pair)?;
    let sim = cfg.sim_config()?;
    let points = xs.map(<[f64]>::to_vec).unwrap_or_else(|| value_points(&pair));
    let mut out = String::from("x,analytic_V,mc_mean,mc_stderr,z_score\n");
    for x in points {
        let e = simulate_value(&cfg.model, cfg.gamma, cfg.delta, &Strategy::Pair(pair), x, &sim)?;
        let analytic = v.eval(x);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(x),
            num(scale * analytic),
            num(scale * e.mean),
            num(scale * e.stderr),
            num(e.z_score(analytic))
        );
    }
    Ok(out)
}

/// Two-sided exit `E_x[e^{-delta tau_b^+}; tau_b^+ < tau_a^-]`, analytic against simulation.
pub fn cmd_exit_probe(cfg: &RunConfig, a: f64, b: f64, xs: &[f64]) -> Result<String> {
    let sets = build_scale_set(&cfg.model, cfg.gamma, cfg.delta)?;
    let sim = cfg.sim_config()?;
    let mut out = String::from("x,a,b,analytic,mc_mean,mc_stderr,z_score\n");
    for &x in xs {
        let analytic = two_sided_exit_up(&sets.lower, x, a, b).map_err(|e| Error::config(e.to_string()))?;
        let e = simulate_exit(&cfg.model, cfg.delta, x, a, b, &sim)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(x),
            num(a),
            num(b),
            num(analytic),
            num(e.mean),
            num(e.stderr),
            num(e.z_score(analytic))
        );
    }
    Ok(out)
}
