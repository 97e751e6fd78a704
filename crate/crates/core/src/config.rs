//! Flat `key = value` run configuration with `#` comments.
//!
//! Required keys: `c sigma lambda gamma delta kappa` and, when `lambda > 0`,
//! `p1..pm` with matching `beta1..betam`. Optional: `rho` (proportional cost),
//! `b_u`/`b_l` (fixed pair instead of the optimal one), and the simulation
//! keys `seed paths dt t_max antithetic monitor`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::levy_model::{reduce_proportional_cost, JumpPhase, LevyModel};
use crate::mc::{Monitor, SimConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct SimSettings {
    pub seed: u64,
    pub paths: usize,
    pub dt: f64,
    /// Defaults to the horizon with `e^{-delta t_max} = 1e-6`.
    pub t_max: Option<f64>,
    pub antithetic: bool,
    pub monitor: Monitor,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings { seed: 1, paths: 200_000, dt: 1e-3, t_max: None, antithetic: false, monitor: Monitor::Bridge }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: LevyModel,
    pub gamma: f64,
    pub delta: f64,
    pub kappa: f64,
    pub rho: f64,
    /// Explicit `(b_u, b_l)`; the optimal pair is used when absent.
    pub pair: Option<(f64, f64)>,
    pub sim: SimSettings,
}

fn parse_f64(key: &str, raw: &str, line: usize) -> Result<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| Error::Config { line: Some(line), message: format!("{key}: cannot parse '{raw}' as a number") })?;
    if !v.is_finite() {
        return Err(Error::Config { line: Some(line), message: format!("{key}: value must be finite") });
    }
    Ok(v)
}

fn indexed(key: &str, prefix: &str) -> Option<usize> {
    let rest = key.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    rest.parse().ok()
}

impl RunConfig {
    /// Reference parameters: `c = 11, sigma = 1, lambda = 10, p = (0.9, 0.1),
    /// beta = (1.9, 0.19), gamma = 1, delta = 0.2, kappa = 0.2`.
    pub fn reference() -> Self {
        RunConfig {
            model: LevyModel::reference(),
            gamma: 1.0,
            delta: 0.2,
            kappa: 0.2,
            rho: 0.0,
            pair: None,
            sim: SimSettings::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config { line: Some(line_no), message: format!("expected 'key = value', got '{line}'") });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(Error::Config { line: Some(line_no), message: format!("empty key or value in '{line}'") });
            }
            if let Some((_, first)) = entries.get(k) {
                return Err(Error::Config {
                    line: Some(line_no),
                    message: format!("duplicate key '{k}' (first set on line {first})"),
                });
            }
            entries.insert(k.to_string(), (v.to_string(), line_no));
        }

        let mut scalars: BTreeMap<&str, f64> = BTreeMap::new();
        let mut weights: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        let mut rates: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        let mut sim = SimSettings::default();
        for (k, (v, line)) in &entries {
            let line = *line;
            match k.as_str() {
                "c" | "sigma" | "lambda" | "gamma" | "delta" | "kappa" | "rho" | "b_u" | "b_l" | "dt" | "t_max" => {
                    scalars.insert(k.as_str(), parse_f64(k, v, line)?);
                }
                "seed" => {
                    sim.seed = v.parse().map_err(|_| Error::Config {
                        line: Some(line),
                        message: format!("seed: cannot parse '{v}' as an unsigned integer"),
                    })?
                }
                "paths" => {
                    sim.paths = v.parse().map_err(|_| Error::Config {
                        line: Some(line),
                        message: format!("paths: cannot parse '{v}' as an unsigned integer"),
                    })?
                }
                "antithetic" => {
                    sim.antithetic = match v.as_str() {
                        "true" | "1" => true,
                        "false" | "0" => false,
                        _ => {
                            return Err(Error::Config { line: Some(line), message: format!("antithetic: expected true or false, got '{v}'") })
                        }
                    }
                }
                "monitor" => {
                    sim.monitor = match v.as_str() {
                        "bridge" => Monitor::Bridge,
                        "grid" => Monitor::Grid,
                        _ => {
                            return Err(Error::Config { line: Some(line), message: format!("monitor: expected bridge or grid, got '{v}'") })
                        }
                    }
                }
                other => {
                    if let Some(i) = indexed(other, "p") {
                        weights.insert(i, (parse_f64(k, v, line)?, line));
                    } else if let Some(i) = indexed(other, "beta") {
                        rates.insert(i, (parse_f64(k, v, line)?, line));
                    } else {
                        return Err(Error::Config { line: Some(line), message: format!("unknown key '{other}'") });
                    }
                }
            }
        }

        let need = |key: &str| -> Result<f64> {
            scalars.get(key).copied().ok_or_else(|| Error::config(format!("missing required key '{key}'")))
        };
        let c = need("c")?;
        let sigma = need("sigma")?;
        let lambda = need("lambda")?;
        let gamma = need("gamma")?;
        let delta = need("delta")?;
        let kappa = need("kappa")?;
        let rho = scalars.get("rho").copied().unwrap_or(0.0);

        let m = weights.len().max(rates.len());
        let mut mixture = Vec::with_capacity(m);
        for i in 1..=m {
            let p = weights.get(&i).ok_or_else(|| Error::config(format!("missing key 'p{i}' (phases must be numbered 1..{m})")))?;
            let b = rates.get(&i).ok_or_else(|| Error::config(format!("missing key 'beta{i}' (phases must be numbered 1..{m})")))?;
            mixture.push(JumpPhase::new(p.0, b.0));
        }
        if lambda > 0.0 && mixture.is_empty() {
            return Err(Error::config("lambda > 0 needs at least one phase p1, beta1"));
        }

        // validation failures point at the line that set the key
        let at = |key: &str, message: String| Error::Config { line: entries.get(key).map(|e| e.1), message };
        if !(gamma > 0.0) {
            return Err(at("gamma", "gamma must be positive".into()));
        }
        if !(delta > 0.0) {
            return Err(at("delta", "delta must be positive".into()));
        }
        if !(kappa > 0.0) {
            return Err(at("kappa", "kappa must be positive".into()));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(at("rho", "rho must lie in [0, 1)".into()));
        }
        let pair = match (scalars.get("b_u"), scalars.get("b_l")) {
            (Some(&u), Some(&l)) => {
                if !(l >= 0.0 && u - l >= kappa / (1.0 - rho)) {
                    return Err(at("b_u", format!("b_u = {u}, b_l = {l} is not admissible for the cost")));
                }
                Some((u, l))
            }
            (None, None) => None,
            _ => return Err(Error::config("b_u and b_l must be given together")),
        };
        if let Some(&dt) = scalars.get("dt") {
            sim.dt = dt;
        }
        sim.t_max = scalars.get("t_max").copied();

        let model = LevyModel::new(c, sigma, lambda, mixture)?;
        let cfg = RunConfig { model, gamma, delta, kappa, rho, pair, sim };
        cfg.sim_config()?.validate().map_err(|e| Error::config(e.to_string()))?;
        Ok(cfg)
    }

    /// Fixed cost after folding in the proportional cost, and the value scale.
    pub fn effective_cost(&self) -> Result<(f64, f64)> {
        reduce_proportional_cost(self.kappa, self.rho)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        Ok(SimConfig {
            n_paths: self.sim.paths,
            dt: self.sim.dt,
            t_max: self.sim.t_max.unwrap_or_else(|| SimConfig::horizon_for(self.delta)),
            seed: self.sim.seed,
            antithetic: self.sim.antithetic,
            monitor: self.sim.monitor,
        })
    }

    /// Serializes to the config format; parsing the output gives back `self`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let m = &self.model;
        let _ = writeln!(s, "c = {}", m.c());
        let _ = writeln!(s, "sigma = {}", m.sigma());
        let _ = writeln!(s, "lambda = {}", m.lambda());
        for (i, p) in m.mixture().iter().enumerate() {
            let _ = writeln!(s, "p{} = {}", i + 1, p.weight);
            let _ = writeln!(s, "beta{} = {}", i + 1, p.rate);
        }
        let _ = writeln!(s, "gamma = {}", self.gamma);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "kappa = {}", self.kappa);
        if self.rho != 0.0 {
            let _ = writeln!(s, "rho = {}", self.rho);
        }
        if let Some((u, l)) = self.pair {
            let _ = writeln!(s, "b_u = {u}");
            let _ = writeln!(s, "b_l = {l}");
        }
        let _ = writeln!(s, "seed = {}", self.sim.seed);
        let _ = writeln!(s, "paths = {}", self.sim.paths);
        let _ = writeln!(s, "dt = {}", self.sim.dt);
        if let Some(t) = self.sim.t_max {
            let _ = writeln!(s, "t_max = {t}");
        }
        let _ = writeln!(s, "antithetic = {}", self.sim.antithetic);
        let _ = writeln!(s, "monitor = {}", if self.sim.monitor == Monitor::Grid { "grid" } else { "bridge" });
        s
    }
}
