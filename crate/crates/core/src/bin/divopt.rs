use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use divopt::commands::{cmd_exit_probe, cmd_simulate, cmd_solve, cmd_sweep, cmd_value, SweepParam};
use divopt::config::RunConfig;
use divopt::Error;

#[derive(Parser, Debug)]
#[command(name = "divopt", version, about = "Optimal periodic dividend barriers with fixed transaction costs")]
struct Cli {
    /// Run configuration (flat `key = value` file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Print the effective configuration instead of running.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal barriers and solver diagnostics.
    Solve,
    /// Value function and its first two derivatives.
    Value {
        /// Comma-separated surplus levels (default b_u + 0..=40).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
    },
    /// Re-solve over a parameter range.
    Sweep {
        /// kappa, gamma, sigma, p1, M, p1-small or c.
        #[arg(long)]
        param: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Analytic value against Monte Carlo.
    Simulate {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
    },
    /// Two-sided exit identity against Monte Carlo on [from, to].
    ExitProbe {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, value_delimiter = ',', default_value = "1", allow_hyphen_values = true)]
        x: Vec<f64>,
    },
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::reference(),
    };
    if let Some(s) = cli.seed {
        cfg.sim.seed = s;
    }
    if let Some(p) = cli.paths {
        cfg.sim.paths = p;
    }
    if let Some(dt) = cli.dt {
        cfg.sim.dt = dt;
    }
    // overrides go through the same validation as the file
    RunConfig::parse(&cfg.dump())
}

fn run(cli: &Cli) -> Result<String, Error> {
    let cfg = load(cli)?;
    if cli.dump_config {
        return Ok(cfg.dump());
    }
    match &cli.command {
        Command::Solve => cmd_solve(&cfg),
        Command::Value { x } => cmd_value(&cfg, x.as_deref()),
        Command::Sweep { param, from, to, steps } => cmd_sweep(&cfg, param.parse::<SweepParam>()?, *from, *to, *steps),
        Command::Simulate { x } => cmd_simulate(&cfg, x.as_deref()),
        Command::ExitProbe { from, to, x } => cmd_exit_probe(&cfg, *from, *to, x),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match run(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("divopt: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("divopt: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
