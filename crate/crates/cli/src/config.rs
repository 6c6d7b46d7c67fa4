//! Flag parsing, config-file loading and per-command default resolution.
//!
//! Precedence: command-line flags > `--config` key=value file > built-in
//! defaults. The fully resolved configuration is echoed in JSON output so
//! every run is reproducible from its own artifact.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tavis_core::{CoherentPrep, SystemParams};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "tavis", version, about = "Two qubits coupled to one resonator mode: \
revival traces, phase-space and quadrature distributions, and the homodyne \
heralding protocol for (|gg> + e^{-i phi}|ee>)/sqrt(2) states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Mean photon number(s); comma-separated list where a sweep applies
    #[arg(long, global = true)]
    pub nbar: Option<String>,
    /// Coherent phase theta (radians)
    #[arg(long, global = true)]
    pub theta: Option<String>,
    /// Resonator frequency (symmetric shortcut: sets both qubits resonant)
    #[arg(long, global = true)]
    pub omega: Option<String>,
    /// Coupling strength (symmetric shortcut: sets both couplings)
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    /// Qubit 1 energy override (defaults to omega/2)
    #[arg(long, global = true)]
    pub e1: Option<String>,
    /// Qubit 2 energy override (defaults to omega/2)
    #[arg(long, global = true)]
    pub e2: Option<String>,
    /// Qubit 1 coupling override (defaults to lambda)
    #[arg(long, global = true)]
    pub lambda1: Option<String>,
    /// Qubit 2 coupling override (defaults to lambda)
    #[arg(long, global = true)]
    pub lambda2: Option<String>,
    /// Time-grid start
    #[arg(long, global = true)]
    pub tmin: Option<String>,
    /// Time-grid end
    #[arg(long, global = true)]
    pub tmax: Option<String>,
    /// Number of time-grid points (>= 2)
    #[arg(long, global = true)]
    pub tsteps: Option<String>,
    /// Single evaluation time (qfunc, xdist, herald)
    #[arg(long, global = true)]
    pub time: Option<String>,
    /// Fidelity threshold(s) in (0,1); comma-separated where a sweep applies
    #[arg(long, global = true)]
    pub fmin: Option<String>,
    /// Target phase(s) phi; comma-separated list
    #[arg(long, global = true)]
    pub phi: Option<String>,
    /// Quadrature grid spacing in (0, 0.1]
    #[arg(long, global = true)]
    pub dx: Option<String>,
    /// Fock truncation override
    #[arg(long, global = true)]
    pub nmax: Option<String>,
    /// RNG seed for stochastic commands
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Number of measurement shots (herald)
    #[arg(long, global = true)]
    pub shots: Option<String>,
    /// Output format
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Output path (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key=value config file; keys are the long flag names
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum Command {
    /// Ground-state return probability P_gg(t) over a time grid
    Revival,
    /// Husimi phase-space heatmap at one time, with branch markers
    Qfunc,
    /// x-quadrature channel densities at one time, with branch markers
    Xdist,
    /// Heralding success probability P_s(t) per target phase
    Ps,
    /// Seeded homodyne measurement shots at one time
    Herald,
    /// Plateau-width sweep over nbar and fidelity thresholds
    Width,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Revival => "revival",
            Command::Qfunc => "qfunc",
            Command::Xdist => "xdist",
            Command::Ps => "ps",
            Command::Herald => "herald",
            Command::Width => "width",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Fully materialized run configuration (defaults applied).
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: &'static str,
    pub nbar: Vec<f64>,
    pub theta: f64,
    pub omega: f64,
    pub e1: f64,
    pub e2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub tmin: f64,
    pub tmax: f64,
    pub tsteps: usize,
    pub time: Option<f64>,
    pub fmin: Vec<f64>,
    pub phi: Vec<f64>,
    pub dx: f64,
    pub nmax: Option<usize>,
    pub seed: u64,
    pub shots: usize,
    pub format: Format,
    pub out: Option<String>,
}

impl Resolved {
    pub fn params(&self) -> Result<SystemParams, CliError> {
        Ok(SystemParams::new(self.omega, self.e1, self.e2, self.lambda1, self.lambda2)?)
    }

    pub fn prep(&self, nbar: f64) -> Result<CoherentPrep, CliError> {
        Ok(match self.nmax {
            Some(n) => CoherentPrep::with_n_max(nbar, self.theta, n)?,
            None => CoherentPrep::new(nbar, self.theta)?,
        })
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let n = self.tsteps;
        (0..n)
            .map(|i| self.tmin + (self.tmax - self.tmin) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

fn parse_config_file(path: &PathBuf) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "config file line {}: expected key=value, got {line:?}",
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_f64(key: &str, raw: &str) -> Result<f64, CliError> {
    raw.parse::<f64>()
        .map_err(|_| CliError::Config(format!("{key}: expected a number, got {raw:?}")))
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|tok| parse_f64(key, tok.trim()))
        .collect()
}

struct Source<'a> {
    cli: HashMap<&'static str, &'a str>,
    file: HashMap<String, String>,
}

impl Source<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.cli.get(key).copied().or_else(|| self.file.get(key).map(String::as_str))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            Some(raw) => parse_f64(key, raw),
            None => Ok(default),
        }
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|raw| parse_f64(key, raw)).transpose()
    }

    fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.get(key) {
            Some(raw) => parse_list(key, raw),
            None => Ok(default.to_vec()),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.get(key) {
            Some(raw) => raw
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("{key}: expected an integer, got {raw:?}"))),
            None => Ok(default),
        }
    }
}

pub fn resolve(cli: &Cli) -> Result<Resolved, CliError> {
    let file = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };
    let mut flags: HashMap<&'static str, &str> = HashMap::new();
    let pairs: [(&'static str, &Option<String>); 19] = [
        ("nbar", &cli.nbar),
        ("theta", &cli.theta),
        ("omega", &cli.omega),
        ("lambda", &cli.lambda),
        ("e1", &cli.e1),
        ("e2", &cli.e2),
        ("lambda1", &cli.lambda1),
        ("lambda2", &cli.lambda2),
        ("tmin", &cli.tmin),
        ("tmax", &cli.tmax),
        ("tsteps", &cli.tsteps),
        ("time", &cli.time),
        ("fmin", &cli.fmin),
        ("phi", &cli.phi),
        ("dx", &cli.dx),
        ("nmax", &cli.nmax),
        ("seed", &cli.seed),
        ("shots", &cli.shots),
        ("format", &cli.format),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            flags.insert(k, v.as_str());
        }
    }
    let src = Source { cli: flags, file };

    let cmd = cli.command;
    let omega = src.f64_or("omega", 1.0)?;
    let lambda = src.f64_or("lambda", 1.0)?;
    let theta = src.f64_or("theta", 0.0)?;

    // Per-command figure defaults.
    let (nbar_default, tmin_d, tmax_d, tsteps_d): (Vec<f64>, f64, f64, usize) = match cmd {
        Command::Revival => (vec![30.0], 0.0, 45.0, 2251),
        Command::Qfunc | Command::Xdist | Command::Herald => (vec![200.0], 0.0, 0.0, 2),
        Command::Ps => (vec![200.0], 5.5 * PI, 7.5 * PI, 300),
        Command::Width => (vec![25.0, 50.0, 100.0, 200.0, 300.0], 0.0, 0.0, 161),
    };
    let fmin_default: Vec<f64> = match cmd {
        Command::Width => vec![0.55, 0.65, 0.75, 0.85, 0.95],
        _ => vec![0.9],
    };
    let phi_default: Vec<f64> = match cmd {
        Command::Ps => vec![0.0, PI, PI / 2.0, 3.0 * PI / 2.0],
        _ => vec![PI],
    };
    let time_default = match cmd {
        Command::Qfunc | Command::Xdist => Some(3.0 * PI / 2.0),
        // herald's default (the phi-target plateau centre) depends on the
        // resolved physics parameters and is materialized by the command.
        _ => None,
    };

    let format = match src.get("format").unwrap_or("csv") {
        "csv" => Format::Csv,
        "json" => Format::Json,
        "svg" => Format::Svg,
        other => {
            return Err(CliError::Config(format!(
                "format: expected csv, json or svg, got {other:?}"
            )))
        }
    };

    let resolved = Resolved {
        command: cmd.name(),
        nbar: src.list_or("nbar", &nbar_default)?,
        theta,
        omega,
        e1: src.f64_or("e1", omega / 2.0)?,
        e2: src.f64_or("e2", omega / 2.0)?,
        lambda1: src.f64_or("lambda1", lambda)?,
        lambda2: src.f64_or("lambda2", lambda)?,
        tmin: src.f64_or("tmin", tmin_d)?,
        tmax: src.f64_or("tmax", tmax_d)?,
        tsteps: src.usize_or("tsteps", tsteps_d)?,
        time: match src.f64_opt("time")? {
            Some(t) => Some(t),
            None => time_default,
        },
        fmin: src.list_or("fmin", &fmin_default)?,
        phi: src.list_or("phi", &phi_default)?,
        dx: src.f64_or("dx", 0.02)?,
        nmax: match src.get("nmax") {
            Some(raw) => Some(
                raw.parse::<usize>()
                    .map_err(|_| CliError::Config(format!("nmax: expected an integer, got {raw:?}")))?,
            ),
            None => None,
        },
        seed: match src.get("seed") {
            Some(raw) => raw
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("seed: expected an integer, got {raw:?}")))?,
            None => 1,
        },
        shots: src.usize_or("shots", 1000)?,
        format,
        out: cli
            .out
            .as_ref()
            .map(|p| p.to_string_lossy().into_owned())
            .or_else(|| src.file.get("out").cloned()),
    };
    validate(&resolved)?;
    Ok(resolved)
}

fn validate(r: &Resolved) -> Result<(), CliError> {
    if r.tsteps < 2 {
        return Err(CliError::Config(format!("tsteps must be >= 2, got {}", r.tsteps)));
    }
    if r.nbar.is_empty() {
        return Err(CliError::Config("nbar list must not be empty".into()));
    }
    for &n in &r.nbar {
        if !(n >= 0.0) {
            return Err(CliError::Config(format!("nbar must be >= 0, got {n}")));
        }
    }
    for &f in &r.fmin {
        if !(0.0 < f && f < 1.0) {
            return Err(CliError::Config(format!("fmin must be in (0,1), got {f}")));
        }
    }
    if !(r.dx > 0.0 && r.dx <= 0.1) {
        return Err(CliError::Config(format!("dx must be in (0, 0.1], got {}", r.dx)));
    }
    if r.shots == 0 {
        return Err(CliError::Config("shots must be >= 1".into()));
    }
    for &p in &r.phi {
        if !p.is_finite() {
            return Err(CliError::Config(format!("phi must be finite, got {p}")));
        }
    }
    Ok(())
}
