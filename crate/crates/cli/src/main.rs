//! `phase-engine`: config-driven runs of the phase-space engine.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};
use crate::run::{Command, RunError};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "phase-engine",
    version,
    about = "Exact Wigner-function dynamics of a mode coupled to a harmonic bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// One-excitation spectrum of the discretized bath.
    Spectrum(RunArgs),
    /// Evolve the initial state and emit every target in `output.emit`.
    Evolve(RunArgs),
    /// Wigner snapshots at each stored time.
    Wigner(RunArgs),
    /// Bound-state sweep over `transition.eta_over_c`.
    Transition(RunArgs),
    /// Invariant checks; exits with 3 if any fails.
    Validate(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// TOML config; omitted keys take their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

/// Declares one `--section.key` flag per config key.
macro_rules! overrides {
    ($($field:ident: $ty:ty => $key:literal, $help:literal;)*) => {
        #[derive(Debug, Default, clap::Args)]
        #[command(next_help_heading = "Config overrides")]
        struct Overrides {
            $(
                #[arg(long = $key, help = $help, allow_negative_numbers = true)]
                $field: Option<$ty>,
            )*
            /// Parameter of the initial state, e.g. `q=1.5` (repeatable).
            #[arg(long = "initial.parameters", value_name = "KEY=VALUE")]
            initial_parameters: Vec<String>,
            /// Sweep couplings in units of eta_c, comma separated.
            #[arg(long = "transition.eta_over_c", allow_negative_numbers = true, value_delimiter = ',', num_args = 1..)]
            eta_over_c: Option<Vec<f64>>,
            /// Targets for `evolve`, comma separated: moments, wigner, transition, validate.
            #[arg(long = "output.emit", value_delimiter = ',', num_args = 1..)]
            emit: Option<Vec<String>>,
        }

        impl Overrides {
            fn entries(&self) -> Result<Vec<(String, toml::Value)>, ConfigError> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push(($key.to_string(), to_value($key, v)?));
                    }
                )*
                if let Some(v) = &self.eta_over_c {
                    out.push(("transition.eta_over_c".into(), to_value("transition.eta_over_c", v)?));
                }
                if let Some(v) = &self.emit {
                    out.push(("output.emit".into(), to_value("output.emit", v)?));
                }
                for kv in &self.initial_parameters {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| ConfigError::new("initial.parameters", format!("expected KEY=VALUE, got `{kv}`")))?;
                    out.push((format!("initial.parameters.{}", k.trim()), scalar(v.trim())));
                }
                Ok(out)
            }
        }
    };
}

overrides! {
    omega0: f64 => "system.omega0", "System frequency";
    mass: f64 => "system.mass", "System mass";
    eta: f64 => "bath.eta", "Coupling strength eta of S(w) = eta w^s f(w/w_c)";
    s: f64 => "bath.s", "Spectral exponent s";
    omega_c: f64 => "bath.omega_c", "Cutoff frequency";
    cutoff: String => "bath.cutoff", "Cutoff function: exponential, gaussian, hard";
    n_modes: usize => "bath.n_modes", "Number of bath modes";
    omega_max_factor: f64 => "bath.omega_max_factor", "Discretization window in units of omega_c";
    temperature: f64 => "bath.temperature", "Bath temperature";
    scheme: String => "bath.scheme", "Quadrature: gauss_legendre, midpoint, trapezoid";
    model: String => "coupling.model", "Coupling model: resonant, qbm";
    kind: String => "initial.kind", "Initial state: vacuum, coherent, thermal, quench_thermal, fock, cat, collective_fock1";
    t_max: f64 => "evolution.t_max", "Final time";
    dt: f64 => "evolution.dt", "Time step";
    store_every: usize => "evolution.store_every", "Store one step in this many";
    q_min: f64 => "grid.q_min", "Grid lower q bound";
    q_max: f64 => "grid.q_max", "Grid upper q bound";
    p_min: f64 => "grid.p_min", "Grid lower p bound";
    p_max: f64 => "grid.p_max", "Grid upper p bound";
    n_q: usize => "grid.n_q", "Grid points along q";
    n_p: usize => "grid.n_p", "Grid points along p";
    auto: bool => "grid.auto", "Derive grid bounds from the trajectory (true/false)";
    format: String => "output.format", "Output format: csv, json";
    path: PathBuf => "output.path", "Output directory";
}

fn to_value<T: serde::Serialize>(key: &str, v: &T) -> Result<toml::Value, ConfigError> {
    toml::Value::try_from(v).map_err(|e| ConfigError::new(key, e.to_string()))
}

/// A TOML scalar if `v` parses as one, otherwise a string.
fn scalar(v: &str) -> toml::Value {
    format!("x = {v}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| toml::Value::String(v.to_string()))
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("PHASE_ENGINE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        ConfigError::new(
            "PHASE_ENGINE_THREADS",
            format!("expected a positive integer, got `{raw}`"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError::new("PHASE_ENGINE_THREADS", e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Spectrum(a) => (Command::Spectrum, a),
        Cmd::Evolve(a) => (Command::Evolve, a),
        Cmd::Wigner(a) => (Command::Wigner, a),
        Cmd::Transition(a) => (Command::Transition, a),
        Cmd::Validate(a) => (Command::Validate, a),
    };
    let prepared = configure_threads()
        .and_then(|_| args.overrides.entries())
        .and_then(|ov| RunConfig::load(args.config.as_deref(), &ov));
    let cfg = match prepared {
        Ok(c) => c,
        Err(e) => {
            eprintln!("phase-engine {}: {e}", command.name());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run::run(command, &cfg) {
        Ok(summary) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serializes")
            );
            if summary.validation_failed() {
                eprintln!("phase-engine {}: invariant checks failed", command.name());
                ExitCode::from(EXIT_INVARIANT)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(RunError::Config(e)) => {
            eprintln!("phase-engine {}: {e}", command.name());
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("phase-engine {}: {e}", command.name());
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
