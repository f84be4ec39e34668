//! Run configuration: a TOML tree with defaults for every key, command-line
//! overrides applied on top, and strict unknown-key rejection.

use std::path::{Path, PathBuf};

use phase_engine::{
    critical_coupling, discretize, CouplingModel, Cutoff, DiscreteBath, GridSpec, InitialState,
    Scheme, SpectralModel, SystemParams, TimeGrid,
};
use serde::{Deserialize, Serialize};

/// A configuration problem, tied to the offending key.
#[derive(Debug, thiserror::Error)]
#[error("config error at `{key}`: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl From<phase_engine::Error> for ConfigError {
    fn from(e: phase_engine::Error) -> Self {
        match e {
            phase_engine::Error::InvalidParameter { name, reason } => Self::new(name, reason),
            other => Self::new("config", other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub bath: BathSection,
    pub coupling: CouplingSection,
    pub initial: InitialSection,
    pub evolution: EvolutionSection,
    pub grid: GridSection,
    pub transition: TransitionSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub omega0: f64,
    pub mass: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            mass: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSection {
    pub eta: f64,
    pub s: f64,
    pub omega_c: f64,
    pub cutoff: Cutoff,
    pub n_modes: usize,
    /// Defaults to the cutoff's own window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max_factor: Option<f64>,
    pub temperature: f64,
    pub scheme: Scheme,
}

impl Default for BathSection {
    fn default() -> Self {
        Self {
            eta: 0.3,
            s: 1.0,
            omega_c: 10.0,
            cutoff: Cutoff::Exponential,
            n_modes: 256,
            omega_max_factor: None,
            temperature: 0.0,
            scheme: Scheme::GaussLegendre,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    pub model: CouplingModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    pub kind: String,
    pub parameters: toml::Table,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: "vacuum".into(),
            parameters: toml::Table::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub t_max: f64,
    pub dt: f64,
    pub store_every: usize,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            t_max: 20.0,
            dt: 0.01,
            store_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_q: usize,
    pub n_p: usize,
    /// Bounds from ±6σ of the widest covariance along the trajectory;
    /// `q_min`…`p_max` are then ignored.
    pub auto: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            q_min: -6.0,
            q_max: 6.0,
            p_min: -6.0,
            p_max: 6.0,
            n_q: 201,
            n_p: 201,
            auto: true,
        }
    }
}

/// Couplings for the `transition` sweep, in units of the critical coupling.
/// Empty means the single value `bath.eta`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionSection {
    pub eta_over_c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Moments,
    Wigner,
    Transition,
    Validate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub format: Format,
    pub path: PathBuf,
    /// Targets run by `evolve`; the other subcommands run their own.
    pub emit: Vec<Emit>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            format: Format::Csv,
            path: PathBuf::from("out"),
            emit: vec![Emit::Moments],
        }
    }
}

/// Physical objects built from a checked config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: SystemParams,
    pub model: SpectralModel,
    pub eta_c: f64,
    pub bath: DiscreteBath,
    pub coupling: CouplingModel,
    pub initial: InitialState,
    pub time: TimeGrid,
    /// `None` when the window is derived from the trajectory.
    pub grid: Option<GridSpec>,
    pub sweep: Vec<f64>,
}

impl RunConfig {
    /// Parses a TOML document, applies `overrides` (dotted keys), and
    /// deserializes strictly.
    pub fn parse(text: &str, overrides: &[(String, toml::Value)]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            ConfigError::new(error_key(&e), e.message().to_string())
        })?;
        for (key, value) in overrides {
            set_dotted(&mut table, key, value.clone())?;
        }
        let cfg: Self =
            serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(path_error)?;
        cfg.initial_state()?;
        Ok(cfg)
    }

    pub fn load(
        path: Option<&Path>,
        overrides: &[(String, toml::Value)],
    ) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| ConfigError::new("--config", format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::parse(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn initial_state(&self) -> Result<InitialState, ConfigError> {
        let mut obj = serde_json::Map::new();
        obj.insert(
            "kind".into(),
            serde_json::Value::String(self.initial.kind.clone()),
        );
        for (k, v) in &self.initial.parameters {
            let v = serde_json::to_value(v)
                .map_err(|e| ConfigError::new(format!("initial.parameters.{k}"), e.to_string()))?;
            obj.insert(k.clone(), v);
        }
        let state: InitialState = serde_path_to_error::deserialize(serde_json::Value::Object(obj))
            .map_err(|e| {
                let inner = e.inner().to_string();
                let key = match unknown_field(&inner) {
                    Some(f) => format!("initial.parameters.{f}"),
                    None if inner.contains("variant") => "initial.kind".to_string(),
                    None if e.path().to_string() == "." => "initial.parameters".to_string(),
                    None => format!("initial.parameters.{}", e.path()),
                };
                ConfigError::new(key, inner)
            })?;
        state.validate()?;
        Ok(state)
    }

    /// Builds and checks every physical object.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let params = SystemParams::new(self.system.omega0, self.system.mass)?;
        let b = &self.bath;
        let model = SpectralModel::new(b.eta, b.s, b.omega_c, b.cutoff)?;
        if b.temperature < 0.0 || !b.temperature.is_finite() {
            return Err(ConfigError::new(
                "bath.temperature",
                format!("must be >= 0, got {}", b.temperature),
            ));
        }
        let factor = b
            .omega_max_factor
            .unwrap_or_else(|| b.cutoff.default_omega_max_factor());
        let bath =
            discretize(&model, b.n_modes, factor, b.scheme)?.with_temperature(b.temperature)?;
        let eta_c = critical_coupling(&model, &params)?;
        let e = &self.evolution;
        let time = TimeGrid::new(e.t_max, e.dt, e.store_every)?;
        let g = &self.grid;
        let spec = GridSpec::new(g.q_min, g.q_max, g.p_min, g.p_max, g.n_q, g.n_p)?;
        let sweep = if self.transition.eta_over_c.is_empty() {
            vec![b.eta]
        } else {
            if let Some(x) = self
                .transition
                .eta_over_c
                .iter()
                .find(|x| !(**x >= 0.0 && x.is_finite()))
            {
                return Err(ConfigError::new(
                    "transition.eta_over_c",
                    format!("entries must be >= 0, got {x}"),
                ));
            }
            self.transition
                .eta_over_c
                .iter()
                .map(|x| x * eta_c)
                .collect()
        };
        if self.output.emit.is_empty() {
            return Err(ConfigError::new(
                "output.emit",
                "must name at least one target",
            ));
        }
        Ok(Resolved {
            params,
            model,
            eta_c,
            bath,
            coupling: self.coupling.model,
            initial: self.initial_state()?,
            time,
            grid: (!g.auto).then_some(spec),
            sweep,
        })
    }
}

fn unknown_field(msg: &str) -> Option<&str> {
    let rest = msg.strip_prefix("unknown field `")?;
    rest.split('`').next()
}

fn path_error(e: serde_path_to_error::Error<toml::de::Error>) -> ConfigError {
    let path = e.path().to_string();
    let msg = e.inner().message().to_string();
    let key = match unknown_field(&msg) {
        Some(f) if path == "." => f.to_string(),
        Some(f) if path != f && !path.ends_with(&format!(".{f}")) => format!("{path}.{f}"),
        _ => path,
    };
    ConfigError::new(key, msg)
}

fn error_key(e: &toml::de::Error) -> String {
    match e.span() {
        Some(s) => format!("config (bytes {}..{})", s.start, s.end),
        None => "config".into(),
    }
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), ConfigError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| ConfigError::new(key, "empty key"))?;
    let mut t = table;
    for (i, p) in parts.iter().enumerate() {
        let entry = t
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::new(parts[..=i].join("."), "is not a table"))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}
