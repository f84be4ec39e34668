//! Subcommand orchestration and artifact emission.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use phase_engine::io::{
    moments_rows, spectrum_rows, wigner_file_name, write_json, write_moments_csv,
    write_spectrum_csv, write_sweep_csv, write_wigner_csv, write_wigner_json, SweepRow,
};
use phase_engine::oracle::{run_validation, CheckStatus, ValidationSetup};
use phase_engine::{
    evolve_state, find_bound_state, one_excitation_spectrum, transition_report, GridSpec,
    InitialState, PropagatorRecord, RecordOptions,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, Emit, Format, Resolved, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Evolve,
    Wigner,
    Transition,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Wigner => "wigner",
            Command::Transition => "transition",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Engine {
        context: String,
        #[source]
        source: phase_engine::Error,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

fn engine(context: &str) -> impl Fn(phase_engine::Error) -> RunError + '_ {
    move |source| RunError::Engine {
        context: context.to_string(),
        source,
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    /// SHA-256 of the canonical TOML form of the resolved config.
    pub config_hash: String,
    pub versions: BTreeMap<String, String>,
    pub files: Vec<String>,
    pub headline: BTreeMap<String, Value>,
}

impl Summary {
    /// Whether a validation target ran and failed.
    pub fn validation_failed(&self) -> bool {
        self.headline.get("validate.passed") == Some(&Value::Bool(false))
    }
}

#[derive(Default)]
struct Emitted {
    files: Vec<String>,
    headline: BTreeMap<String, Value>,
}

pub fn config_hash(cfg: &RunConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Summary, RunError> {
    let resolved = cfg.resolve()?;
    let out = cfg.output.path.as_path();
    std::fs::create_dir_all(out).map_err(|source| RunError::Io {
        context: format!("{}: creating {}", command.name(), out.display()),
        source,
    })?;
    let ctx = Ctx {
        command,
        cfg,
        r: &resolved,
        out,
    };

    let mut targets: Vec<Target> = match command {
        Command::Spectrum => vec![Target::Spectrum],
        Command::Evolve => cfg.output.emit.iter().map(|e| Target::from(*e)).collect(),
        Command::Wigner => vec![Target::Wigner],
        Command::Transition => vec![Target::Transition],
        Command::Validate => vec![Target::Validate],
    };
    targets.sort();
    targets.dedup();

    let needs_record = targets
        .iter()
        .any(|t| matches!(t, Target::Moments | Target::Wigner));
    let record = if needs_record {
        let opts = RecordOptions {
            store_response: matches!(resolved.initial, InitialState::CollectiveFock1 { .. }),
            ..Default::default()
        };
        Some(
            PropagatorRecord::build(
                resolved.coupling,
                &resolved.bath,
                &resolved.params,
                &resolved.time,
                &opts,
            )
            .map_err(engine(command.name()))?,
        )
    } else {
        None
    };

    let results: Vec<Result<Emitted, RunError>> = targets
        .par_iter()
        .map(|t| ctx.emit(*t, record.as_ref()))
        .collect();

    let mut files = vec!["config.toml".to_string()];
    let mut headline = BTreeMap::new();
    headline.insert("eta_c".to_string(), json!(resolved.eta_c));
    for r in results {
        let e = r?;
        files.extend(e.files);
        headline.extend(e.headline);
    }
    ctx.write("config.toml", |w| {
        use std::io::Write;
        w.write_all(cfg.to_toml().as_bytes())
            .map_err(phase_engine::Error::from)
    })?;

    let versions = BTreeMap::from([
        (
            "phase-engine-core".to_string(),
            phase_engine::VERSION.to_string(),
        ),
        (
            "phase-engine-cli".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        ),
    ]);
    files.push("summary.json".into());
    let summary = Summary {
        command: command.name().into(),
        config_hash: config_hash(cfg),
        versions,
        files,
        headline,
    };
    ctx.write("summary.json", |w| write_json(w, &summary))?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Target {
    Spectrum,
    Moments,
    Wigner,
    Transition,
    Validate,
}

impl From<Emit> for Target {
    fn from(e: Emit) -> Self {
        match e {
            Emit::Moments => Target::Moments,
            Emit::Wigner => Target::Wigner,
            Emit::Transition => Target::Transition,
            Emit::Validate => Target::Validate,
        }
    }
}

struct Ctx<'a> {
    command: Command,
    cfg: &'a RunConfig,
    r: &'a Resolved,
    out: &'a Path,
}

impl Ctx<'_> {
    fn json(&self) -> bool {
        self.cfg.output.format == Format::Json
    }

    fn ext(&self) -> &'static str {
        if self.json() {
            "json"
        } else {
            "csv"
        }
    }

    fn write<F>(&self, name: &str, f: F) -> Result<(), RunError>
    where
        F: FnOnce(&mut BufWriter<File>) -> phase_engine::Result<()>,
    {
        let path = self.out.join(name);
        let file = File::create(&path).map_err(|source| RunError::Io {
            context: format!("{}: creating {}", self.command.name(), path.display()),
            source,
        })?;
        let mut w = BufWriter::new(file);
        f(&mut w).map_err(engine(self.command.name()))?;
        use std::io::Write;
        w.flush().map_err(|source| RunError::Io {
            context: format!("{}: writing {}", self.command.name(), path.display()),
            source,
        })
    }

    fn emit(&self, target: Target, record: Option<&PropagatorRecord>) -> Result<Emitted, RunError> {
        match target {
            Target::Spectrum => self.spectrum(),
            Target::Moments => self.moments(record.expect("record built")),
            Target::Wigner => self.wigner(record.expect("record built")),
            Target::Transition => self.transition(),
            Target::Validate => self.validate(),
        }
    }

    fn spectrum(&self) -> Result<Emitted, RunError> {
        let s = one_excitation_spectrum(&self.r.bath, &self.r.params);
        let rows = spectrum_rows(&s);
        let name = format!("spectrum.{}", self.ext());
        if self.json() {
            self.write(&name, |w| write_json(w, &rows))?;
        } else {
            self.write(&name, |w| write_spectrum_csv(w, &rows))?;
        }
        let e1 = find_bound_state(&self.r.model, &self.r.params).map_err(engine("spectrum"))?;
        let mut h = BTreeMap::new();
        h.insert("spectrum.levels".into(), json!(rows.len()));
        h.insert("spectrum.e_min".into(), json!(s.energies[0]));
        h.insert("spectrum.weight_min".into(), json!(s.weights[0]));
        h.insert("spectrum.continuum_e1".into(), json!(e1));
        Ok(Emitted {
            files: vec![name],
            headline: h,
        })
    }

    fn moments(&self, record: &PropagatorRecord) -> Result<Emitted, RunError> {
        let rows = moments_rows(&self.r.initial, record).map_err(engine("moments"))?;
        let name = format!("moments.{}", self.ext());
        if self.json() {
            self.write(&name, |w| write_json(w, &rows))?;
        } else {
            self.write(&name, |w| write_moments_csv(w, &rows))?;
        }
        let last = rows.last().expect("at least t = 0");
        let mut h = BTreeMap::new();
        h.insert("moments.t_final".into(), json!(last.t));
        h.insert("moments.occupation_final".into(), json!(last.occupation));
        h.insert("moments.purity_final".into(), json!(last.purity));
        if let Some(a) = last.abs_u {
            h.insert("moments.abs_u_final".into(), json!(a));
        }
        Ok(Emitted {
            files: vec![name],
            headline: h,
        })
    }

    fn wigner(&self, record: &PropagatorRecord) -> Result<Emitted, RunError> {
        let states = record
            .times()
            .par_iter()
            .map(|t| evolve_state(&self.r.initial, record, *t))
            .collect::<phase_engine::Result<Vec<_>>>()
            .map_err(engine("wigner"))?;
        let spec = match self.r.grid {
            Some(g) => g,
            None => trajectory_window(&states, self.cfg.grid.n_q, self.cfg.grid.n_p)
                .map_err(engine("wigner"))?,
        };
        let json = self.json();
        let results: Vec<Result<(String, f64, f64), RunError>> = states
            .par_iter()
            .enumerate()
            .map(|(k, st)| {
                let g = st.fill(&spec).map_err(engine("wigner"))?;
                let name = wigner_file_name(k, json);
                if json {
                    self.write(&name, |w| write_wigner_json(w, &g))?;
                } else {
                    self.write(&name, |w| write_wigner_csv(w, &g))?;
                }
                Ok((
                    name,
                    g.norm(),
                    g.values.iter().copied().fold(f64::INFINITY, f64::min),
                ))
            })
            .collect();
        let mut files = Vec::new();
        let mut norm_dev: f64 = 0.0;
        let mut w_min = f64::INFINITY;
        for r in results {
            let (name, norm, min) = r?;
            files.push(name);
            norm_dev = norm_dev.max((norm - 1.0).abs());
            w_min = w_min.min(min);
        }
        let mut h = BTreeMap::new();
        h.insert("wigner.snapshots".into(), json!(files.len()));
        h.insert("wigner.max_norm_deviation".into(), json!(norm_dev));
        h.insert("wigner.min_value".into(), json!(w_min));
        h.insert(
            "wigner.grid".into(),
            serde_json::to_value(spec).expect("grid serializes"),
        );
        Ok(Emitted { files, headline: h })
    }

    fn transition(&self) -> Result<Emitted, RunError> {
        let rows = transition_report(&self.r.model, &self.r.params, &self.r.sweep)
            .into_iter()
            .map(|r| r.map(|p| SweepRow::from(&p)))
            .collect::<phase_engine::Result<Vec<_>>>()
            .map_err(engine("transition"))?;
        let name = format!("sweep.{}", self.ext());
        if self.json() {
            self.write(&name, |w| write_json(w, &rows))?;
        } else {
            self.write(&name, |w| write_sweep_csv(w, &rows))?;
        }
        let bound = rows.iter().filter(|r| r.e1.is_some()).count();
        let mut h = BTreeMap::new();
        h.insert("transition.points".into(), json!(rows.len()));
        h.insert("transition.bound_points".into(), json!(bound));
        Ok(Emitted {
            files: vec![name],
            headline: h,
        })
    }

    fn validate(&self) -> Result<Emitted, RunError> {
        let b = &self.cfg.bath;
        let setup = ValidationSetup {
            model: self.r.model,
            params: self.r.params,
            n_modes: b.n_modes,
            omega_max_factor: b
                .omega_max_factor
                .unwrap_or_else(|| b.cutoff.default_omega_max_factor()),
            scheme: b.scheme,
            temperature: b.temperature,
            t_max: self.cfg.evolution.t_max,
        };
        let report = run_validation(&setup).map_err(engine("validate"))?;
        self.write("validate.json", |w| write_json(w, &report))?;
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.check_name.as_str())
            .collect();
        let mut h = BTreeMap::new();
        h.insert("validate.passed".into(), json!(report.passed()));
        h.insert("validate.checks".into(), json!(report.checks.len()));
        h.insert("validate.failed".into(), json!(failed));
        Ok(Emitted {
            files: vec!["validate.json".into()],
            headline: h,
        })
    }
}

/// `±6σ` of the widest covariance met along the trajectory, around the
/// range of means.
fn trajectory_window(
    states: &[phase_engine::PhaseState],
    n_q: usize,
    n_p: usize,
) -> phase_engine::Result<GridSpec> {
    let (mut sq, mut sp) = (0.0f64, 0.0f64);
    let (mut q_lo, mut q_hi, mut p_lo, mut p_hi) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for st in states {
        let c = st.covariance();
        let m = st.mean();
        sq = sq.max(c.c_qq.sqrt());
        sp = sp.max(c.c_pp.sqrt());
        q_lo = q_lo.min(m[0]);
        q_hi = q_hi.max(m[0]);
        p_lo = p_lo.min(m[1]);
        p_hi = p_hi.max(m[1]);
    }
    GridSpec::new(
        q_lo - 6.0 * sq,
        q_hi + 6.0 * sq,
        p_lo - 6.0 * sp,
        p_hi + 6.0 * sp,
        n_q,
        n_p,
    )
}
