//! Run configuration: config file entries merged with command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use opnorm_core::ensembles::ENSEMBLE_KEYS;
use opnorm_core::kv::{self, Document, Entry, Section};
use opnorm_core::{EnsembleSpec, NormKind, UMode};

use crate::error::CliError;

/// Non-ensemble keys accepted in a run config, in echo order.
pub const RUN_KEYS: &[&str] = &[
    "subcommand",
    "master_seed",
    "n",
    "n_grid",
    "A",
    "A_grid",
    "dim",
    "eps",
    "saturation_T",
    "probes",
    "trials",
    "rtol",
    "max_iter",
    "kind",
    "method",
    "u_mode",
    "width_c",
    "source",
    "samples",
    "p_max",
    "input",
    "output",
    "csv",
];

pub const SUBCOMMANDS: &[&str] = &["gen", "norm", "net", "tails", "sweep", "decay", "diag", "tw"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Power,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Power => "power",
        }
    }
}

/// Where `diag` takes its samples from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Scalar,
    RowNorm,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Scalar => "scalar",
            Source::RowNorm => "row_norm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    /// Explicitly given ensemble keys; see [`RunConfig::ensemble`].
    pub ensemble_entries: Vec<Entry>,
    pub master_seed: Option<u64>,
    pub n: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub a: Option<f64>,
    pub a_grid: Option<Vec<f64>>,
    pub dim: Option<usize>,
    pub eps: Option<f64>,
    pub saturation_t: Option<usize>,
    pub probes: Option<usize>,
    pub trials: Option<u64>,
    pub rtol: Option<f64>,
    pub max_iter: Option<usize>,
    pub kind: Option<NormKind>,
    pub method: Option<Method>,
    pub u_mode: Option<UMode>,
    pub width_c: Option<f64>,
    pub source: Option<Source>,
    pub samples: Option<usize>,
    pub p_max: Option<usize>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

fn bad(entry: &Entry, bound: &str) -> CliError {
    let at = if entry.line > 0 {
        format!(" (line {})", entry.line)
    } else {
        String::new()
    };
    CliError::Usage(format!("invalid `{}` = `{}`{at}: {bound}", entry.key, entry.value))
}

fn scalar<T: FromStr>(e: &Entry, bound: &str) -> Result<T, CliError> {
    e.value.trim().parse().map_err(|_| bad(e, bound))
}

fn count(e: &Entry, min: usize) -> Result<usize, CliError> {
    let bound = format!("must be an integer >= {min}");
    let v: usize = scalar(e, &bound)?;
    if v < min {
        return Err(bad(e, &bound));
    }
    Ok(v)
}

fn positive(e: &Entry) -> Result<f64, CliError> {
    let v: f64 = scalar(e, "must be a finite number > 0")?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(bad(e, "must be a finite number > 0"));
    }
    Ok(v)
}

fn path(e: &Entry) -> Result<PathBuf, CliError> {
    if e.value.is_empty() {
        return Err(bad(e, "must be a non-empty path"));
    }
    Ok(PathBuf::from(&e.value))
}

impl RunConfig {
    /// Validates `entries`; later entries with the same key replace earlier ones.
    pub fn from_entries(entries: &[Entry]) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for e in entries {
            cfg.set(e)?;
        }
        cfg.ensemble()?;
        Ok(cfg)
    }

    fn set(&mut self, e: &Entry) -> Result<(), CliError> {
        let key = e.key.as_str();
        if ENSEMBLE_KEYS.contains(&key) {
            self.ensemble_entries.retain(|x| x.key != key);
            self.ensemble_entries.push(e.clone());
            return Ok(());
        }
        match key {
            "subcommand" => {
                if !SUBCOMMANDS.contains(&e.value.as_str()) {
                    return Err(bad(e, &format!("must be one of {}", SUBCOMMANDS.join(", "))));
                }
                self.subcommand = Some(e.value.clone());
            }
            "master_seed" => self.master_seed = Some(scalar(e, "must be an unsigned 64-bit integer")?),
            "n" => self.n = Some(count(e, 1)?),
            "n_grid" => {
                let grid: Vec<usize> =
                    kv::parse_list(&e.value).map_err(|_| bad(e, "must be a comma-separated list of integers"))?;
                if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(bad(e, "must be a non-empty, strictly increasing list of positive integers"));
                }
                self.n_grid = Some(grid);
            }
            "A" => self.a = Some(positive(e)?),
            "A_grid" => {
                let grid: Vec<f64> =
                    kv::parse_list(&e.value).map_err(|_| bad(e, "must be a comma-separated list of numbers"))?;
                if grid.is_empty() || grid.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                    return Err(bad(e, "must be a non-empty list of finite numbers > 0"));
                }
                self.a_grid = Some(grid);
            }
            "dim" => self.dim = Some(count(e, 2)?),
            "eps" => {
                let v: f64 = scalar(e, "must lie in (0, 1]")?;
                if !(v > 0.0 && v <= 1.0) {
                    return Err(bad(e, "must lie in (0, 1]"));
                }
                self.eps = Some(v);
            }
            "saturation_T" => self.saturation_t = Some(count(e, 1)?),
            "probes" => self.probes = Some(count(e, 1)?),
            "trials" => self.trials = Some(count(e, 1)? as u64),
            "rtol" => self.rtol = Some(positive(e)?),
            "max_iter" => self.max_iter = Some(count(e, 1)?),
            "kind" => self.kind = Some(e.value.parse().map_err(|_| bad(e, "must be spectral, one or inf"))?),
            "method" => {
                self.method = Some(match e.value.as_str() {
                    "exact" => Method::Exact,
                    "power" => Method::Power,
                    _ => return Err(bad(e, "must be exact or power")),
                })
            }
            "u_mode" => {
                self.u_mode = Some(
                    e.value
                        .parse()
                        .map_err(|_| bad(e, "must be first_basis, uniform_diagonal or seeded_random"))?,
                )
            }
            "width_c" => {
                let v: f64 = scalar(e, "must be a finite number >= 0")?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(bad(e, "must be a finite number >= 0"));
                }
                self.width_c = Some(v);
            }
            "source" => {
                self.source = Some(match e.value.as_str() {
                    "scalar" => Source::Scalar,
                    "row_norm" => Source::RowNorm,
                    _ => return Err(bad(e, "must be scalar or row_norm")),
                })
            }
            "samples" => self.samples = Some(count(e, 1)?),
            "p_max" => {
                let v = count(e, 1)?;
                if v > opnorm_core::diagnostics::MAX_MOMENT_ORDER {
                    return Err(bad(e, "must be at most 20"));
                }
                self.p_max = Some(v);
            }
            "input" => self.input = Some(path(e)?),
            "output" => self.output = Some(path(e)?),
            "csv" => self.csv = Some(path(e)?),
            _ => return Err(CliError::Usage(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Ensemble built from the given keys with defaults for the rest.
    pub fn ensemble(&self) -> Result<EnsembleSpec, CliError> {
        let section = Section {
            name: "config".into(),
            entries: self.ensemble_entries.clone(),
        };
        Ok(EnsembleSpec::from_section(&section)?)
    }

    /// Effective configuration in echo order; `with_ensemble` adds the
    /// fully resolved ensemble keys.
    pub fn echo(&self, with_ensemble: bool) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        let list = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let path_str = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        push("subcommand", self.subcommand.clone());
        push("master_seed", self.master_seed.map(|s| s.to_string()));
        if with_ensemble {
            let spec = self.ensemble().expect("validated at construction");
            for (k, v) in spec.to_pairs() {
                push(k, Some(v));
            }
        }
        push("n", self.n.map(|v| v.to_string()));
        push("n_grid", self.n_grid.as_deref().map(kv::fmt_list));
        push("A", self.a.map(|v| v.to_string()));
        push("A_grid", self.a_grid.as_deref().map(list));
        push("dim", self.dim.map(|v| v.to_string()));
        push("eps", self.eps.map(|v| v.to_string()));
        push("saturation_T", self.saturation_t.map(|v| v.to_string()));
        push("probes", self.probes.map(|v| v.to_string()));
        push("trials", self.trials.map(|v| v.to_string()));
        push("rtol", self.rtol.map(|v| v.to_string()));
        push("max_iter", self.max_iter.map(|v| v.to_string()));
        push("kind", self.kind.map(|k| k.name().to_string()));
        push("method", self.method.map(|m| m.name().to_string()));
        push("u_mode", self.u_mode.map(|m| m.name().to_string()));
        push("width_c", self.width_c.map(|v| v.to_string()));
        push("source", self.source.map(|s| s.name().to_string()));
        push("samples", self.samples.map(|v| v.to_string()));
        push("p_max", self.p_max.map(|v| v.to_string()));
        push("input", path_str(&self.input));
        push("output", path_str(&self.output));
        push("csv", path_str(&self.csv));
        out
    }
}

/// Config entries from a file: the `[config]` section when present
/// (so reports can be replayed), otherwise the top level.
pub fn read_entries(path: &Path) -> Result<Vec<Entry>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let doc = Document::parse(&text)?;
    let section = doc.section("config").unwrap_or_else(|| doc.top());
    for e in &section.entries {
        if !RUN_KEYS.contains(&e.key.as_str()) && !ENSEMBLE_KEYS.contains(&e.key.as_str()) {
            return Err(CliError::Usage(format!("unknown key `{}` (line {})", e.key, e.line)));
        }
    }
    Ok(section.entries.clone())
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    RunConfig::from_entries(&read_entries(path)?)
}
