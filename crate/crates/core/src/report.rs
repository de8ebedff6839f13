//! Experiment reports in the sectioned key-value text format.
//!
//! ```text
//! schema_version = 1
//! artifact_version = 0.1.0
//! master_seed = 42
//!
//! [config]
//! ...
//!
//! [payload]
//! kind = growth
//! ...
//! ```

use crate::error::{Error, Result};
use crate::experiments::{DecayCertificate, GrowthFit, TailEstimate};
use crate::kv::{fmt_f64, fmt_list, Document, Section, Writer};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

const DECAY_NOTE: &str = "rate fitted as -ln p against n at fixed A; dependence on A versus A^2 not tested";

#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub n: usize,
    pub trials: u64,
    pub width_c: f64,
    pub fraction: f64,
}

/// Scalar sub-Gaussian battery outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSummary {
    pub samples: usize,
    /// `B_hat`, absent when the tail emptied inside the quantile range.
    pub prefactor_hat: Option<f64>,
    /// `b_hat`
    pub exponent_hat: Option<f64>,
    pub r_squared: Option<f64>,
    pub k_hat: f64,
    pub accepted: bool,
    pub reason: String,
    /// `σ·e^{1/e}` and `σ·√(2π)` for a known variance proxy, listed next to `K_hat`.
    pub k_reference: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    TailEstimates(Vec<TailEstimate>),
    Growth(GrowthFit),
    Decay(DecayCertificate),
    Window(WindowResult),
    Diagnostics(DiagnosticsSummary),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub master_seed: u64,
    /// Effective configuration, in key-value form.
    pub config: Vec<(String, String)>,
    pub payload: Payload,
}

impl ExperimentReport {
    pub fn new(master_seed: u64, config: Vec<(String, String)>, payload: Payload) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.to_string(),
            master_seed,
            config,
            payload,
        }
    }

    pub fn to_text(&self) -> String {
        let mut w = Writer::new();
        w.kv("schema_version", self.schema_version)
            .kv("artifact_version", &self.artifact_version)
            .kv("master_seed", self.master_seed);
        w.section("config");
        for (k, v) in &self.config {
            w.kv(k, v);
        }
        w.section("payload");
        write_payload(&mut w, &self.payload);
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        let top = doc.top();
        let config = doc
            .section("config")
            .map(|s| s.entries.iter().map(|e| (e.key.clone(), e.value.clone())).collect())
            .unwrap_or_default();
        let payload = doc.section("payload").ok_or_else(|| Error::Parse {
            line: 0,
            message: "missing [payload] section".into(),
        })?;
        Ok(Self {
            schema_version: top.parse_value("schema_version")?,
            artifact_version: top.require("artifact_version")?.value.clone(),
            master_seed: top.parse_value("master_seed")?,
            config,
            payload: read_payload(payload)?,
        })
    }
}

fn opt_f64(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), fmt_f64)
}

fn read_opt_f64(s: &Section, key: &str) -> Result<Option<f64>> {
    let e = s.require(key)?;
    if e.value == "none" {
        Ok(None)
    } else {
        e.parse().map(Some)
    }
}

fn write_payload(w: &mut Writer, payload: &Payload) {
    match payload {
        Payload::TailEstimates(ts) => {
            w.kv("kind", "tail_estimates")
                .floats("A", &ts.iter().map(|t| t.a).collect::<Vec<_>>())
                .kv("n", fmt_list(&ts.iter().map(|t| t.n).collect::<Vec<_>>()))
                .kv("trials", fmt_list(&ts.iter().map(|t| t.trials).collect::<Vec<_>>()))
                .kv("hits", fmt_list(&ts.iter().map(|t| t.hits).collect::<Vec<_>>()))
                .floats("p_hat", &ts.iter().map(|t| t.p_hat).collect::<Vec<_>>())
                .floats("ci_low", &ts.iter().map(|t| t.ci_low).collect::<Vec<_>>())
                .floats("ci_high", &ts.iter().map(|t| t.ci_high).collect::<Vec<_>>());
        }
        Payload::Growth(g) => {
            w.kv("kind", "growth")
                .kv("n_grid", fmt_list(&g.n_grid))
                .floats("mean_norms", &g.mean_norms)
                .float("slope", g.slope)
                .float("intercept", g.intercept)
                .float("residual_max", g.residual_max);
        }
        Payload::Decay(d) => {
            w.kv("kind", "decay")
                .float("A", d.a)
                .kv("n_grid", fmt_list(&d.n_grid))
                .kv("trials", d.trials)
                .kv("hits", fmt_list(&d.hits))
                .floats("p_hat", &d.p_hat)
                .floats("neg_log_p", &d.neg_log_p)
                .float("c_hat", d.c_hat)
                .float("C_hat", d.c_prefactor_hat)
                .kv("rate_kind", d.rate_kind.name())
                .kv("monotone", d.monotone)
                .kv("degenerate", d.degenerate)
                .kv("note", DECAY_NOTE);
        }
        Payload::Window(r) => {
            w.kv("kind", "window")
                .kv("n", r.n)
                .kv("trials", r.trials)
                .float("width_c", r.width_c)
                .float("fraction", r.fraction);
        }
        Payload::Diagnostics(d) => {
            w.kv("kind", "diagnostics")
                .kv("samples", d.samples)
                .kv("B_hat", opt_f64(d.prefactor_hat))
                .kv("b_hat", opt_f64(d.exponent_hat))
                .kv("r_squared", opt_f64(d.r_squared))
                .float("K_hat", d.k_hat)
                .kv("verdict", if d.accepted { "accept" } else { "reject" })
                .kv("reason", d.reason.replace('\n', " "))
                .kv("K_ref_sigma_e_pow_inv_e", opt_f64(d.k_reference.map(|r| r.0)))
                .kv("K_ref_sigma_sqrt_2pi", opt_f64(d.k_reference.map(|r| r.1)));
        }
    }
}

fn read_payload(s: &Section) -> Result<Payload> {
    let kind = s.require("kind")?.value.as_str();
    Ok(match kind {
        "tail_estimates" => {
            let a: Vec<f64> = s.parse_list("A")?;
            let n: Vec<usize> = s.parse_list("n")?;
            let trials: Vec<u64> = s.parse_list("trials")?;
            let hits: Vec<u64> = s.parse_list("hits")?;
            let p_hat: Vec<f64> = s.parse_list("p_hat")?;
            let lo: Vec<f64> = s.parse_list("ci_low")?;
            let hi: Vec<f64> = s.parse_list("ci_high")?;
            let len = a.len();
            if [n.len(), trials.len(), hits.len(), p_hat.len(), lo.len(), hi.len()]
                .iter()
                .any(|&l| l != len)
            {
                return Err(Error::Parse {
                    line: s.require("A")?.line,
                    message: "tail estimate lists differ in length".into(),
                });
            }
            Payload::TailEstimates(
                (0..len)
                    .map(|i| TailEstimate {
                        a: a[i],
                        n: n[i],
                        trials: trials[i],
                        hits: hits[i],
                        p_hat: p_hat[i],
                        ci_low: lo[i],
                        ci_high: hi[i],
                    })
                    .collect(),
            )
        }
        "growth" => Payload::Growth(GrowthFit {
            n_grid: s.parse_list("n_grid")?,
            mean_norms: s.parse_list("mean_norms")?,
            slope: s.parse_value("slope")?,
            intercept: s.parse_value("intercept")?,
            residual_max: s.parse_value("residual_max")?,
        }),
        "decay" => Payload::Decay(DecayCertificate {
            a: s.parse_value("A")?,
            n_grid: s.parse_list("n_grid")?,
            trials: s.parse_value("trials")?,
            hits: s.parse_list("hits")?,
            p_hat: s.parse_list("p_hat")?,
            neg_log_p: s.parse_list("neg_log_p")?,
            c_hat: s.parse_value("c_hat")?,
            c_prefactor_hat: s.parse_value("C_hat")?,
            rate_kind: s.parse_value("rate_kind")?,
            monotone: s.parse_value("monotone")?,
            degenerate: s.parse_value("degenerate")?,
        }),
        "window" => Payload::Window(WindowResult {
            n: s.parse_value("n")?,
            trials: s.parse_value("trials")?,
            width_c: s.parse_value("width_c")?,
            fraction: s.parse_value("fraction")?,
        }),
        "diagnostics" => {
            let r0 = read_opt_f64(s, "K_ref_sigma_e_pow_inv_e")?;
            let r1 = read_opt_f64(s, "K_ref_sigma_sqrt_2pi")?;
            Payload::Diagnostics(DiagnosticsSummary {
                samples: s.parse_value("samples")?,
                prefactor_hat: read_opt_f64(s, "B_hat")?,
                exponent_hat: read_opt_f64(s, "b_hat")?,
                r_squared: read_opt_f64(s, "r_squared")?,
                k_hat: s.parse_value("K_hat")?,
                accepted: match s.require("verdict")?.value.as_str() {
                    "accept" => true,
                    "reject" => false,
                    other => {
                        return Err(Error::Parse {
                            line: s.require("verdict")?.line,
                            message: format!("bad verdict `{other}`"),
                        })
                    }
                },
                reason: s.require("reason")?.value.clone(),
                k_reference: r0.zip(r1),
            })
        }
        other => {
            return Err(Error::Parse {
                line: s.require("kind")?.line,
                message: format!("unknown payload kind `{other}`"),
            })
        }
    })
}

pub fn write_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_text()).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentReport::from_text(&text)
}
