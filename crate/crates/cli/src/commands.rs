//! One function per subcommand. Each fills its defaults into the config
//! before running so the echoed config replays the same computation.

use std::io::Write;
use std::path::Path;

use opnorm_core::diagnostics::{
    assess_samples, moment_ratio_profile, read_samples, row_norm_samples, DEFAULT_CURVATURE_THRESHOLD,
    DEFAULT_R2_THRESHOLD,
};
use opnorm_core::experiments::{fixed_vector_tail_grid, sweep_csv, sweep_rows, tail_grid, DEFAULT_A_GRID};
use opnorm_core::kv::{fmt_f64, Writer};
use opnorm_core::report::{DiagnosticsSummary, WindowResult};
use opnorm_core::specnorm::EXACT_DIM_LIMIT;
use opnorm_core::{
    audit_coverage_check, build_net, cardinality_bounds, opnorm_closed, opnorm_exact, opnorm_power, sample_matrix,
    tail_params_of, tw_window_fraction, write_report, DecayCertificate, EnsembleSpec, ExperimentReport, GrowthFit,
    Matrix, NormKind, Payload,
};

use crate::config::{Method, RunConfig, Source};
use crate::error::CliError;
use crate::matrix_io;

const SEPARATION_SLACK: f64 = 1e-12;

fn io_err(e: std::io::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn missing(key: &str) -> CliError {
    CliError::Usage(format!("missing `{key}`"))
}

fn seed(cfg: &RunConfig) -> Result<u64, CliError> {
    cfg.master_seed.ok_or_else(|| {
        CliError::Usage("missing `master_seed`: pass --seed (stochastic subcommands need an explicit seed)".into())
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Writes the report to `output` or stdout, and the CSV to `csv` when set.
fn emit(
    cfg: &RunConfig,
    with_ensemble: bool,
    payload: Payload,
    csv: Option<String>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let report = ExperimentReport::new(seed(cfg)?, cfg.echo(with_ensemble), payload);
    if let (Some(path), Some(text)) = (&cfg.csv, &csv) {
        write_file(path, text)?;
    }
    match &cfg.output {
        Some(path) => {
            write_report(&report, path)?;
            writeln!(out, "report = {}", path.display()).map_err(io_err)
        }
        None => out.write_all(report.to_text().as_bytes()).map_err(io_err),
    }
}

/// Shortest decimal after rounding to 15 significant digits.
pub fn display_value(x: f64) -> String {
    let rounded: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    format!("{rounded}")
}

fn generated_matrix(cfg: &RunConfig) -> Result<Matrix, CliError> {
    let spec = cfg.ensemble()?;
    let n = cfg.n.ok_or_else(|| missing("n"))?;
    let seed = match spec {
        EnsembleSpec::AllOnes => cfg.master_seed.unwrap_or(0),
        _ => seed(cfg)?,
    };
    Ok(sample_matrix(&spec, n, n, seed)?)
}

pub fn gen(cfg: &mut RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let text = matrix_io::to_text(&generated_matrix(cfg)?);
    match &cfg.output {
        Some(path) => write_file(path, &text),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

pub fn norm(cfg: &mut RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let m = match &cfg.input {
        Some(path) => matrix_io::read(path)?,
        None => generated_matrix(cfg)?,
    };
    let kind = *cfg.kind.get_or_insert(NormKind::Spectral);
    let value = match kind {
        NormKind::Spectral => {
            let big = m.n_rows().min(m.n_cols()) > EXACT_DIM_LIMIT;
            let method = *cfg.method.get_or_insert(if big { Method::Power } else { Method::Exact });
            match method {
                Method::Exact => opnorm_exact(&m)?,
                Method::Power => {
                    let rtol = *cfg.rtol.get_or_insert(1e-10);
                    let max_iter = *cfg.max_iter.get_or_insert(100_000);
                    opnorm_power(&m, rtol, max_iter)?.value
                }
            }
        }
        closed => opnorm_closed(&m, closed)?,
    };
    writeln!(out, "{}", display_value(value)).map_err(io_err)
}

pub fn net(cfg: &mut RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let dim = cfg.dim.ok_or_else(|| missing("dim"))?;
    let eps = cfg.eps.ok_or_else(|| missing("eps"))?;
    let seed = seed(cfg)?;
    let saturation = *cfg.saturation_t.get_or_insert(10_000);
    let probes = *cfg.probes.get_or_insert(100_000);
    let mut net = build_net(dim, eps, seed, saturation)?;
    let separation = net.min_separation();
    let separated = separation >= eps - SEPARATION_SLACK;
    let coverage = audit_coverage_check(&mut net, probes, seed.wrapping_add(1))?;
    let bounds = cardinality_bounds(dim, eps)?;
    if let Some(path) = &cfg.output {
        net.write(path)?;
    }
    let mut w = Writer::new();
    w.kv("count", net.len())
        .float("min_separation", separation)
        .kv("separation_ok", separated)
        .float("coverage", coverage)
        .float("packing_ratio", bounds.packing_ratio);
    if let Some(path) = &cfg.output {
        w.kv("net_file", path.display());
    }
    out.write_all(w.finish().as_bytes()).map_err(io_err)?;
    if !separated {
        return Err(CliError::Runtime(format!(
            "separation audit failed: min distance {} < eps {eps}",
            fmt_f64(separation)
        )));
    }
    Ok(())
}

pub fn tails(cfg: &mut RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = cfg.ensemble()?;
    let master = seed(cfg)?;
    let n = *cfg.n.get_or_insert(100);
    let trials = *cfg.trials.get_or_insert(1000);
    let default_grid = cfg.a.map_or_else(|| DEFAULT_A_GRID.to_vec(), |a| vec![a]);
    let grid = cfg.a_grid.get_or_insert(default_grid).clone();
    let estimates = match cfg.u_mode {
        Some(mode) => fixed_vector_tail_grid(&spec, n, mode, &grid, trials, master)?,
        None => tail_grid(&spec, n, &grid, trials, master)?,
    };
    emit(cfg, true, Payload::TailEstimates(estimates), None, out)
}

fn sweep_setup(cfg: &mut RunConfig, grid: &[usize], trials: u64, a: f64) -> Result<Vec<opnorm_core::SweepRow>, CliError> {
    let spec = cfg.ensemble()?;
    let master = seed(cfg)?;
    let grid = cfg.n_grid.get_or_insert_with(|| grid.to_vec()).clone();
    let trials = *cfg.trials.get_or_insert(trials);
    let a = *cfg.a.get_or_insert(a);
    Ok(sweep_rows(&spec, &grid, a, trials, master)?)
}

pub fn sweep(cfg: &mut RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = sweep_setup(cfg, &[64, 128, 256, 512], 30, 2.0)?;
    let fit = GrowthFit::from_rows(&rows)?;
    emit(cfg, true, Payload::Growth(fit), Some(sweep_csv(&rows)), out)
}

pub fn decay(cfg: &mut RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    if cfg.n_grid.as_ref().is_some_and(|g| g.len() < 2) {
        return Err(CliError::Usage("invalid `n_grid`: decay needs at least 2 sizes".into()));
    }
    let rows = sweep_setup(cfg, &[8, 16, 32, 64], 10_000, 2.5)?;
    let a = cfg.a.expect("filled by sweep_setup");
    let cert = DecayCertificate::from_rows(a, &rows);
    emit(cfg, true, Payload::Decay(cert), Some(sweep_csv(&rows)), out)
}

pub fn diag(cfg: &mut RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = cfg.ensemble()?;
    let source = *cfg.source.get_or_insert(Source::Scalar);
    let p_max = *cfg.p_max.get_or_insert(8);
    let (samples, k_reference) = match (source, &cfg.input) {
        (Source::Scalar, Some(path)) => (read_samples(path)?, None),
        (Source::Scalar, None) => {
            let dist = *spec
                .base_dist()
                .ok_or_else(|| CliError::Usage("invalid `ensemble`: ones has no scalar law".into()))?;
            let count = *cfg.samples.get_or_insert(100_000);
            let reference = tail_params_of(&dist)
                .ok()
                .and_then(|p| p.variance_proxy)
                .map(|s| (s * std::f64::consts::E.powf(1.0 / std::f64::consts::E), s * (2.0 * std::f64::consts::PI).sqrt()));
            (dist.draw(count, seed(cfg)?)?, reference)
        }
        (Source::RowNorm, _) => {
            let n = *cfg.n.get_or_insert(100);
            let count = *cfg.samples.get_or_insert(10_000);
            (row_norm_samples(&spec, n, count, seed(cfg)?)?, None)
        }
    };
    if cfg.master_seed.is_none() {
        // Stored samples: nothing stochastic remains, seed 0 marks the report.
        cfg.master_seed = Some(0);
    }
    let (fit, verdict) = assess_samples(&samples, DEFAULT_R2_THRESHOLD, DEFAULT_CURVATURE_THRESHOLD)?;
    let profile = moment_ratio_profile(&samples, p_max)?;
    let summary = DiagnosticsSummary {
        samples: samples.len(),
        prefactor_hat: fit.as_ref().map(|f| f.prefactor_hat),
        exponent_hat: fit.as_ref().map(|f| f.exponent_hat),
        r_squared: fit.as_ref().map(|f| f.r_squared),
        k_hat: profile.k_hat,
        accepted: verdict.accepted,
        reason: verdict.reason,
        k_reference,
    };
    let with_ensemble = cfg.input.is_none();
    emit(cfg, with_ensemble, Payload::Diagnostics(summary), None, out)
}

pub fn tw(cfg: &mut RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let master = seed(cfg)?;
    let n = *cfg.n.get_or_insert(400);
    let trials = *cfg.trials.get_or_insert(200);
    let width_c = *cfg.width_c.get_or_insert(6.0);
    let fraction = tw_window_fraction(n, trials, width_c, master)?;
    let result = WindowResult {
        n,
        trials,
        width_c,
        fraction,
    };
    emit(cfg, false, Payload::Window(result), None, out)
}
