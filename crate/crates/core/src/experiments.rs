//! Monte Carlo harness for operator-norm concentration.
//!
//! Every batch draws trial `t` from seed `derive_trial_seed(master_seed, t)`
//! and collects per-trial results in trial order, so outputs do not depend
//! on the number of worker threads.

use crate::ensembles::{EnsembleSampler, EnsembleSpec, ScalarDist};
use crate::error::{Error, Result};
use crate::matrix::{norm2, Matrix};
use crate::rng::{derive_trial_seed, rng_from_seed, uniform_sphere_point};
use crate::specnorm::{opnorm_exact, opnorm_power};
use crate::stats::{fit_line, wilson_interval};
use rayon::prelude::*;

/// Largest `n` for which trials use the Jacobi oracle.
pub const EXACT_BACKEND_MAX_N: usize = 128;
pub const POWER_RTOL: f64 = 1e-6;
pub const POWER_MAX_ITER: usize = 10_000;
/// Thresholds bracketing the `≈ 2√n` edge.
pub const DEFAULT_A_GRID: [f64; 7] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0];
/// Grid points with fewer hits are excluded from the decay fit.
pub const MIN_FIT_HITS: u64 = 5;

const SEEDED_U_SALT: u64 = 0x75_5eed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub a: f64,
    pub n: usize,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TailEstimate {
    pub fn from_counts(a: f64, n: usize, hits: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(hits, trials);
        Self {
            a,
            n,
            trials,
            hits,
            p_hat: hits as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub n_grid: Vec<usize>,
    pub mean_norms: Vec<f64>,
    /// Least-squares slope of `log mean_norm` against `log n`.
    pub slope: f64,
    pub intercept: f64,
    pub residual_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCertificate {
    pub a: f64,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub hits: Vec<u64>,
    pub p_hat: Vec<f64>,
    /// `−ln p_hat` (`+∞` at zero hits).
    pub neg_log_p: Vec<f64>,
    /// Rate `c` in `−ln p = c·n − ln C`; see [`RateKind`].
    pub c_hat: f64,
    /// Prefactor `C` matching `c_hat`.
    pub c_prefactor_hat: f64,
    pub rate_kind: RateKind,
    /// `p_hat` never increases along the grid and ends below where it starts.
    pub monotone: bool,
    /// No decay could be fitted (all-zero hits, fewer than two usable
    /// points, or a non-positive rate).
    pub degenerate: bool,
}

/// How [`DecayCertificate::c_hat`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    /// Least squares over the sizes with at least [`MIN_FIT_HITS`] hits.
    Fit,
    /// Only one size resolved: the largest secant rate from it to the
    /// rule-of-three upper bounds at later zero-hit sizes, a conservative
    /// lower estimate of `c`.
    Bound,
    /// Nothing to estimate from.
    None,
}

impl RateKind {
    pub fn name(self) -> &'static str {
        match self {
            RateKind::Fit => "fit",
            RateKind::Bound => "bound",
            RateKind::None => "none",
        }
    }
}

impl std::str::FromStr for RateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fit" => Ok(RateKind::Fit),
            "bound" => Ok(RateKind::Bound),
            "none" => Ok(RateKind::None),
            other => Err(Error::Data(format!("unknown rate kind `{other}`"))),
        }
    }
}

/// One grid point of a sweep: mean norm plus exceedance estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub mean_norm: f64,
    pub tail: TailEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UMode {
    FirstBasis,
    UniformDiagonal,
    SeededRandom,
}

impl std::str::FromStr for UMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first_basis" => Ok(UMode::FirstBasis),
            "uniform_diagonal" => Ok(UMode::UniformDiagonal),
            "seeded_random" => Ok(UMode::SeededRandom),
            other => Err(Error::param("u_mode", format!("unknown mode `{other}`"))),
        }
    }
}

impl UMode {
    pub fn name(&self) -> &'static str {
        match self {
            UMode::FirstBasis => "first_basis",
            UMode::UniformDiagonal => "uniform_diagonal",
            UMode::SeededRandom => "seeded_random",
        }
    }

    pub fn vector(&self, n: usize, master_seed: u64) -> Vec<f64> {
        match self {
            UMode::FirstBasis => {
                let mut u = vec![0.0; n];
                u[0] = 1.0;
                u
            }
            UMode::UniformDiagonal => vec![1.0 / (n as f64).sqrt(); n],
            UMode::SeededRandom => {
                let mut rng = rng_from_seed(derive_trial_seed(master_seed ^ SEEDED_U_SALT, 0));
                uniform_sphere_point(&mut rng, n)
            }
        }
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::param("trials", "must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::param("A", format!("must be finite and > 0, got {a}")))
    }
}

fn check_grid(n_grid: &[usize], min_len: usize) -> Result<()> {
    if n_grid.len() < min_len {
        return Err(Error::param("n_grid", format!("needs at least {min_len} points")));
    }
    if n_grid.contains(&0) || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("n_grid", "must be strictly increasing and positive"));
    }
    Ok(())
}

/// Spectral norm with the per-size backend: Jacobi up to
/// [`EXACT_BACKEND_MAX_N`], power iteration beyond.
pub fn trial_norm(m: &Matrix) -> Result<f64> {
    if m.n_rows().max(m.n_cols()) <= EXACT_BACKEND_MAX_N {
        opnorm_exact(m)
    } else {
        opnorm_power(m, POWER_RTOL, POWER_MAX_ITER).map(|r| r.value)
    }
}

/// Spectral norms of `trials` seeded `n × n` draws, in trial order.
pub fn norm_samples(spec: &EnsembleSpec, n: usize, trials: u64, master_seed: u64) -> Result<Vec<f64>> {
    check_trials(trials)?;
    let sampler = EnsembleSampler::new(spec, n, n)?;
    (0..trials)
        .into_par_iter()
        .map(|t| trial_norm(&sampler.sample(derive_trial_seed(master_seed, t))))
        .collect()
}

fn count_above(values: &[f64], threshold: f64) -> u64 {
    values.iter().filter(|&&v| v > threshold).count() as u64
}

/// `P(‖M‖ > A√n)` for every `A` in `a_grid`, sharing one batch of norms.
pub fn tail_grid(spec: &EnsembleSpec, n: usize, a_grid: &[f64], trials: u64, master_seed: u64) -> Result<Vec<TailEstimate>> {
    a_grid.iter().try_for_each(|&a| check_a(a))?;
    let norms = norm_samples(spec, n, trials, master_seed)?;
    let root_n = (n as f64).sqrt();
    Ok(a_grid
        .iter()
        .map(|&a| TailEstimate::from_counts(a, n, count_above(&norms, a * root_n), trials))
        .collect())
}

pub fn tail_probability(spec: &EnsembleSpec, n: usize, a: f64, trials: u64, master_seed: u64) -> Result<TailEstimate> {
    Ok(tail_grid(spec, n, &[a], trials, master_seed)?[0])
}

/// `P(‖Mu‖ > A√n)` for the fixed unit vector chosen by `u_mode`, on the
/// same trial matrices as [`tail_grid`].
pub fn fixed_vector_tail_grid(
    spec: &EnsembleSpec,
    n: usize,
    u_mode: UMode,
    a_grid: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<Vec<TailEstimate>> {
    check_trials(trials)?;
    a_grid.iter().try_for_each(|&a| check_a(a))?;
    let sampler = EnsembleSampler::new(spec, n, n)?;
    let u = u_mode.vector(n, master_seed);
    let images: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| norm2(&sampler.sample(derive_trial_seed(master_seed, t)).mul_vec(&u)))
        .collect();
    let root_n = (n as f64).sqrt();
    Ok(a_grid
        .iter()
        .map(|&a| TailEstimate::from_counts(a, n, count_above(&images, a * root_n), trials))
        .collect())
}

pub fn fixed_vector_tail(
    spec: &EnsembleSpec,
    n: usize,
    u_mode: UMode,
    a: f64,
    trials: u64,
    master_seed: u64,
) -> Result<TailEstimate> {
    Ok(fixed_vector_tail_grid(spec, n, u_mode, &[a], trials, master_seed)?[0])
}

/// Mean norm and exceedance of `A√n` at each grid size.
pub fn sweep_rows(spec: &EnsembleSpec, n_grid: &[usize], a: f64, trials: u64, master_seed: u64) -> Result<Vec<SweepRow>> {
    check_grid(n_grid, 1)?;
    check_a(a)?;
    n_grid
        .iter()
        .map(|&n| {
            let norms = norm_samples(spec, n, trials, master_seed)?;
            let mean_norm = norms.iter().sum::<f64>() / trials as f64;
            let hits = count_above(&norms, a * (n as f64).sqrt());
            Ok(SweepRow {
                n,
                mean_norm,
                tail: TailEstimate::from_counts(a, n, hits, trials),
            })
        })
        .collect()
}

impl GrowthFit {
    pub fn from_means(n_grid: &[usize], mean_norms: &[f64]) -> Result<Self> {
        check_grid(n_grid, 3)?;
        if mean_norms.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Data("log-log fit needs positive mean norms".into()));
        }
        let x: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
        let y: Vec<f64> = mean_norms.iter().map(|m| m.ln()).collect();
        let line = fit_line(&x, &y).expect("grid has distinct sizes");
        Ok(Self {
            n_grid: n_grid.to_vec(),
            mean_norms: mean_norms.to_vec(),
            slope: line.slope,
            intercept: line.intercept,
            residual_max: line.residual_max,
        })
    }

    pub fn from_rows(rows: &[SweepRow]) -> Result<Self> {
        let n: Vec<usize> = rows.iter().map(|r| r.n).collect();
        let m: Vec<f64> = rows.iter().map(|r| r.mean_norm).collect();
        Self::from_means(&n, &m)
    }
}

/// Log-log growth of the mean operator norm over `n_grid`.
pub fn growth_sweep(spec: &EnsembleSpec, n_grid: &[usize], trials: u64, master_seed: u64) -> Result<GrowthFit> {
    check_grid(n_grid, 3)?;
    let means = n_grid
        .iter()
        .map(|&n| Ok(crate::stats::mean(&norm_samples(spec, n, trials, master_seed)?)))
        .collect::<Result<Vec<f64>>>()?;
    GrowthFit::from_means(n_grid, &means)
}

impl DecayCertificate {
    pub fn from_rows(a: f64, rows: &[SweepRow]) -> Self {
        let trials = rows.first().map_or(0, |r| r.tail.trials);
        let hits: Vec<u64> = rows.iter().map(|r| r.tail.hits).collect();
        let p_hat: Vec<f64> = rows.iter().map(|r| r.tail.p_hat).collect();
        let neg_log_p: Vec<f64> = p_hat.iter().map(|p| -p.ln()).collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .zip(&neg_log_p)
            .filter(|(r, _)| r.tail.hits >= MIN_FIT_HITS)
            .map(|(r, &y)| (r.n as f64, y))
            .unzip();
        let (c_hat, c_prefactor_hat, rate_kind) = match fit_line(&xs, &ys) {
            Some(line) => (line.slope, (-line.intercept).exp(), RateKind::Fit),
            None => match secant_rate_bound(rows) {
                Some((c, prefactor)) => (c, prefactor, RateKind::Bound),
                None => (0.0, 1.0, RateKind::None),
            },
        };
        let monotone = p_hat.windows(2).all(|w| w[1] <= w[0])
            && matches!((p_hat.first(), p_hat.last()), (Some(f), Some(l)) if l < f);
        let degenerate = hits.iter().all(|&h| h == 0) || rate_kind == RateKind::None || !(c_hat > 0.0);
        Self {
            a,
            n_grid: rows.iter().map(|r| r.n).collect(),
            trials,
            hits,
            p_hat,
            neg_log_p,
            c_hat,
            c_prefactor_hat,
            rate_kind,
            monotone,
            degenerate,
        }
    }
}

/// `max_j (ln p₀ − ln p⁺_j) / (n_j − n₀)` from the last size with at least
/// [`MIN_FIT_HITS`] hits to each later zero-hit size, where `p⁺_j` is the
/// rule-of-three bound. Returns the rate and its prefactor.
fn secant_rate_bound(rows: &[SweepRow]) -> Option<(f64, f64)> {
    let i0 = rows.iter().rposition(|r| r.tail.hits >= MIN_FIT_HITS)?;
    let (n0, p0) = (rows[i0].n as f64, rows[i0].tail.p_hat);
    let c = rows[i0 + 1..]
        .iter()
        .filter(|r| r.tail.hits == 0)
        .map(|r| (p0.ln() - r.tail.ci_high.ln()) / (r.n as f64 - n0))
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))))?;
    Some((c, p0 * (c * n0).exp()))
}

/// Exceedance of `A√n` across `n_grid` with a fitted exponential rate.
pub fn overwhelming_decay_check(
    spec: &EnsembleSpec,
    a: f64,
    n_grid: &[usize],
    trials: u64,
    master_seed: u64,
) -> Result<DecayCertificate> {
    check_grid(n_grid, 2)?;
    let rows = sweep_rows(spec, n_grid, a, trials, master_seed)?;
    Ok(DecayCertificate::from_rows(a, &rows))
}

/// Fraction of standard Gaussian `n × n` draws whose largest singular
/// value falls in `[2√n − c·n^{−1/6}, 2√n + c·n^{−1/6}]`, for each `c`.
pub fn tw_window_fractions(n: usize, trials: u64, widths: &[f64], master_seed: u64) -> Result<Vec<f64>> {
    if widths.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::param("width_c", "must be non-negative"));
    }
    let norms = norm_samples(&EnsembleSpec::IidEntries(ScalarDist::gaussian(1.0)), n, trials, master_seed)?;
    let nf = n as f64;
    let center = 2.0 * nf.sqrt();
    let scale = nf.powf(-1.0 / 6.0);
    Ok(widths
        .iter()
        .map(|&c| {
            let half = c * scale;
            norms.iter().filter(|&&s| (s - center).abs() <= half && half > 0.0).count() as f64
                / trials as f64
        })
        .collect())
}

pub fn tw_window_fraction(n: usize, trials: u64, width_c: f64, master_seed: u64) -> Result<f64> {
    Ok(tw_window_fractions(n, trials, &[width_c], master_seed)?[0])
}

/// Plot-ready CSV: `n,mean_norm,p_hat,ci_low,ci_high,trials`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    use crate::kv::fmt_f64;
    let mut out = String::from("n,mean_norm,p_hat,ci_low,ci_high,trials\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            fmt_f64(r.mean_norm),
            fmt_f64(r.tail.p_hat),
            fmt_f64(r.tail.ci_low),
            fmt_f64(r.tail.ci_high),
            r.tail.trials
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> EnsembleSpec {
        EnsembleSpec::IidEntries(ScalarDist::gaussian(1.0))
    }

    #[test]
    fn all_ones_tails_are_deterministic() {
        let t = tail_probability(&EnsembleSpec::AllOnes, 16, 1.0, 10, 1).unwrap();
        assert_eq!((t.hits, t.p_hat), (10, 1.0));
        let t = tail_probability(&EnsembleSpec::AllOnes, 16, 5.0, 10, 1).unwrap();
        assert_eq!((t.hits, t.p_hat), (0, 0.0));
        assert!(t.ci_high <= 3.0 / 10.0);
        let f = fixed_vector_tail(&EnsembleSpec::AllOnes, 9, UMode::UniformDiagonal, 2.0, 5, 3).unwrap();
        assert_eq!(f.p_hat, 1.0);
    }

    #[test]
    fn u_modes_are_unit() {
        for mode in [UMode::FirstBasis, UMode::UniformDiagonal, UMode::SeededRandom] {
            let u = mode.vector(13, 4);
            assert!((norm2(&u) - 1.0).abs() < 1e-14);
        }
        assert_eq!(UMode::SeededRandom.vector(5, 4), UMode::SeededRandom.vector(5, 4));
        assert_eq!("first_basis".parse::<UMode>().unwrap(), UMode::FirstBasis);
    }

    #[test]
    fn all_ones_growth_is_linear() {
        let g = growth_sweep(&EnsembleSpec::AllOnes, &[8, 16, 32, 64], 2, 0).unwrap();
        assert!((g.slope - 1.0).abs() < 1e-9, "{g:?}");
        assert!(g.intercept.abs() < 1e-9);
    }

    #[test]
    fn decay_certificate_degenerate_for_all_ones() {
        let c = overwhelming_decay_check(&EnsembleSpec::AllOnes, 0.5, &[8, 16, 32], 20, 1).unwrap();
        assert!(c.p_hat.iter().all(|&p| p == 1.0));
        assert_eq!(c.c_hat, 0.0);
        assert!(c.degenerate && !c.monotone);
    }

    fn rows_with_hits(grid: &[usize], hits: &[u64], trials: u64) -> Vec<SweepRow> {
        grid.iter()
            .zip(hits)
            .map(|(&n, &h)| SweepRow {
                n,
                mean_norm: 1.0,
                tail: TailEstimate::from_counts(2.5, n, h, trials),
            })
            .collect()
    }

    #[test]
    fn decay_rate_fit_and_bound() {
        let fit = DecayCertificate::from_rows(2.5, &rows_with_hits(&[8, 16], &[100, 10], 1000));
        assert_eq!(fit.rate_kind, RateKind::Fit);
        assert!((fit.c_hat - 10f64.ln() / 8.0).abs() < 1e-12);
        assert!(!fit.degenerate && fit.monotone);

        // 6 hits in 1e4 at n = 8, rule-of-three bound 3e-4 after: rate >= ln 2 / 8.
        let bound = DecayCertificate::from_rows(2.5, &rows_with_hits(&[8, 16, 32], &[6, 0, 0], 10_000));
        assert_eq!(bound.rate_kind, RateKind::Bound);
        assert!((bound.c_hat - 2f64.ln() / 8.0).abs() < 1e-12);
        assert!((bound.c_prefactor_hat - 6e-4 * (bound.c_hat * 8.0).exp()).abs() < 1e-15);
        assert!(!bound.degenerate);

        let empty = DecayCertificate::from_rows(2.5, &rows_with_hits(&[8, 16], &[0, 0], 100));
        assert_eq!(empty.rate_kind, RateKind::None);
        assert!(empty.degenerate);
        let thin = DecayCertificate::from_rows(2.5, &rows_with_hits(&[8, 16], &[3, 0], 100));
        assert_eq!(thin.rate_kind, RateKind::None);
    }

    #[test]
    fn window_width_zero_and_nesting() {
        let f = tw_window_fractions(30, 40, &[0.0, 1.0, 3.0], 2).unwrap();
        assert_eq!(f[0], 0.0);
        assert!(f[1] <= f[2]);
    }

    #[test]
    fn argument_errors() {
        assert!(tail_probability(&gauss(), 4, 0.0, 10, 0).is_err());
        assert!(tail_probability(&gauss(), 4, 1.0, 0, 0).is_err());
        assert!(growth_sweep(&gauss(), &[4, 8], 2, 0).is_err());
        assert!(growth_sweep(&gauss(), &[4, 8, 8], 2, 0).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let rows = sweep_rows(&EnsembleSpec::AllOnes, &[4, 9], 2.0, 3, 0).unwrap();
        let csv = sweep_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,mean_norm,p_hat,ci_low,ci_high,trials");
        assert_eq!(lines.len(), 3);
        let fields: Vec<Vec<f64>> = lines[1..]
            .iter()
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(fields[0][0], 4.0);
        assert!((fields[0][1] - 4.0).abs() < 1e-12 && fields[0][2] == 0.0);
        assert!((fields[1][1] - 9.0).abs() < 1e-12 && fields[1][2] == 1.0);
        assert_eq!(fields[1][5], 3.0);
    }
}
