//! Sub-Gaussian diagnostics on scalar samples.
//!
//! Each of the classical equivalent characterizations gets a concrete
//! estimator: a log-survival regression against `t²` for the tail bound,
//! plug-in moments for the `K√p` growth condition, the empirical
//! `E[exp(b ξ²)]` for the ψ₂ condition, and Monte Carlo maxima for the
//! `√log n` union-bound condition.

use crate::ensembles::{EnsembleSampler, EnsembleSpec, ScalarDist};
use crate::error::{Error, Result};
use crate::matrix::norm2;
use crate::rng::{derive_trial_seed, rng_from_seed};
use crate::stats::fit_line;
use rayon::prelude::*;
use std::path::Path;

/// Quantile levels used by [`fit_tail_params`].
pub const TAIL_GRID_POINTS: usize = 50;
pub const DEFAULT_R2_THRESHOLD: f64 = 0.95;
/// Calibrated between Gaussian (≈0.27) and Student t(10) (≈0.58) survival curves.
pub const DEFAULT_CURVATURE_THRESHOLD: f64 = 0.5;
pub const MIN_TAIL_SAMPLES: usize = 10_000;
pub const MIN_MOMENT_SAMPLES: usize = 10_000;
pub const MAX_MOMENT_ORDER: usize = 20;
const PSI2_EXP_LIMIT: f64 = 700.0;
const PSI2_EXTREME_SHARE: f64 = 0.01;

/// Least-squares fit of `log P(|ξ| > t) = log B − b t²`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub prefactor_hat: f64,
    pub exponent_hat: f64,
    pub r_squared: f64,
    pub t_grid: Vec<f64>,
    pub survival: Vec<f64>,
    /// Set when the fitted exponent is not positive.
    pub non_decaying: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentProfile {
    pub p_values: Vec<usize>,
    /// `(E|ξ|^p)^{1/p} / √p`
    pub ratios: Vec<f64>,
    pub k_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub accepted: bool,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Psi2Flag {
    /// Some `b x²` exceeded the `exp` range.
    Overflow,
    /// A single sample carries a non-negligible share of the sum.
    ExtremeDominated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psi2Estimate {
    /// Sample mean of `exp(b x²)`, or `+∞` when flagged.
    pub value: f64,
    /// Unflagged sample mean (may be `+∞` on overflow).
    pub raw_mean: f64,
    pub flag: Option<Psi2Flag>,
}

fn sorted_abs(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::Data("empty sample buffer".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("non-finite sample".into()));
    }
    let mut a: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    a.sort_by(f64::total_cmp);
    Ok(a)
}

fn survival_sorted(abs_sorted: &[f64], t: f64) -> f64 {
    let below = abs_sorted.partition_point(|&x| x <= t);
    (abs_sorted.len() - below) as f64 / abs_sorted.len() as f64
}

/// Fraction of samples with `|x| > t` at each grid point.
pub fn empirical_survival(samples: &[f64], t_grid: &[f64]) -> Result<Vec<f64>> {
    if t_grid.iter().any(|t| !(*t >= 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("t_grid", "must be strictly increasing and non-negative"));
    }
    let a = sorted_abs(samples)?;
    Ok(t_grid.iter().map(|&t| survival_sorted(&a, t)).collect())
}

/// Regression of `log survival` on `t²` over the points with positive survival.
pub fn fit_log_survival(t_grid: &[f64], survival: &[f64]) -> Result<TailFit> {
    if t_grid.len() != survival.len() {
        return Err(Error::Shape {
            expected: t_grid.len(),
            found: survival.len(),
        });
    }
    let (s, y): (Vec<f64>, Vec<f64>) = t_grid
        .iter()
        .zip(survival)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&t, &p)| (t * t, p.ln()))
        .unzip();
    if s.len() < 3 {
        return Err(Error::InsufficientTail { points: s.len() });
    }
    let line = fit_line(&s, &y).ok_or(Error::InsufficientTail { points: 1 })?;
    let exponent_hat = -line.slope;
    Ok(TailFit {
        prefactor_hat: line.intercept.exp(),
        exponent_hat,
        r_squared: line.r_squared,
        t_grid: t_grid.to_vec(),
        survival: survival.to_vec(),
        non_decaying: !(exponent_hat > 0.0),
    })
}

/// Fits `(B, b)` on a grid of empirical `|x|` quantiles at
/// [`TAIL_GRID_POINTS`] levels evenly spaced in `[q_low, q_high]`.
pub fn fit_tail_params(samples: &[f64], q_low: f64, q_high: f64) -> Result<TailFit> {
    if !(0.5..1.0).contains(&q_low) || !(q_low < q_high && q_high < 1.0) {
        return Err(Error::param(
            "quantiles",
            format!("need 0.5 <= q_low < q_high < 1, got [{q_low}, {q_high}]"),
        ));
    }
    if samples.len() < MIN_TAIL_SAMPLES {
        return Err(Error::param(
            "samples",
            format!("need at least {MIN_TAIL_SAMPLES}, got {}", samples.len()),
        ));
    }
    let a = sorted_abs(samples)?;
    let last = (a.len() - 1) as f64;
    let mut t_grid: Vec<f64> = Vec::with_capacity(TAIL_GRID_POINTS);
    for k in 0..TAIL_GRID_POINTS {
        let q = q_low + (q_high - q_low) * k as f64 / (TAIL_GRID_POINTS - 1) as f64;
        let t = a[(q * last).round() as usize];
        if t_grid.last().map_or(true, |&prev| t > prev) {
            t_grid.push(t);
        }
    }
    let survival: Vec<f64> = t_grid.iter().map(|&t| survival_sorted(&a, t)).collect();
    fit_log_survival(&t_grid, &survival)
}

/// Relative drop of the local decay rate between the lower and upper half
/// of the fitted grid: `1 − b_upper / b_lower`. Near zero for Gaussian
/// shapes, negative for lighter (bounded) tails, approaching one for
/// polynomial tails.
pub fn tail_curvature(fit: &TailFit) -> f64 {
    let (s, y): (Vec<f64>, Vec<f64>) = fit
        .t_grid
        .iter()
        .zip(&fit.survival)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&t, &p)| (t * t, p.ln()))
        .unzip();
    let half = s.len() / 2;
    if half < 2 || s.len() - half < 2 {
        return 0.0;
    }
    let lower = fit_line(&s[..half], &y[..half]);
    let upper = fit_line(&s[half..], &y[half..]);
    match (lower, upper) {
        (Some(lo), Some(hi)) if lo.slope < 0.0 => 1.0 - hi.slope / lo.slope,
        _ => f64::INFINITY,
    }
}

/// Accept/reject decision for a tail fit.
///
/// Rejects a non-decaying fit, then a tail whose decay rate flattens by
/// more than `curvature_threshold`, then a poor linear fit. A fit whose
/// decay steepens (curvature ≤ 0, lighter than Gaussian) is not rejected
/// for low `r²`.
pub fn subgaussian_verdict(fit: &TailFit, r2_threshold: f64, curvature_threshold: f64) -> Verdict {
    if fit.non_decaying {
        return Verdict {
            accepted: false,
            reason: format!("non-decaying tail (b_hat = {:.4})", fit.exponent_hat),
        };
    }
    let curvature = tail_curvature(fit);
    if curvature > curvature_threshold {
        return Verdict {
            accepted: false,
            reason: format!(
                "upward curvature {curvature:.3} exceeds {curvature_threshold}: heavier than Gaussian tail"
            ),
        };
    }
    if fit.r_squared < r2_threshold && curvature > 0.0 {
        return Verdict {
            accepted: false,
            reason: format!("r_squared {:.4} below {r2_threshold}", fit.r_squared),
        };
    }
    let reason = if fit.r_squared < r2_threshold {
        format!(
            "decay steepens (curvature {curvature:.3}): lighter than Gaussian tail, r_squared {:.4}",
            fit.r_squared
        )
    } else {
        format!(
            "Gaussian-shaped tail: b_hat {:.4}, r_squared {:.4}, curvature {curvature:.3}",
            fit.exponent_hat, fit.r_squared
        )
    };
    Verdict {
        accepted: true,
        reason,
    }
}

/// Full battery on raw samples: tail fit over `[0.5, 0.999]` plus verdict.
/// A tail that empties inside the quantile range (atoms / bounded support)
/// is accepted.
pub fn assess_samples(samples: &[f64], r2_threshold: f64, curvature_threshold: f64) -> Result<(Option<TailFit>, Verdict)> {
    match fit_tail_params(samples, 0.5, 0.999) {
        Ok(fit) => {
            let v = subgaussian_verdict(&fit, r2_threshold, curvature_threshold);
            Ok((Some(fit), v))
        }
        Err(Error::InsufficientTail { points }) => Ok((
            None,
            Verdict {
                accepted: true,
                reason: format!(
                    "tail vanishes inside the quantile range ({points} positive grid points): bounded support"
                ),
            },
        )),
        Err(e) => Err(e),
    }
}

/// Empirical `(E|ξ|^p)^{1/p} / √p` for `p = 1..=p_max`.
pub fn moment_ratio_profile(samples: &[f64], p_max: usize) -> Result<MomentProfile> {
    if !(1..=MAX_MOMENT_ORDER).contains(&p_max) {
        return Err(Error::param("p_max", format!("must lie in [1, {MAX_MOMENT_ORDER}]")));
    }
    if samples.len() < MIN_MOMENT_SAMPLES {
        return Err(Error::param(
            "samples",
            format!("need at least {MIN_MOMENT_SAMPLES}, got {}", samples.len()),
        ));
    }
    let logs: Vec<f64> = samples.iter().map(|x| x.abs().ln()).collect();
    let log_n = (samples.len() as f64).ln();
    let mut ratios = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let pf = p as f64;
        let top = logs.iter().fold(f64::NEG_INFINITY, |m, &l| m.max(pf * l));
        let log_mean = if top == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            top + logs.iter().map(|&l| (pf * l - top).exp()).sum::<f64>().ln() - log_n
        };
        let ratio = (log_mean / pf).exp() / pf.sqrt();
        if !ratio.is_finite() {
            return Err(Error::Data(format!("non-finite moment estimate at p = {p}")));
        }
        ratios.push(ratio);
    }
    let k_hat = ratios.iter().copied().fold(0.0, f64::max);
    Ok(MomentProfile {
        p_values: (1..=p_max).collect(),
        ratios,
        k_hat,
    })
}

/// Sample mean of `exp(b x²)`.
///
/// Reported as `+∞` with a flag when an exponent overflows or when one
/// sample holds more than `max(1%, 10/N)` of the sum, the finite-sample
/// signature of a divergent expectation.
pub fn psi2_estimate(samples: &[f64], b: f64) -> Result<Psi2Estimate> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::param("b", format!("must be finite and > 0, got {b}")));
    }
    if samples.is_empty() {
        return Err(Error::Data("empty sample buffer".into()));
    }
    let n = samples.len() as f64;
    let max_arg = samples.iter().fold(0.0_f64, |m, x| m.max(b * x * x));
    if !(max_arg <= PSI2_EXP_LIMIT) {
        return Ok(Psi2Estimate {
            value: f64::INFINITY,
            raw_mean: f64::INFINITY,
            flag: Some(Psi2Flag::Overflow),
        });
    }
    let sum: f64 = samples.iter().map(|x| (b * x * x).exp()).sum();
    let raw_mean = sum / n;
    let share = max_arg.exp() / sum;
    if share > PSI2_EXTREME_SHARE.max(10.0 / n) {
        return Ok(Psi2Estimate {
            value: f64::INFINITY,
            raw_mean,
            flag: Some(Psi2Flag::ExtremeDominated),
        });
    }
    Ok(Psi2Estimate {
        value: raw_mean,
        raw_mean,
        flag: None,
    })
}

/// `E[max_{i≤n} |ξ_i|] / √(log n)` per grid point, by Monte Carlo.
pub fn union_bound_profile(dist: &ScalarDist, n_grid: &[usize], trials: usize, seed: u64) -> Result<Vec<f64>> {
    if n_grid.iter().any(|&n| n < 2) || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("n_grid", "must be increasing with every n >= 2"));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let sampler = dist.sampler()?;
    Ok(n_grid
        .iter()
        .enumerate()
        .map(|(gi, &n)| {
            let grid_seed = derive_trial_seed(seed, gi as u64);
            let maxima: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = rng_from_seed(derive_trial_seed(grid_seed, t as u64));
                    (0..n).fold(0.0_f64, |m, _| m.max(sampler.sample(&mut rng).abs()))
                })
                .collect();
            let mean = maxima.iter().sum::<f64>() / trials as f64;
            mean / (n as f64).ln().sqrt()
        })
        .collect())
}

/// L2 norms of row 0 of `trials` independently generated `n × n` matrices.
pub fn row_norm_samples(spec: &EnsembleSpec, n: usize, trials: usize, seed: u64) -> Result<Vec<f64>> {
    if matches!(spec, EnsembleSpec::AllOnes) {
        return Err(Error::DegenerateEnsemble("all-ones rows are deterministic"));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let sampler = EnsembleSampler::new(spec, n, n)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|t| norm2(&sampler.first_row(derive_trial_seed(seed, t as u64))))
        .collect())
}

/// Reads one decimal value per line (blank lines and `#` comments skipped).
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples(&text)
}

pub fn parse_samples(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let s = line.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let x: f64 = s.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("bad sample `{s}`"),
        })?;
        if !x.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                message: "non-finite sample".into(),
            });
        }
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_direct_count() {
        let s = empirical_survival(&[-1.0, 1.0, 1.0, -1.0], &[0.5, 1.5]).unwrap();
        assert_eq!(s, vec![1.0, 0.0]);
        let s0 = empirical_survival(&[0.0, 0.0, 2.0, -3.0], &[0.0]).unwrap();
        assert_eq!(s0, vec![0.5]);
        assert!(matches!(empirical_survival(&[], &[1.0]), Err(Error::Data(_))));
        assert!(empirical_survival(&[1.0], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn noise_free_fit_recovers_constants() {
        let t: Vec<f64> = (0..40).map(|k| 0.2 + 0.1 * k as f64).collect();
        for (big_b, b) in [(2.0, 0.5), (0.7, 1.3), (5.0, 0.05)] {
            let surv: Vec<f64> = t.iter().map(|x| big_b * (-b * x * x).exp()).collect();
            let fit = fit_log_survival(&t, &surv).unwrap();
            assert!((fit.exponent_hat - b).abs() < 1e-6);
            assert!((fit.prefactor_hat - big_b).abs() < 1e-6);
            assert!(fit.r_squared > 1.0 - 1e-12);
        }
    }

    #[test]
    fn rademacher_tail_is_insufficient() {
        let xs = ScalarDist::Rademacher.draw(20_000, 1).unwrap();
        assert!(matches!(fit_tail_params(&xs, 0.5, 0.999), Err(Error::InsufficientTail { .. })));
        let (fit, verdict) = assess_samples(&xs, DEFAULT_R2_THRESHOLD, DEFAULT_CURVATURE_THRESHOLD).unwrap();
        assert!(fit.is_none() && verdict.accepted);
    }

    #[test]
    fn fit_preconditions() {
        let xs = ScalarDist::gaussian(1.0).draw(20_000, 2).unwrap();
        assert!(fit_tail_params(&xs, 0.4, 0.9).is_err());
        assert!(fit_tail_params(&xs, 0.9, 0.9).is_err());
        assert!(fit_tail_params(&xs[..100], 0.5, 0.9).is_err());
    }

    #[test]
    fn flagged_fit_rejected_for_non_decay() {
        let fit = TailFit {
            prefactor_hat: 1.0,
            exponent_hat: -0.1,
            r_squared: 0.99,
            t_grid: vec![1.0, 2.0, 3.0],
            survival: vec![0.1, 0.2, 0.3],
            non_decaying: true,
        };
        let v = subgaussian_verdict(&fit, 0.95, 0.5);
        assert!(!v.accepted && v.reason.contains("non-decaying"));
    }

    #[test]
    fn moment_examples() {
        let g = ScalarDist::gaussian(1.0).draw(200_000, 3).unwrap();
        let prof = moment_ratio_profile(&g, 4).unwrap();
        assert!((prof.ratios[1] - 1.0 / 2f64.sqrt()).abs() < 0.005);
        let r = ScalarDist::Rademacher.draw(20_000, 3).unwrap();
        let prof = moment_ratio_profile(&r, 6).unwrap();
        for (p, ratio) in prof.p_values.iter().zip(&prof.ratios) {
            assert!((ratio - 1.0 / (*p as f64).sqrt()).abs() < 1e-12);
        }
        assert!((prof.k_hat - 1.0).abs() < 1e-12);
        assert!(moment_ratio_profile(&r, 0).is_err());
        assert!(moment_ratio_profile(&r, 21).is_err());
    }

    #[test]
    fn psi2_examples() {
        let r = ScalarDist::Rademacher.draw(5_000, 4).unwrap();
        let e = psi2_estimate(&r, 1.0).unwrap();
        assert!((e.value - std::f64::consts::E).abs() < 1e-12 && e.flag.is_none());
        let g = ScalarDist::gaussian(1.0).draw(1_000_000, 4).unwrap();
        let half = psi2_estimate(&g, 0.5).unwrap();
        assert!(half.value.is_infinite() && half.flag.is_some());
        let over = psi2_estimate(&[40.0], 1.0).unwrap();
        assert_eq!(over.flag, Some(Psi2Flag::Overflow));
        assert!(psi2_estimate(&r, 0.0).is_err());
    }

    #[test]
    fn union_bound_rademacher_is_exact() {
        let prof = union_bound_profile(&ScalarDist::Rademacher, &[2, 10, 100], 20, 5).unwrap();
        for (v, n) in prof.iter().zip([2.0_f64, 10.0, 100.0]) {
            assert!((v - 1.0 / n.ln().sqrt()).abs() < 1e-15);
        }
        assert!(union_bound_profile(&ScalarDist::Rademacher, &[1, 4], 2, 0).is_err());
        assert!(union_bound_profile(&ScalarDist::Rademacher, &[4, 4], 2, 0).is_err());
    }

    #[test]
    fn row_norms_rademacher_exact() {
        let xs = row_norm_samples(&EnsembleSpec::IidEntries(ScalarDist::Rademacher), 16, 50, 1).unwrap();
        assert!(xs.iter().all(|&x| x == 4.0));
        assert!(matches!(
            row_norm_samples(&EnsembleSpec::AllOnes, 4, 3, 1),
            Err(Error::DegenerateEnsemble(_))
        ));
    }

    #[test]
    fn sample_file_parsing() {
        assert_eq!(parse_samples("1.5\n\n# c\n-2\n").unwrap(), vec![1.5, -2.0]);
        assert!(matches!(parse_samples("1\nx\n"), Err(Error::Parse { line: 2, .. })));
    }
}
