//! Statistical oracles for the ensembles, diagnostics and Monte Carlo runs.

use opnorm_core::diagnostics::{
    assess_samples, empirical_survival, fit_tail_params, psi2_estimate, row_norm_samples, union_bound_profile,
};
use opnorm_core::stats::ks_statistic;
use opnorm_core::{
    fixed_vector_tail, overwhelming_decay_check, sample_matrix, tail_params_of, tail_probability, tw_window_fraction,
    EnsembleSampler, EnsembleSpec, RateKind, RowMixer, ScalarDist, UMode,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

const GAUSS: ScalarDist = ScalarDist::Gaussian { sigma: 1.0 };

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn common_factor_correlation_structure() {
    let spec = EnsembleSpec::IndependentRows {
        base: GAUSS,
        mixer: RowMixer::CommonFactor { load: 0.5 },
    };
    let m = sample_matrix(&spec, 10_000, 2, 100).unwrap();
    let (c0, c1) = (m.column(0), m.column(1));
    let within = correlation(&c0, &c1);
    let across = correlation(&c0[..9_999], &c0[1..]);
    // Standard error of a sample correlation at 10⁴ pairs is about 0.01.
    assert!((within - 0.5).abs() < 0.04, "{within}");
    assert!(across.abs() < 0.04, "{across}");
    let var: f64 = c0.iter().map(|x| x * x).sum::<f64>() / c0.len() as f64;
    assert!((var - 1.0).abs() < 0.05, "{var}");
}

#[test]
fn entries_have_zero_mean() {
    for dist in [
        GAUSS,
        ScalarDist::Rademacher,
        ScalarDist::UniformSym { half_width: 2.0 },
        ScalarDist::TruncGaussian { sigma: 1.0, cap: 1.5 },
    ] {
        let xs = dist.draw(100_000, 101).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 5.0 * dist.scale() / 100_000f64.sqrt(), "{dist:?}: {mean}");
    }
}

#[test]
fn empirical_tails_respect_declared_constants() {
    let t_grid: Vec<f64> = (1..=40).map(|i| i as f64 * 0.1).collect();
    for dist in [
        GAUSS,
        ScalarDist::Gaussian { sigma: 0.5 },
        ScalarDist::Rademacher,
        ScalarDist::UniformSym { half_width: 1.5 },
        ScalarDist::TruncGaussian { sigma: 1.0, cap: 1.0 },
        ScalarDist::TruncGaussian { sigma: 1.0, cap: 3.0 },
    ] {
        let params = tail_params_of(&dist).unwrap();
        let survival = empirical_survival(&dist.draw(200_000, 102).unwrap(), &t_grid).unwrap();
        for (t, s) in t_grid.iter().zip(&survival) {
            let bound = params.prefactor * (-params.exponent * t * t).exp();
            assert!(*s <= bound + 0.002, "{dist:?} at t = {t}: {s} > {bound}");
        }
    }
}

#[test]
fn rotation_preserves_row_norm_law() {
    let base = ScalarDist::UniformSym { half_width: 1.0 };
    let plain = row_norm_samples(&EnsembleSpec::IidEntries(base), 30, 10_000, 103).unwrap();
    let rotated = row_norm_samples(
        &EnsembleSpec::IndependentRows {
            base,
            mixer: RowMixer::FixedRotation { seed: 9 },
        },
        30,
        10_000,
        104,
    )
    .unwrap();
    // Two-sample KS critical value at α = 0.001 is 1.95·√(2/10⁴) ≈ 0.028.
    let d = ks_statistic(&plain, &rotated);
    assert!(d < 0.028, "{d}");
}

#[test]
fn rotated_rows_are_not_coordinatewise_uniform() {
    let sampler = EnsembleSampler::new(
        &EnsembleSpec::IndependentRows {
            base: ScalarDist::Rademacher,
            mixer: RowMixer::FixedRotation { seed: 9 },
        },
        1,
        16,
    )
    .unwrap();
    let row = sampler.first_row(1);
    assert!(row.iter().any(|x| (x.abs() - 1.0).abs() > 1e-6));
    let norm2: f64 = row.iter().map(|x| x * x).sum();
    assert!((norm2 - 16.0).abs() < 1e-9);
}

#[test]
fn doubling_sigma_doubles_the_matrix() {
    let one = sample_matrix(&EnsembleSpec::IidEntries(GAUSS), 9, 7, 105).unwrap();
    let two = sample_matrix(&EnsembleSpec::IidEntries(ScalarDist::Gaussian { sigma: 2.0 }), 9, 7, 105).unwrap();
    assert_eq!(two, one.scaled(2.0));
}

#[test]
fn gaussian_survival_at_two() {
    let xs = GAUSS.draw(1_000_000, 106).unwrap();
    let s = empirical_survival(&xs, &[2.0]).unwrap()[0];
    let exact = 1.0 - erf(2.0_f64.sqrt());
    assert!((s - exact).abs() < 0.001, "{s} vs {exact}");
}

#[test]
fn tail_fit_separates_gaussian_from_student_t() {
    let gauss = fit_tail_params(&GAUSS.draw(1_000_000, 107).unwrap(), 0.5, 0.999).unwrap();
    assert!(gauss.r_squared >= 0.98, "{}", gauss.r_squared);
    let heavy_samples = ScalarDist::StudentT { dof: 3.0 }.draw(1_000_000, 108).unwrap();
    let heavy = fit_tail_params(&heavy_samples, 0.5, 0.999).unwrap();
    assert!(heavy.r_squared < gauss.r_squared);
    let (_, verdict) = assess_samples(&heavy_samples, 0.95, 0.5).unwrap();
    assert!(!verdict.accepted);
    assert!(verdict.reason.contains("curvature"), "{}", verdict.reason);
}

/// `E max_{i≤n} |Z_i| = ∫₀^∞ 1 − erf(t/√2)^n dt` by the trapezoid rule.
fn gaussian_expected_max(n: usize) -> f64 {
    let h = 1e-4;
    let f = |t: f64| 1.0 - erf(t / std::f64::consts::SQRT_2).powi(n as i32);
    let steps = (12.0 / h) as usize;
    (0..steps).map(|i| 0.5 * h * (f(i as f64 * h) + f((i + 1) as f64 * h))).sum()
}

#[test]
fn union_bound_profile_matches_quadrature() {
    let grid = [10, 100, 1000];
    let profile = union_bound_profile(&GAUSS, &grid, 4000, 109).unwrap();
    for (&n, &p) in grid.iter().zip(&profile) {
        let oracle = gaussian_expected_max(n) / (n as f64).ln().sqrt();
        assert!((p - oracle).abs() < 0.02 * oracle, "n = {n}: {p} vs {oracle}");
        assert!((p - std::f64::consts::SQRT_2).abs() < 0.25 * std::f64::consts::SQRT_2);
    }
    let heavy = union_bound_profile(&ScalarDist::StudentT { dof: 3.0 }, &grid, 4000, 110).unwrap();
    assert!(heavy[0] < heavy[1] && heavy[1] < heavy[2], "{heavy:?}");
}

#[test]
fn gaussian_row_norm_is_chi() {
    let n = 100;
    let norms = row_norm_samples(&EnsembleSpec::IidEntries(GAUSS), n, 20_000, 111).unwrap();
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    let oracle = std::f64::consts::SQRT_2 * (ln_gamma((n as f64 + 1.0) / 2.0) - ln_gamma(n as f64 / 2.0)).exp();
    assert!((oracle - 9.975).abs() < 1e-3);
    // sd of χ₁₀₀ is about 0.707, so the mean's standard error is 0.005.
    assert!((mean - oracle).abs() < 0.025, "{mean} vs {oracle}");
}

#[test]
fn psi2_gaussian_matches_closed_form() {
    let xs = GAUSS.draw(1_000_000, 112).unwrap();
    let quarter = psi2_estimate(&xs, 0.25).unwrap().value;
    assert!((1.40..=1.43).contains(&quarter), "{quarter}");
    assert!((quarter - 2f64.sqrt()).abs() < 0.01);
    let values: Vec<f64> = [0.05, 0.1, 0.2, 0.3].iter().map(|&b| psi2_estimate(&xs, b).unwrap().value).collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]), "{values:?}");
    for (&b, &v) in [0.05_f64, 0.1, 0.2, 0.3].iter().zip(&values) {
        let exact = 1.0 / (1.0 - 2.0 * b).sqrt();
        assert!((v - exact).abs() < 0.02 * exact, "b = {b}: {v} vs {exact}");
    }
}

#[test]
fn fixed_vector_tail_is_chi_square() {
    // For unit u, ‖Mu‖² is χ² with n degrees of freedom.
    let spec = EnsembleSpec::IidEntries(GAUSS);
    let (n, a, trials) = (25, 1.2, 20_000);
    let chi = ChiSquared::new(n as f64).unwrap();
    let exact = 1.0 - chi.cdf(a * a * n as f64);
    assert!((exact - 0.0716).abs() < 5e-4, "{exact}");
    for mode in [UMode::FirstBasis, UMode::UniformDiagonal, UMode::SeededRandom] {
        let est = fixed_vector_tail(&spec, n, mode, a, trials, 113).unwrap();
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((est.p_hat - exact).abs() < 4.0 * se, "{mode:?}: {} vs {exact}", est.p_hat);
        assert!(est.ci_low <= exact && exact <= est.ci_high);
    }
    let far = fixed_vector_tail(&spec, n, UMode::FirstBasis, 2.0, 2_000, 114).unwrap();
    assert_eq!(far.hits, 0);
    assert_eq!(far.p_hat, 0.0);
    assert!((far.ci_high - 3.0 / 2_000.0).abs() < 1e-15);
}

#[test]
fn tail_estimates_are_seed_reproducible() {
    let spec = EnsembleSpec::IidEntries(GAUSS);
    let a = tail_probability(&spec, 64, 2.5, 50, 115).unwrap();
    let b = tail_probability(&spec, 64, 2.5, 50, 115).unwrap();
    assert_eq!(a, b);
    let low = tail_probability(&spec, 64, 1.5, 50, 115).unwrap();
    assert!(low.p_hat >= a.p_hat);
}

#[test]
fn tiny_threshold_gives_degenerate_certificate() {
    let cert = overwhelming_decay_check(&EnsembleSpec::IidEntries(GAUSS), 0.1, &[4, 8, 16], 200, 116).unwrap();
    assert!(cert.p_hat.iter().all(|&p| p == 1.0));
    assert!(cert.degenerate);
    assert!(!cert.monotone);
    assert_ne!(cert.rate_kind, RateKind::Bound);
}

#[test]
fn edge_window_holds_most_mass() {
    let fraction = tw_window_fraction(200, 100, 6.0, 117).unwrap();
    assert!(fraction >= 0.9, "{fraction}");
}
