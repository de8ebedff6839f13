//! Independent oracles for the norm routines and ε-nets.

use opnorm_core::{
    audit_coverage_check, build_net, derive_trial_seed, mat_vec_image_norm, net_lower_bound, net_upper_bound,
    opnorm_closed, opnorm_exact, opnorm_power, sample_matrix, EnsembleSpec, EpsNet, Matrix, NormKind, ScalarDist,
};

fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    sample_matrix(&EnsembleSpec::IidEntries(ScalarDist::Gaussian { sigma: 1.0 }), rows, cols, seed).unwrap()
}

/// Largest singular value of a 2×2 matrix from the characteristic polynomial of MᵀM.
fn two_by_two_sigma_max(m: &Matrix) -> f64 {
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let fro2 = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    ((fro2 + (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
}

#[test]
fn exact_matches_two_by_two_closed_form() {
    for t in 0..200 {
        let m = gaussian(2, 2, derive_trial_seed(1, t));
        let oracle = two_by_two_sigma_max(&m);
        assert!((opnorm_exact(&m).unwrap() - oracle).abs() <= 1e-12 * oracle, "trial {t}");
    }
}

#[test]
fn exact_on_rank_one_and_rectangular() {
    let u = [1.0, -2.0, 0.5, 3.0];
    let v = [2.0, 1.0, -1.0];
    let m = Matrix::from_fn(4, 3, |i, j| u[i] * v[j]);
    let oracle = u.iter().map(|x| x * x).sum::<f64>().sqrt() * v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((opnorm_exact(&m).unwrap() - oracle).abs() <= 1e-12 * oracle);
    for t in 0..20 {
        let r = gaussian(7, 3, derive_trial_seed(2, t));
        let a = opnorm_exact(&r).unwrap();
        let b = opnorm_exact(&r.transpose()).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }
}

#[test]
fn exact_trivial_examples() {
    assert_eq!(opnorm_exact(&Matrix::zeros(4, 4)).unwrap(), 0.0);
    assert!((opnorm_exact(&Matrix::identity(5)).unwrap() - 1.0).abs() < 1e-15);
    let two = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert!((opnorm_exact(&two).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn power_iteration_examples() {
    let r = opnorm_power(&Matrix::ones(10, 10), 1e-10, 100).unwrap();
    assert!((r.value - 10.0).abs() < 1e-12);
    assert_eq!(r.iterations, 1);
    let d = opnorm_power(&Matrix::diag(&[3.0, 1.0]), 1e-8, 1000).unwrap();
    assert!((d.value - 3.0).abs() <= 3e-8);
}

/// `max_{x ∈ {±1}^n} ‖Mx‖_∞` by enumerating every sign vertex of the ∞-ball.
fn inf_norm_by_vertices(m: &Matrix) -> f64 {
    let n = m.n_cols();
    (0..1u32 << n)
        .map(|mask| {
            let x: Vec<f64> = (0..n).map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 }).collect();
            m.mul_vec(&x).iter().fold(0.0_f64, |a, v| a.max(v.abs()))
        })
        .fold(0.0, f64::max)
}

/// `max_j ‖M e_j‖_1` over the vertices of the 1-ball.
fn one_norm_by_vertices(m: &Matrix) -> f64 {
    (0..m.n_cols()).map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

#[test]
fn closed_forms_match_vertex_enumeration() {
    for t in 0..10 {
        let m = sample_matrix(&EnsembleSpec::IidEntries(ScalarDist::Rademacher), 8, 8, derive_trial_seed(3, t)).unwrap();
        assert_eq!(opnorm_closed(&m, NormKind::Inf).unwrap(), inf_norm_by_vertices(&m));
        assert_eq!(opnorm_closed(&m, NormKind::One).unwrap(), one_norm_by_vertices(&m));
    }
}

#[test]
fn image_norm_never_exceeds_operator_norm() {
    for t in 0..20 {
        let m = gaussian(6, 6, derive_trial_seed(4, t));
        let raw: Vec<f64> = gaussian(1, 6, derive_trial_seed(5, t)).row(0).to_vec();
        let len = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let u: Vec<f64> = raw.iter().map(|x| x / len).collect();
        let image = mat_vec_image_norm(&m, &u).unwrap();
        assert!(image <= opnorm_exact(&m).unwrap() * (1.0 + 1e-10));
        let first = mat_vec_image_norm(&m, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let col = m.column(0).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert_eq!(first, col);
    }
}

#[test]
fn net_bounds_on_trivial_matrices() {
    let net = build_net(3, 0.5, 11, 2000).unwrap();
    assert_eq!(net_lower_bound(&Matrix::zeros(3, 3), &net).unwrap(), 0.0);
    assert_eq!(net_upper_bound(&Matrix::zeros(3, 3), &net).unwrap(), 0.0);
    assert!((net_upper_bound(&Matrix::identity(3), &net).unwrap() - 2.0).abs() < 1e-12);
    assert!(net_lower_bound(&Matrix::identity(4), &net).is_err());
    for t in 0..20 {
        let m = gaussian(3, 3, derive_trial_seed(6, t));
        assert!(net_lower_bound(&m, &net).unwrap() <= opnorm_exact(&m).unwrap() * (1.0 + 1e-10));
    }
}

#[test]
fn all_ones_net_lower_bound_approaches_n() {
    // For the rank-one all-ones matrix ‖Mv‖ = n⟨v, 1/√n⟩, and a net covering
    // the sphere within eps has a point with ⟨v, 1/√n⟩ ≥ 1 − eps²/2.
    let n = 3;
    let m = Matrix::ones(n, n);
    let mut finest = 0.0;
    for (i, eps) in [0.5, 0.25, 0.1].into_iter().enumerate() {
        let mut net = build_net(n, eps, 20 + i as u64, 20_000).unwrap();
        let coverage = audit_coverage_check(&mut net, 20_000, 30).unwrap();
        let lower = net_lower_bound(&m, &net).unwrap();
        assert!(coverage > 0.999, "eps {eps}: coverage {coverage}");
        assert!(lower <= n as f64 * (1.0 + 1e-12));
        assert!(lower >= n as f64 * (1.0 - eps * eps / 2.0), "eps {eps}: {lower}");
        finest = lower;
    }
    assert!(n as f64 - finest < 0.02);
}

#[test]
fn saturated_net_in_three_dimensions_covers() {
    let mut net = build_net(3, 0.5, 40, 100_000).unwrap();
    let coverage = audit_coverage_check(&mut net, 100_000, 41).unwrap();
    assert!(coverage >= 0.999, "{coverage}");
    assert_eq!(net.audit_coverage(), Some(coverage));
}

#[test]
fn coverage_grows_with_saturation() {
    let mean_coverage = |t: usize| {
        (0..4)
            .map(|s| {
                let mut net = build_net(3, 0.5, 50 + s, t).unwrap();
                audit_coverage_check(&mut net, 20_000, 60 + s).unwrap()
            })
            .sum::<f64>()
            / 4.0
    };
    let c = [mean_coverage(100), mean_coverage(1_000), mean_coverage(10_000)];
    assert!(c[0] <= c[1] && c[1] <= c[2], "{c:?}");
}

#[test]
fn single_point_coverage_is_arc_fraction() {
    // Points within chord 0.1 of e₁ on the circle span the arc 2·2·asin(0.05).
    let mut net = EpsNet::from_points(2, 0.1, &[vec![1.0, 0.0]]).unwrap();
    let coverage = audit_coverage_check(&mut net, 200_000, 70).unwrap();
    let arc = 4.0 * 0.05_f64.asin() / (2.0 * std::f64::consts::PI);
    assert!((coverage - arc).abs() < 5.0 * (arc / 200_000.0).sqrt(), "{coverage} vs {arc}");
}
