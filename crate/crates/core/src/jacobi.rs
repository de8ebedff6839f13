//! Cyclic Jacobi eigenvalue solver for dense symmetric matrices.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (unsorted) of the symmetric `n × n` row-major matrix `a`.
///
/// Sweeps rotate every off-diagonal pair in row order until the
/// off-diagonal Frobenius norm is at most `rel_tol · ‖a‖_F`. The input is
/// consumed as workspace.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize, rel_tol: f64) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n, "matrix buffer must be n × n");
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = rel_tol * total;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= target {
            return Ok((0..n).map(|i| a[i * n + i]).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = arp - s * (arq + tau * arp);
                    let new_rq = arq + s * (arp - tau * arq);
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
            }
        }
    }
    if off_norm(&a) <= target {
        return Ok((0..n).map(|i| a[i * n + i]).collect());
    }
    Err(Error::JacobiConvergence { sweeps: MAX_SWEEPS })
}
