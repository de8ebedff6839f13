//! Operator norms: the Jacobi-based exact oracle, power iteration for large
//! matrices, and closed forms for the induced 1- and ∞-norms.

use crate::error::{Error, Result};
use crate::jacobi::symmetric_eigenvalues;
use crate::matrix::{norm2, Matrix};
use crate::rng::{rng_from_seed, uniform_sphere_point};

/// Largest dimension accepted by [`opnorm_exact`].
pub const EXACT_DIM_LIMIT: usize = 512;

/// Off-diagonal stopping tolerance of the Jacobi oracle, relative to `‖MᵀM‖_F`.
pub const JACOBI_REL_TOL: f64 = 1e-12;

const FALLBACK_SEED: u64 = 0x5e_ed0f_f411_bac4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    /// `a = b = 2`: the largest singular value.
    Spectral,
    /// `a = b = 1`: maximum absolute column sum.
    One,
    /// `a = b = ∞`: maximum absolute row sum.
    Inf,
}

impl NormKind {
    pub fn name(&self) -> &'static str {
        match self {
            NormKind::Spectral => "spectral",
            NormKind::One => "one",
            NormKind::Inf => "inf",
        }
    }

    /// The vector norm this operator norm is induced by.
    pub fn vector_norm(&self, v: &[f64]) -> f64 {
        match self {
            NormKind::Spectral => norm2(v),
            NormKind::One => v.iter().map(|x| x.abs()).sum(),
            NormKind::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" | "2" => Ok(NormKind::Spectral),
            "one" | "1" => Ok(NormKind::One),
            "inf" => Ok(NormKind::Inf),
            other => Err(Error::param("kind", format!("unknown norm kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerResult {
    pub value: f64,
    pub iterations: usize,
    /// Relative change of the estimate on the final iteration.
    pub residual: f64,
}

fn check_finite(m: &Matrix) -> Result<()> {
    if m.as_slice().iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Data("matrix has non-finite entries".into()))
    }
}

/// `σ_max(M) = λ_max(MᵀM)^{1/2}` from a full Jacobi eigendecomposition.
///
/// The Gram matrix of the smaller side is decomposed; it has the same
/// nonzero spectrum as `MᵀM`.
pub fn opnorm_exact(m: &Matrix) -> Result<f64> {
    let dim = m.n_rows().max(m.n_cols());
    if dim > EXACT_DIM_LIMIT {
        return Err(Error::Scale {
            dim,
            limit: EXACT_DIM_LIMIT,
        });
    }
    check_finite(m)?;
    let (n, gram) = m.small_gram();
    let eig = symmetric_eigenvalues(gram, n, JACOBI_REL_TOL)?;
    let top = eig.into_iter().fold(0.0_f64, f64::max);
    Ok(top.max(0.0).sqrt())
}

/// Largest singular value by alternating power iteration on `M` and `Mᵀ`.
///
/// Each iteration forms `w = Mv` and `z = Mᵀw`; `‖w‖` and `‖z‖/‖w‖` are two
/// successive lower bounds on `σ_max`, and the iteration stops once their
/// relative gap is at most `rtol`. The start vector is the normalized
/// all-ones vector, replaced by a fixed-seed random unit vector when its
/// image is numerically null.
pub fn opnorm_power(m: &Matrix, rtol: f64, max_iter: usize) -> Result<PowerResult> {
    if !(rtol > 0.0) {
        return Err(Error::param("rtol", format!("must be > 0, got {rtol}")));
    }
    if max_iter == 0 {
        return Err(Error::param("max_iter", "must be at least 1"));
    }
    check_finite(m)?;
    let fro = m.frobenius_norm();
    if fro == 0.0 {
        return Ok(PowerResult {
            value: 0.0,
            iterations: 1,
            residual: 0.0,
        });
    }

    let (rows, cols) = (m.n_rows(), m.n_cols());
    let mut v = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut w = vec![0.0; rows];
    let mut z = vec![0.0; cols];
    m.mul_vec_into(&v, &mut w);
    if norm2(&w) <= 1e-14 * fro {
        v = uniform_sphere_point(&mut rng_from_seed(FALLBACK_SEED), cols);
    }

    let mut estimate = 0.0;
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iter {
        m.mul_vec_into(&v, &mut w);
        let forward = norm2(&w);
        if forward == 0.0 {
            // v landed in the null space; restart from a fresh direction.
            v = uniform_sphere_point(&mut rng_from_seed(FALLBACK_SEED ^ iter as u64), cols);
            continue;
        }
        m.tmul_vec_into(&w, &mut z);
        let znorm = norm2(&z);
        let backward = znorm / forward;
        estimate = backward;
        residual = (backward - forward) / backward;
        z.iter().zip(v.iter_mut()).for_each(|(zi, vi)| *vi = zi / znorm);
        if residual <= rtol {
            return Ok(PowerResult {
                value: backward,
                iterations: iter,
                residual,
            });
        }
    }
    Err(Error::Convergence {
        estimate,
        iterations: max_iter,
        residual,
    })
}

/// Induced 1-norm (max column sum) or ∞-norm (max row sum).
pub fn opnorm_closed(m: &Matrix, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Spectral => Err(Error::Kind("spectral")),
        NormKind::One => {
            let mut sums = vec![0.0; m.n_cols()];
            for row in m.rows() {
                sums.iter_mut().zip(row).for_each(|(s, x)| *s += x.abs());
            }
            Ok(sums.into_iter().fold(0.0, f64::max))
        }
        NormKind::Inf => Ok(m
            .rows()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)),
    }
}

/// Operator norm of any kind, using the exact oracle for the spectral case.
pub fn opnorm(m: &Matrix, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Spectral => opnorm_exact(m),
        _ => opnorm_closed(m, kind),
    }
}

/// `‖Mu‖₂` for a unit vector `u`.
pub fn mat_vec_image_norm(m: &Matrix, u: &[f64]) -> Result<f64> {
    if u.len() != m.n_cols() {
        return Err(Error::Shape {
            expected: m.n_cols(),
            found: u.len(),
        });
    }
    let norm = norm2(u);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit { norm });
    }
    Ok(norm2(&m.mul_vec(u)))
}
