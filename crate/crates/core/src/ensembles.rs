//! Seeded random matrix ensembles.
//!
//! Two sub-Gaussian families are provided: matrices with iid entries, and
//! matrices whose rows are drawn independently but whose entries inside a
//! row are mixed (orthogonal rotation or a shared per-row factor). The
//! deterministic all-ones matrix is the control whose norm grows like `n`.

use crate::error::{Error, Result};
use crate::kv::{self, Section};
use crate::matrix::{dot, Matrix};
use crate::rng::{rng_from_seed, TrialRng};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use std::f64::consts::E;

/// Law of a single scalar entry. All variants are symmetric with zero mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarDist {
    Gaussian { sigma: f64 },
    Rademacher,
    UniformSym { half_width: f64 },
    /// Gaussian conditioned on `|x| <= cap` (rejection, no atoms at the cap).
    TruncGaussian { sigma: f64, cap: f64 },
    /// Heavy-tailed negative control.
    StudentT { dof: f64 },
}

/// Tail constants with `P(|ξ| > t) <= prefactor * exp(-exponent * t²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubGaussianParams {
    /// `B`
    pub prefactor: f64,
    /// `b`
    pub exponent: f64,
    /// Variance proxy `σ` with `P(|ξ| > t) <= 2 exp(-t² / 2σ²)`, when known.
    pub variance_proxy: Option<f64>,
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(field, format!("must be finite and > 0, got {v}")))
    }
}

impl ScalarDist {
    pub fn gaussian(sigma: f64) -> Self {
        ScalarDist::Gaussian { sigma }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalarDist::Gaussian { sigma } => positive("sigma", sigma),
            ScalarDist::Rademacher => Ok(()),
            ScalarDist::UniformSym { half_width } => positive("half_width", half_width),
            ScalarDist::TruncGaussian { sigma, cap } => {
                positive("sigma", sigma)?;
                positive("cap", cap)?;
                // Rejection sampling acceptance is erf(cap / σ√2); refuse hopeless rates.
                if cap / sigma < 1e-3 {
                    return Err(Error::param("cap", "cap / sigma below 1e-3"));
                }
                Ok(())
            }
            ScalarDist::StudentT { dof } => positive("dof", dof),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarDist::Gaussian { .. } => "gaussian",
            ScalarDist::Rademacher => "rademacher",
            ScalarDist::UniformSym { .. } => "uniform",
            ScalarDist::TruncGaussian { .. } => "trunc_gaussian",
            ScalarDist::StudentT { .. } => "student_t",
        }
    }

    pub fn is_sub_gaussian(&self) -> bool {
        !matches!(self, ScalarDist::StudentT { .. })
    }

    /// Characteristic scale: σ for the Gaussian variants, the support
    /// bound for bounded laws, 1 for Student t.
    pub fn scale(&self) -> f64 {
        match *self {
            ScalarDist::Gaussian { sigma } | ScalarDist::TruncGaussian { sigma, .. } => sigma,
            ScalarDist::Rademacher | ScalarDist::StudentT { .. } => 1.0,
            ScalarDist::UniformSym { half_width } => half_width,
        }
    }

    pub fn sampler(&self) -> Result<ScalarSampler> {
        self.validate()?;
        Ok(match *self {
            ScalarDist::Gaussian { sigma } => ScalarSampler::Gaussian(sigma),
            ScalarDist::Rademacher => ScalarSampler::Rademacher,
            ScalarDist::UniformSym { half_width } => ScalarSampler::Uniform(half_width),
            ScalarDist::TruncGaussian { sigma, cap } => ScalarSampler::Trunc(sigma, cap),
            ScalarDist::StudentT { dof } => ScalarSampler::StudentT(
                StudentT::new(dof).map_err(|e| Error::param("dof", e.to_string()))?,
            ),
        })
    }

    /// `count` draws from a generator seeded with `seed`.
    pub fn draw(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        let sampler = self.sampler()?;
        let mut rng = rng_from_seed(seed);
        Ok((0..count).map(|_| sampler.sample(&mut rng)).collect())
    }
}

/// Validated, ready-to-draw form of a [`ScalarDist`].
#[derive(Debug, Clone, Copy)]
pub enum ScalarSampler {
    Gaussian(f64),
    Rademacher,
    Uniform(f64),
    Trunc(f64, f64),
    StudentT(StudentT<f64>),
}

impl ScalarSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ScalarSampler::Gaussian(sigma) => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            ScalarSampler::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ScalarSampler::Uniform(h) => (2.0 * rng.random::<f64>() - 1.0) * h,
            ScalarSampler::Trunc(sigma, cap) => loop {
                let z: f64 = StandardNormal.sample(rng);
                let x = sigma * z;
                if x.abs() <= cap {
                    break x;
                }
            },
            ScalarSampler::StudentT(d) => d.sample(rng),
        }
    }
}

/// Sub-Gaussian tail constants for `dist`.
///
/// Bounded laws on `[-h, h]` use `(e, 1/h²)`: below `h` the bound is at
/// least one, above it the tail is empty.
pub fn tail_params_of(dist: &ScalarDist) -> Result<SubGaussianParams> {
    dist.validate()?;
    Ok(match *dist {
        ScalarDist::Gaussian { sigma } => SubGaussianParams {
            prefactor: 2.0,
            exponent: 1.0 / (2.0 * sigma * sigma),
            variance_proxy: Some(sigma),
        },
        ScalarDist::Rademacher => SubGaussianParams {
            prefactor: E,
            exponent: 1.0,
            variance_proxy: Some(1.0),
        },
        ScalarDist::UniformSym { half_width } => SubGaussianParams {
            prefactor: E,
            exponent: 1.0 / (half_width * half_width),
            variance_proxy: Some(half_width),
        },
        ScalarDist::TruncGaussian { sigma, cap } => {
            if cap * cap < 2.0 * sigma * sigma {
                SubGaussianParams {
                    prefactor: E,
                    exponent: 1.0 / (cap * cap),
                    variance_proxy: Some(cap),
                }
            } else {
                // P(|X| > t | |X| <= cap) <= P(|Z| > t) / P(|Z| <= cap).
                let mass = statrs::function::erf::erf(cap / (sigma * std::f64::consts::SQRT_2));
                SubGaussianParams {
                    prefactor: 2.0 / mass,
                    exponent: 1.0 / (2.0 * sigma * sigma),
                    variance_proxy: Some(cap),
                }
            }
        }
        ScalarDist::StudentT { dof } => {
            return Err(Error::NotSubGaussian(format!(
                "student_t(dof = {dof}) has polynomial tails and"
            )))
        }
    })
}

/// Dependence structure applied inside each independently drawn row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowMixer {
    Identity,
    /// One fixed Haar-orthogonal matrix applied to every row.
    FixedRotation { seed: u64 },
    /// `sqrt(1 - load) z_j + sqrt(load) w` with `w` shared across the row.
    CommonFactor { load: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleSpec {
    IidEntries(ScalarDist),
    IndependentRows { base: ScalarDist, mixer: RowMixer },
    AllOnes,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnsembleSpec::IidEntries(d) => d.validate(),
            EnsembleSpec::IndependentRows { base, mixer } => {
                base.validate()?;
                if let RowMixer::CommonFactor { load } = *mixer {
                    if !(0.0..1.0).contains(&load) {
                        return Err(Error::param("load", format!("must lie in [0, 1), got {load}")));
                    }
                }
                Ok(())
            }
            EnsembleSpec::AllOnes => Ok(()),
        }
    }

    /// Scalar law feeding the ensemble, if any.
    pub fn base_dist(&self) -> Option<&ScalarDist> {
        match self {
            EnsembleSpec::IidEntries(d) => Some(d),
            EnsembleSpec::IndependentRows { base, .. } => Some(base),
            EnsembleSpec::AllOnes => None,
        }
    }

    /// Same ensemble with any Gaussian base law rescaled to `sigma`.
    pub fn with_gaussian_sigma(&self, sigma: f64) -> Self {
        let swap = |d: ScalarDist| match d {
            ScalarDist::Gaussian { .. } => ScalarDist::Gaussian { sigma },
            other => other,
        };
        match *self {
            EnsembleSpec::IidEntries(d) => EnsembleSpec::IidEntries(swap(d)),
            EnsembleSpec::IndependentRows { base, mixer } => EnsembleSpec::IndependentRows {
                base: swap(base),
                mixer,
            },
            EnsembleSpec::AllOnes => EnsembleSpec::AllOnes,
        }
    }

    /// Key-value pairs in the config text format.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let push_dist = |out: &mut Vec<(&'static str, String)>, d: &ScalarDist| {
            out.push(("dist", d.name().to_string()));
            match *d {
                ScalarDist::Gaussian { sigma } => out.push(("sigma", kv::fmt_f64(sigma))),
                ScalarDist::Rademacher => {}
                ScalarDist::UniformSym { half_width } => {
                    out.push(("half_width", kv::fmt_f64(half_width)))
                }
                ScalarDist::TruncGaussian { sigma, cap } => {
                    out.push(("sigma", kv::fmt_f64(sigma)));
                    out.push(("cap", kv::fmt_f64(cap)));
                }
                ScalarDist::StudentT { dof } => out.push(("dof", kv::fmt_f64(dof))),
            }
        };
        match self {
            EnsembleSpec::IidEntries(d) => {
                out.push(("ensemble", "iid".to_string()));
                push_dist(&mut out, d);
            }
            EnsembleSpec::IndependentRows { base, mixer } => {
                out.push(("ensemble", "rows".to_string()));
                push_dist(&mut out, base);
                match *mixer {
                    RowMixer::Identity => out.push(("mixer", "identity".to_string())),
                    RowMixer::FixedRotation { seed } => {
                        out.push(("mixer", "rotation".to_string()));
                        out.push(("rotation_seed", seed.to_string()));
                    }
                    RowMixer::CommonFactor { load } => {
                        out.push(("mixer", "factor".to_string()));
                        out.push(("load", kv::fmt_f64(load)));
                    }
                }
            }
            EnsembleSpec::AllOnes => out.push(("ensemble", "ones".to_string())),
        }
        out
    }

    /// Reads the ensemble keys from `section`, filling defaults for absent
    /// ones. Keys outside [`ENSEMBLE_KEYS`] are left for the caller.
    pub fn from_section(section: &Section) -> Result<Self> {
        let text = |key: &str, default: &str| -> String {
            section
                .get(key)
                .map_or_else(|| default.to_string(), |e| e.value.clone())
        };
        let num = |key: &'static str, default: f64| -> Result<f64> {
            section.get(key).map_or(Ok(default), |e| e.parse::<f64>())
        };
        let dist = match text("dist", "gaussian").as_str() {
            "gaussian" => ScalarDist::Gaussian {
                sigma: num("sigma", 1.0)?,
            },
            "rademacher" => ScalarDist::Rademacher,
            "uniform" => ScalarDist::UniformSym {
                half_width: num("half_width", 1.0)?,
            },
            "trunc_gaussian" => ScalarDist::TruncGaussian {
                sigma: num("sigma", 1.0)?,
                cap: num("cap", 3.0)?,
            },
            "student_t" => ScalarDist::StudentT {
                dof: num("dof", 3.0)?,
            },
            other => return Err(Error::param("dist", format!("unknown distribution `{other}`"))),
        };
        let spec = match text("ensemble", "iid").as_str() {
            "iid" => EnsembleSpec::IidEntries(dist),
            "rows" => {
                let mixer = match text("mixer", "identity").as_str() {
                    "identity" => RowMixer::Identity,
                    "rotation" => RowMixer::FixedRotation {
                        seed: section
                            .get("rotation_seed")
                            .map_or(Ok(0), |e| e.parse::<u64>())?,
                    },
                    "factor" => RowMixer::CommonFactor {
                        load: num("load", 0.5)?,
                    },
                    other => return Err(Error::param("mixer", format!("unknown mixer `{other}`"))),
                };
                EnsembleSpec::IndependentRows { base: dist, mixer }
            }
            "ones" => EnsembleSpec::AllOnes,
            other => return Err(Error::param("ensemble", format!("unknown ensemble `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses a standalone ensemble config, rejecting unknown keys.
    pub fn parse_config(text: &str) -> Result<Self> {
        let doc = kv::Document::parse(text)?;
        let top = doc.top();
        if let Some(e) = top.entries.iter().find(|e| !ENSEMBLE_KEYS.contains(&e.key.as_str())) {
            return Err(Error::UnknownKey(e.key.clone()));
        }
        Self::from_section(top)
    }

    pub fn to_config(&self) -> String {
        let mut w = kv::Writer::new();
        for (k, v) in self.to_pairs() {
            w.kv(k, v);
        }
        w.finish()
    }
}

/// Keys recognized by [`EnsembleSpec::from_section`].
pub const ENSEMBLE_KEYS: &[&str] = &[
    "ensemble",
    "dist",
    "sigma",
    "half_width",
    "cap",
    "dof",
    "load",
    "mixer",
    "rotation_seed",
];

/// Ensemble prepared for fixed dimensions; holds the rotation for
/// [`RowMixer::FixedRotation`] so repeated draws do not rebuild it.
#[derive(Debug, Clone)]
pub struct EnsembleSampler {
    spec: EnsembleSpec,
    n_rows: usize,
    n_cols: usize,
    scalar: Option<ScalarSampler>,
    rotation: Option<Matrix>,
}

impl EnsembleSampler {
    pub fn new(spec: &EnsembleSpec, n_rows: usize, n_cols: usize) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::param("n", "matrix dimensions must be at least 1"));
        }
        spec.validate()?;
        let scalar = spec.base_dist().map(ScalarDist::sampler).transpose()?;
        let rotation = match spec {
            EnsembleSpec::IndependentRows {
                mixer: RowMixer::FixedRotation { seed },
                ..
            } => Some(haar_orthogonal(n_cols, *seed)),
            _ => None,
        };
        Ok(Self {
            spec: *spec,
            n_rows,
            n_cols,
            scalar,
            rotation,
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    fn fill_row(&self, rng: &mut TrialRng, row: &mut [f64], scratch: &mut [f64]) {
        let scalar = match &self.scalar {
            Some(s) => s,
            None => {
                row.fill(1.0);
                return;
            }
        };
        match self.spec {
            EnsembleSpec::IidEntries(_)
            | EnsembleSpec::IndependentRows {
                mixer: RowMixer::Identity,
                ..
            } => row.iter_mut().for_each(|x| *x = scalar.sample(rng)),
            EnsembleSpec::IndependentRows {
                mixer: RowMixer::CommonFactor { load },
                ..
            } => {
                let shared = load.sqrt() * scalar.sample(rng);
                let own = (1.0 - load).sqrt();
                row.iter_mut()
                    .for_each(|x| *x = own * scalar.sample(rng) + shared);
            }
            EnsembleSpec::IndependentRows {
                mixer: RowMixer::FixedRotation { .. },
                ..
            } => {
                scratch.iter_mut().for_each(|x| *x = scalar.sample(rng));
                let q = self.rotation.as_ref().expect("rotation prepared");
                q.mul_vec_into(scratch, row);
            }
            EnsembleSpec::AllOnes => unreachable!("no scalar law"),
        }
    }

    /// Matrix for trial seed `seed`; a pure function of (spec, dims, seed).
    pub fn sample(&self, seed: u64) -> Matrix {
        let mut rng = rng_from_seed(seed);
        let mut data = vec![0.0; self.n_rows * self.n_cols];
        let mut scratch = vec![0.0; self.n_cols];
        for row in data.chunks_exact_mut(self.n_cols) {
            self.fill_row(&mut rng, row, &mut scratch);
        }
        Matrix::from_raw(self.n_rows, self.n_cols, data)
    }

    /// First row of `sample(seed)` without generating the rest.
    pub fn first_row(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        let mut row = vec![0.0; self.n_cols];
        let mut scratch = vec![0.0; self.n_cols];
        self.fill_row(&mut rng, &mut row, &mut scratch);
        row
    }
}

/// Draws one matrix. Prefer [`EnsembleSampler`] when sampling many.
pub fn sample_matrix(spec: &EnsembleSpec, n_rows: usize, n_cols: usize, seed: u64) -> Result<Matrix> {
    Ok(EnsembleSampler::new(spec, n_rows, n_cols)?.sample(seed))
}

/// Haar-distributed orthogonal matrix: Gram–Schmidt (applied twice) on the
/// columns of a seeded Gaussian matrix.
fn haar_orthogonal(n: usize, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    // columns stored contiguously
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    for j in 0..n {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for _ in 0..2 {
            for q in done.iter() {
                let c = dot(q, v);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
        }
        let norm = dot(v, v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
    Matrix::from_fn(n, n, |i, j| cols[j][i])
}
