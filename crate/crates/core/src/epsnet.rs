//! Greedy ε-nets on the unit sphere, their packing bounds, and the
//! net-based operator norm brackets.
//!
//! A net is grown by random sequential insertion and stopped after
//! `saturation_t` consecutive rejections. Maximality can only be checked
//! by sampling, so [`audit_coverage_check`] reports the fraction of random
//! sphere points that lie within `eps` of the net.

use crate::error::{Error, Result};
use crate::kv::fmt_f64;
use crate::matrix::{dot, norm2, Matrix};
use crate::rng::{derive_trial_seed, rng_from_seed, uniform_sphere_point};
use rayon::prelude::*;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct EpsNet {
    dim: usize,
    eps: f64,
    seed: u64,
    saturation_t: usize,
    /// Row-major `count × dim` unit vectors in insertion order.
    points: Vec<f64>,
    audit_coverage: Option<f64>,
}

/// Two-sided packing count `((1+ε/2)^n − (1−ε/2)^n) / (ε/2)^n` and its envelopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardinalityBounds {
    pub lower: f64,
    pub upper: f64,
    pub packing_ratio: f64,
    /// Natural log of `packing_ratio`; finite even when the ratio overflows.
    pub log_packing_ratio: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("eps", format!("must lie in (0, 1], got {eps}")))
    }
}

/// `v` is within `eps` of a unit vector `u` iff `u·v >= 1 − eps²/2`.
fn cover_threshold(eps: f64) -> f64 {
    1.0 - 0.5 * eps * eps
}

impl EpsNet {
    /// Net from explicit points (normalized on entry). No separation check
    /// is made, so this also builds deliberately non-maximal test inputs.
    pub fn from_points(dim: usize, eps: f64, points: &[Vec<f64>]) -> Result<Self> {
        if dim < 2 {
            return Err(Error::param("dim", "must be at least 2"));
        }
        check_eps(eps)?;
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::Shape {
                    expected: dim,
                    found: p.len(),
                });
            }
            let n = norm2(p);
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::Data("net point must be finite and nonzero".into()));
            }
            flat.extend(p.iter().map(|x| x / n));
        }
        Ok(Self {
            dim,
            eps,
            seed: 0,
            saturation_t: 0,
            points: flat,
            audit_coverage: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn saturation_t(&self) -> usize {
        self.saturation_t
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn audit_coverage(&self) -> Option<f64> {
        self.audit_coverage
    }

    fn covers(&self, v: &[f64]) -> bool {
        let threshold = cover_threshold(self.eps);
        self.points().any(|p| dot(p, v) >= threshold)
    }

    /// Smallest pairwise Euclidean distance (`+∞` for fewer than two points).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d2: f64 = self
                    .point(i)
                    .iter()
                    .zip(self.point(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                best = best.min(d2);
            }
        }
        best.sqrt()
    }

    /// Flat text: header `dim eps seed saturation_T count`, then one point per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {} {}\n",
            self.dim,
            fmt_f64(self.eps),
            self.seed,
            self.saturation_t,
            self.len()
        );
        for p in self.points() {
            let line: Vec<String> = p.iter().map(|&x| fmt_f64(x)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, message: String| Error::Parse { line: line + 1, message };
        let (hline, header) = lines.next().ok_or_else(|| bad(0, "empty net file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(bad(hline, "header must be `dim eps seed saturation_T count`".into()));
        }
        let num_err = |what: &str| bad(hline, format!("bad header field `{what}`"));
        let dim: usize = fields[0].parse().map_err(|_| num_err("dim"))?;
        let eps: f64 = fields[1].parse().map_err(|_| num_err("eps"))?;
        let seed: u64 = fields[2].parse().map_err(|_| num_err("seed"))?;
        let saturation_t: usize = fields[3].parse().map_err(|_| num_err("saturation_T"))?;
        let count: usize = fields[4].parse().map_err(|_| num_err("count"))?;
        if dim < 2 {
            return Err(Error::param("dim", "must be at least 2"));
        }
        check_eps(eps)?;
        let mut points = Vec::with_capacity(count * dim);
        for (idx, line) in lines {
            let before = points.len();
            for tok in line.split_whitespace() {
                points.push(
                    tok.parse::<f64>()
                        .map_err(|_| bad(idx, format!("bad coordinate `{tok}`")))?,
                );
            }
            if points.len() - before != dim {
                return Err(bad(idx, format!("expected {dim} coordinates")));
            }
        }
        if points.len() != count * dim {
            return Err(Error::Shape {
                expected: count,
                found: points.len() / dim,
            });
        }
        Ok(Self {
            dim,
            eps,
            seed,
            saturation_t,
            points,
            audit_coverage: None,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Greedy random sequential insertion of uniform sphere points.
///
/// A candidate is accepted when its distance to every accepted point is at
/// least `eps`; construction stops after `saturation_t` consecutive
/// rejections.
pub fn build_net(dim: usize, eps: f64, seed: u64, saturation_t: usize) -> Result<EpsNet> {
    if dim < 2 {
        return Err(Error::param("dim", "must be at least 2"));
    }
    check_eps(eps)?;
    if saturation_t == 0 {
        return Err(Error::param("saturation_T", "must be at least 1"));
    }
    let mut net = EpsNet {
        dim,
        eps,
        seed,
        saturation_t,
        points: Vec::new(),
        audit_coverage: None,
    };
    let mut rng = rng_from_seed(seed);
    let mut misses = 0;
    while misses < saturation_t {
        let candidate = uniform_sphere_point(&mut rng, dim);
        if net.covers(&candidate) {
            misses += 1;
        } else {
            net.points.extend_from_slice(&candidate);
            misses = 0;
        }
    }
    Ok(net)
}

/// Packing ratio from the volume argument, evaluated in log space.
pub fn cardinality_bounds(dim: usize, eps: f64) -> Result<CardinalityBounds> {
    if dim < 2 {
        return Err(Error::param("dim", "must be at least 2"));
    }
    check_eps(eps)?;
    let n = dim as f64;
    let half = 0.5 * eps;
    let shrink = ((1.0 - half) / (1.0 + half)).powf(n);
    let log_ratio = n * (1.0 + half).ln() + (-shrink).ln_1p() - n * half.ln();
    let denom = half.powf(n);
    let direct = ((1.0 + half).powf(n) - (1.0 - half).powf(n)) / denom;
    let ratio = if denom >= f64::MIN_POSITIVE && direct.is_finite() {
        direct
    } else {
        log_ratio.exp()
    };
    Ok(CardinalityBounds {
        lower: ratio,
        upper: ratio,
        packing_ratio: ratio,
        log_packing_ratio: log_ratio,
    })
}

fn check_net_shape(m: &Matrix, net: &EpsNet) -> Result<()> {
    if m.n_cols() != net.dim {
        return Err(Error::Shape {
            expected: m.n_cols(),
            found: net.dim,
        });
    }
    Ok(())
}

fn max_image_norm(m: &Matrix, net: &EpsNet) -> f64 {
    net.points
        .par_chunks_exact(net.dim)
        .map(|v| norm2(&m.mul_vec(v)))
        .reduce(|| 0.0, f64::max)
}

/// `max_{v ∈ net} ‖Mv‖`; never exceeds `‖M‖_op` because the net lies on the sphere.
pub fn net_lower_bound(m: &Matrix, net: &EpsNet) -> Result<f64> {
    check_net_shape(m, net)?;
    Ok(max_image_norm(m, net))
}

/// `max_{v ∈ net} ‖Mv‖ / (1 − eps)`; an upper bound on `‖M‖_op` for a maximal net.
/// Needs `eps < 1`.
pub fn net_upper_bound(m: &Matrix, net: &EpsNet) -> Result<f64> {
    check_net_shape(m, net)?;
    if net.eps >= 1.0 {
        return Err(Error::param("eps", "upper bound needs eps < 1"));
    }
    Ok(max_image_norm(m, net) / (1.0 - net.eps))
}

const AUDIT_BLOCK: usize = 4096;

/// Fraction of `probes` uniform sphere points within `eps` of the net,
/// recorded on the net as its audit coverage.
pub fn audit_coverage_check(net: &mut EpsNet, probes: usize, seed: u64) -> Result<f64> {
    if probes == 0 {
        return Err(Error::param("probes", "must be at least 1"));
    }
    let blocks = probes.div_ceil(AUDIT_BLOCK);
    let shared: &EpsNet = net;
    let covered: usize = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(derive_trial_seed(seed, b as u64));
            let count = AUDIT_BLOCK.min(probes - b * AUDIT_BLOCK);
            (0..count)
                .filter(|_| shared.covers(&uniform_sphere_point(&mut rng, shared.dim)))
                .count()
        })
        .sum();
    let coverage = covered as f64 / probes as f64;
    net.audit_coverage = Some(coverage);
    Ok(coverage)
}
