//! Numerical laboratory for operator-norm concentration of sub-Gaussian
//! random matrices.
//!
//! - [`ensembles`]: seeded iid and independent-row ensembles plus the all-ones control
//! - [`specnorm`]: Jacobi oracle, power iteration, closed-form induced norms
//! - [`epsnet`]: greedy ε-nets on the sphere, packing bounds, net norm brackets
//! - [`diagnostics`]: tail, moment, ψ₂ and union-bound estimators
//! - [`experiments`]: Monte Carlo tail, growth, decay and edge-window runs
//! - [`report`]: report text format

// `!(x > 0.0)` guards are written to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod ensembles;
pub mod epsnet;
pub mod error;
pub mod experiments;
pub mod jacobi;
pub mod kv;
pub mod matrix;
pub mod report;
pub mod rng;
pub mod specnorm;
pub mod stats;

pub use ensembles::{
    sample_matrix, tail_params_of, EnsembleSampler, EnsembleSpec, RowMixer, ScalarDist,
    SubGaussianParams,
};
pub use epsnet::{
    audit_coverage_check, build_net, cardinality_bounds, net_lower_bound, net_upper_bound,
    CardinalityBounds, EpsNet,
};
pub use error::{Error, Result};
pub use experiments::{
    fixed_vector_tail, growth_sweep, overwhelming_decay_check, tail_probability,
    tw_window_fraction, DecayCertificate, GrowthFit, RateKind, SweepRow, TailEstimate, UMode,
};
pub use matrix::Matrix;
pub use report::{read_report, write_report, ExperimentReport, Payload};
pub use rng::derive_trial_seed;
pub use specnorm::{
    mat_vec_image_norm, opnorm, opnorm_closed, opnorm_exact, opnorm_power, NormKind, PowerResult,
};
