//! Contraction factors, error envelopes, termination certificates and the
//! cost model.

use thiserror::Error;

use crate::linalg::LinalgError;

pub mod chazan_miranker;
pub mod contraction;
pub mod cost;
pub mod envelope;

pub use chazan_miranker::{
    chazan_miranker_check, perron_weights, weighted_error, window_bound, CmReport,
};
pub use contraction::{
    async_convergence_check, compare_factors, contraction_factors, factors_from_norms,
    sync_convergence_check, ContractionReport, ConvergenceCheck, RateComparison,
};
pub use cost::{
    asymptotic_speedups, async_cost, fit_overhead, sequential_cost, speedup_bound, sync_cost,
    Asymptotics, CostParams, SpeedupReport,
};
pub use envelope::{
    check_finite_termination, envelope_violations, sigma_envelope, Depth, EnvelopePoint, TraceRef,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("theta {theta} is below the coarse norm {norm_g}")]
    InvalidTheta { theta: f64, norm_g: f64 },
    #[error("envelope undefined: alpha_tilde = {0} is not below 1")]
    EnvelopeUndefined(f64),
    #[error("invalid cost parameters: {0}")]
    InvalidCost(String),
    #[error("undefined limit: C_G = 0")]
    UndefinedLimit,
    #[error("overhead not fittable: {0}")]
    Unfittable(String),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
