#![allow(dead_code)]

use parareal_lab::linalg::{BlockVector, NormKind};
use parareal_lab::model::{heat1d_system, scalar_decay, AffinePropagator, Rule};

pub const COARSE_DT: f64 = 0.2;
pub const FINE_STEPS: usize = 100;

/// Backward-Euler coarse and trapezoidal fine propagators for the 1D heat
/// benchmark on one subinterval of length 0.2.
pub fn heat_pair(n: usize) -> (AffinePropagator, AffinePropagator, Vec<f64>) {
    let ivp = heat1d_system(n, 1.0, 23.0, 23.0, 30.0, COARSE_DT).unwrap();
    let g = Rule::BackwardEuler.propagator(&ivp, COARSE_DT, 1).unwrap();
    let f = Rule::Trapezoidal
        .propagator(&ivp, COARSE_DT, FINE_STEPS)
        .unwrap();
    (g, f, ivp.initial.clone())
}

/// `u' = −u` on subintervals of length 0.25, fine step 0.01.
pub fn scalar_pair() -> (AffinePropagator, AffinePropagator, Vec<f64>) {
    let ivp = scalar_decay(1.0, 1.0, 0.25).unwrap();
    let g = Rule::BackwardEuler.propagator(&ivp, 0.25, 1).unwrap();
    let f = Rule::Trapezoidal.propagator(&ivp, 0.25, 25).unwrap();
    (g, f, ivp.initial.clone())
}

pub fn relative_error(x: &BlockVector, reference: &BlockVector) -> f64 {
    let scale = reference
        .max_norm(NormKind::Infinity)
        .max(f64::MIN_POSITIVE);
    x.distance(reference, NormKind::Infinity) / scale
}
