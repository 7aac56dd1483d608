//! Parareal as an asynchronous two-slot mapping.
//!
//! Worker `i` reads its predecessor twice: slot 1 takes the freshest
//! admissible version, slot 2 reuses what slot 1 consumed at the worker's
//! previous event. The update is `G(slot 1) + F(slot 2) − G(slot 2)`.

use thiserror::Error;

use crate::engine::{
    simulate_async, AsyncMapping, AsyncSchedule, AsyncTrace, EngineError, Read, SimView, SlotPolicy,
};
use crate::linalg::BlockVector;
use crate::model::{AffinePropagator, ModelError};
use crate::sync::{check_dims, coarse_init, correction};

#[derive(Debug, Error)]
pub enum AsyncPararealError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone)]
pub struct PararealMapping {
    pub g: AffinePropagator,
    pub f: AffinePropagator,
    pub u0: Vec<f64>,
    pub p: usize,
}

pub fn async_parareal_mapping(
    g: &AffinePropagator,
    f: &AffinePropagator,
    u0: &[f64],
    p: usize,
) -> Result<PararealMapping, ModelError> {
    check_dims(g, f, u0)?;
    if p == 0 {
        return Err(ModelError::Decomposition("p must be at least 1".into()));
    }
    Ok(PararealMapping {
        g: g.clone(),
        f: f.clone(),
        u0: u0.to_vec(),
        p,
    })
}

impl AsyncMapping for PararealMapping {
    fn components(&self) -> usize {
        self.p + 1
    }

    fn arity(&self) -> usize {
        2
    }

    fn is_active(&self, i: usize) -> bool {
        i > 0
    }

    fn read_set(&self, i: usize) -> Vec<Read> {
        if i == 0 {
            return Vec::new();
        }
        vec![
            Read {
                source: i - 1,
                slot: 1,
            },
            Read {
                source: i - 1,
                slot: 2,
            },
        ]
    }

    fn slot_policy(&self, slot: usize) -> SlotPolicy {
        if slot == 2 {
            SlotPolicy::Persisted { from: 1 }
        } else {
            SlotPolicy::Delayed
        }
    }

    fn eval(&self, i: usize, inputs: &[&[f64]]) -> Vec<f64> {
        if i == 0 {
            return self.u0.clone();
        }
        correction(&self.g, &self.f, inputs[0], inputs[1])
    }
}

/// True iff every delta is strictly below `epsilon` and the run is drained.
pub fn async_stop_check(worker_deltas: &[f64], epsilon: f64, drained: bool) -> bool {
    drained && worker_deltas.iter().all(|d| *d < epsilon)
}

/// Algorithm-2 style run from the coarse initial guess.
///
/// With `Some(ε)` the run stops once every worker's last change is below
/// `ε` and no input a worker may read next differs from what it consumed
/// last by `ε` or more. With `None` only exact quiescence stops it.
pub fn run_async_parareal(
    g: &AffinePropagator,
    f: &AffinePropagator,
    u0: &[f64],
    p: usize,
    schedule: &AsyncSchedule,
    epsilon: Option<f64>,
) -> Result<AsyncTrace, AsyncPararealError> {
    let map = async_parareal_mapping(g, f, u0, p)?;
    let init = coarse_init(g, u0, p)?;
    run_from(&map, &init, schedule, epsilon)
}

pub(crate) fn run_from(
    map: &PararealMapping,
    init: &BlockVector,
    schedule: &AsyncSchedule,
    epsilon: Option<f64>,
) -> Result<AsyncTrace, AsyncPararealError> {
    let trace = match epsilon {
        Some(eps) => {
            let stop = move |v: &SimView| {
                async_stop_check(&v.last_deltas()[1..], eps, v.max_in_flight_change() < eps)
            };
            simulate_async(map, init, schedule, Some(&stop))?
        }
        None => simulate_async(map, init, schedule, None)?,
    };
    Ok(trace)
}
