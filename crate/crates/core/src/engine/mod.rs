//! Virtual-time executor for asynchronous fixed-point iterations.
//!
//! One event updates one component. Every read names a source component
//! and a slot; delayed slots take a version at most `D` updates old from a
//! ring buffer, persisted slots reuse what the worker consumed in another
//! slot at its previous event.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{max_abs_diff, BlockVector};

pub mod relaxation;
pub mod schedule;
pub mod trace;

pub use schedule::{ActivationPolicy, AsyncSchedule};
pub use trace::{
    kappa, validate_schedule, AsyncTrace, ReadRecord, ScheduleReport, StopKind, UpdateRecord,
};

use schedule::Scheduler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Read {
    pub source: usize,
    /// 1-based slot index.
    pub slot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotPolicy {
    Delayed,
    /// Reuses the version consumed in slot `from` at the worker's previous
    /// event (version 0 before its first event).
    Persisted {
        from: usize,
    },
}

pub trait AsyncMapping {
    /// Number of components, including constant ones.
    fn components(&self) -> usize;

    fn arity(&self) -> usize;

    /// Inactive components are never scheduled and keep their initial value.
    fn is_active(&self, _i: usize) -> bool {
        true
    }

    fn read_set(&self, i: usize) -> Vec<Read>;

    fn slot_policy(&self, _slot: usize) -> SlotPolicy {
        SlotPolicy::Delayed
    }

    /// New value of component `i`; `inputs[r]` answers `read_set(i)[r]`.
    fn eval(&self, i: usize, inputs: &[&[f64]]) -> Vec<f64>;
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("initial state has {got} blocks, mapping has {expected} components")]
    InitMismatch { expected: usize, got: usize },
    #[error("mapping has no active component")]
    NoActive,
    #[error("invalid read set: {0}")]
    InvalidReadSet(String),
    #[error("no stop after {max_events} events")]
    HorizonExhausted {
        max_events: usize,
        trace: Box<AsyncTrace>,
    },
}

#[derive(Debug, Clone)]
struct Consumed {
    version: usize,
    value: Vec<f64>,
}

/// Mutable simulation state, independent of the mapping.
struct State {
    values: Vec<Vec<f64>>,
    versions: Vec<usize>,
    rings: Vec<VecDeque<(usize, Vec<f64>)>>,
    read_sets: Vec<Vec<Read>>,
    /// Index of the read each persisted read copies from.
    persisted_from: Vec<Vec<Option<usize>>>,
    caches: Vec<Vec<Consumed>>,
    active: Vec<bool>,
    last_deltas: Vec<f64>,
    events: usize,
    unchanged_run: usize,
}

/// Read-only view handed to stop predicates after every event.
pub struct SimView<'a> {
    state: &'a State,
}

impl SimView<'_> {
    pub fn events(&self) -> usize {
        self.state.events
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.state.values
    }

    pub fn versions(&self) -> &[usize] {
        &self.state.versions
    }

    /// Last update change per component: `+∞` before an active component's
    /// first event, `0` for inactive components.
    pub fn last_deltas(&self) -> &[f64] {
        &self.state.last_deltas
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.state.active[i]
    }

    /// No worker has an unread version: every delayed read would return the
    /// version it consumed last, every persisted read the same version as
    /// its source slot.
    pub fn is_drained(&self) -> bool {
        let s = self.state;
        s.active_indices().all(|i| {
            s.read_sets[i].iter().enumerate().all(|(r, read)| {
                let mine = s.caches[i][r].version;
                match s.persisted_from[i][r] {
                    Some(from) => s.caches[i][from].version == mine,
                    None => s.versions[read.source] == mine,
                }
            })
        })
    }

    /// Largest `‖next input − last consumed input‖∞` over every worker and
    /// every input it may receive next.
    pub fn max_in_flight_change(&self) -> f64 {
        let s = self.state;
        let mut worst = 0.0_f64;
        for i in s.active_indices() {
            for (r, read) in s.read_sets[i].iter().enumerate() {
                let mine = &s.caches[i][r];
                match s.persisted_from[i][r] {
                    Some(from) => {
                        worst = worst.max(max_abs_diff(&s.caches[i][from].value, &mine.value));
                    }
                    None => {
                        for (v, value) in &s.rings[read.source] {
                            if *v >= mine.version {
                                worst = worst.max(max_abs_diff(value, &mine.value));
                            }
                        }
                    }
                }
            }
        }
        worst
    }
}

impl State {
    fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(|i| self.active[*i])
    }

    fn ring_entry(&self, source: usize, version: usize) -> &[f64] {
        self.rings[source]
            .iter()
            .find(|(v, _)| *v == version)
            .map(|(_, value)| value.as_slice())
            .expect("admissible version is retained")
    }

    /// Nothing admissible to any future read differs from the current
    /// values, and every active component maps the current values to
    /// themselves.
    fn quiescent<M: AsyncMapping + ?Sized>(&self, map: &M, window: usize) -> bool {
        if self.unchanged_run < window {
            return false;
        }
        let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        let rings_settled = self
            .rings
            .iter()
            .zip(&self.values)
            .all(|(ring, cur)| ring.iter().all(|(_, v)| same(v, cur)));
        if !rings_settled {
            return false;
        }
        self.active_indices().all(|i| {
            let reads = &self.read_sets[i];
            let caches_settled = reads
                .iter()
                .zip(&self.caches[i])
                .all(|(read, c)| same(&c.value, &self.values[read.source]));
            caches_settled && {
                let inputs: Vec<&[f64]> = reads
                    .iter()
                    .map(|read| self.values[read.source].as_slice())
                    .collect();
                same(&map.eval(i, &inputs), &self.values[i])
            }
        })
    }
}

/// Per-component reads and, for persisted slots, the cache index.
type Prepared = (Vec<Vec<Read>>, Vec<Vec<Option<usize>>>);

fn prepare<M: AsyncMapping + ?Sized>(map: &M, init: &BlockVector) -> Result<Prepared, EngineError> {
    let comps = map.components();
    if init.len() != comps {
        return Err(EngineError::InitMismatch {
            expected: comps,
            got: init.len(),
        });
    }
    let mut read_sets = Vec::with_capacity(comps);
    let mut persisted = Vec::with_capacity(comps);
    for i in 0..comps {
        let reads = map.read_set(i);
        let mut from_idx = Vec::with_capacity(reads.len());
        for read in &reads {
            if read.source >= comps || read.slot == 0 || read.slot > map.arity() {
                return Err(EngineError::InvalidReadSet(format!(
                    "component {i} reads ({}, {})",
                    read.source, read.slot
                )));
            }
            from_idx.push(match map.slot_policy(read.slot) {
                SlotPolicy::Delayed => None,
                SlotPolicy::Persisted { from } => {
                    let idx = reads
                        .iter()
                        .position(|r| r.source == read.source && r.slot == from)
                        .filter(|&idx| map.slot_policy(reads[idx].slot) == SlotPolicy::Delayed)
                        .ok_or_else(|| {
                            EngineError::InvalidReadSet(format!(
                                "component {i}: slot {} persists slot {from}, which is not a delayed read of {}",
                                read.slot, read.source
                            ))
                        })?;
                    Some(idx)
                }
            });
        }
        read_sets.push(reads);
        persisted.push(from_idx);
    }
    Ok((read_sets, persisted))
}

/// Runs events until `stop` holds, the state is exactly quiescent, or the
/// schedule's horizon is exhausted.
pub fn simulate_async<M: AsyncMapping + ?Sized>(
    map: &M,
    init: &BlockVector,
    schedule: &AsyncSchedule,
    stop: Option<&dyn Fn(&SimView) -> bool>,
) -> Result<AsyncTrace, EngineError> {
    let (read_sets, persisted_from) = prepare(map, init)?;
    let comps = map.components();
    let active: Vec<bool> = (0..comps).map(|i| map.is_active(i)).collect();
    let active_list: Vec<usize> = (0..comps).filter(|i| active[*i]).collect();
    if active_list.is_empty() {
        return Err(EngineError::NoActive);
    }
    let window = schedule.window(active_list.len());
    let horizon = schedule.horizon(active_list.len());
    let d = schedule.delay_bound;

    let caches = read_sets
        .iter()
        .map(|reads| {
            reads
                .iter()
                .map(|r| Consumed {
                    version: 0,
                    value: init.block(r.source).to_vec(),
                })
                .collect()
        })
        .collect();
    let mut state = State {
        values: init.blocks().to_vec(),
        versions: vec![0; comps],
        rings: init
            .blocks()
            .iter()
            .map(|b| VecDeque::from([(0, b.clone())]))
            .collect(),
        read_sets,
        persisted_from,
        caches,
        last_deltas: active
            .iter()
            .map(|a| if *a { f64::INFINITY } else { 0.0 })
            .collect(),
        active: active.clone(),
        events: 0,
        unchanged_run: 0,
    };
    let slot_policies = (1..=map.arity()).map(|s| map.slot_policy(s)).collect();
    let mut trace = AsyncTrace::from_events(init.clone(), active, slot_policies, d, Vec::new());
    trace.window = window;
    let mut scheduler = Scheduler::new(schedule, active_list);

    for k in 0..horizon {
        let i = scheduler.next_component(k);
        let reads = &state.read_sets[i];
        let mut chosen: Vec<Consumed> = Vec::with_capacity(reads.len());
        for (r, read) in reads.iter().enumerate() {
            let pick = match state.persisted_from[i][r] {
                Some(from) => state.caches[i][from].clone(),
                None => {
                    let latest = state.versions[read.source];
                    let version = latest
                        .saturating_sub(scheduler.staleness())
                        .max(state.caches[i][r].version);
                    Consumed {
                        version,
                        value: state.ring_entry(read.source, version).to_vec(),
                    }
                }
            };
            chosen.push(pick);
        }
        let inputs: Vec<&[f64]> = chosen.iter().map(|c| c.value.as_slice()).collect();
        let value = map.eval(i, &inputs);
        let delta = max_abs_diff(&value, &state.values[i]);
        let changed = value
            .iter()
            .zip(&state.values[i])
            .any(|(a, b)| a.to_bits() != b.to_bits());

        let read_records = reads
            .iter()
            .zip(&chosen)
            .map(|(read, c)| ReadRecord {
                source: read.source,
                slot: read.slot,
                version: c.version,
            })
            .collect();
        state.versions[i] += 1;
        let version = state.versions[i];
        let ring = &mut state.rings[i];
        ring.push_back((version, value.clone()));
        while ring.len() > d + 1 {
            ring.pop_front();
        }
        state.caches[i] = chosen;
        state.values[i].clone_from(&value);
        state.last_deltas[i] = delta;
        state.events = k + 1;
        state.unchanged_run = if changed { 0 } else { state.unchanged_run + 1 };

        trace.per_component_counts[i] += 1;
        trace.events.push(UpdateRecord {
            k_global: k,
            component: i,
            reads: read_records,
            frozen: false,
            version,
            digest: trace::digest(&value),
            delta,
            value,
        });

        let view = SimView { state: &state };
        let kind = if stop.is_some_and(|f| f(&view)) {
            Some(StopKind::Predicate)
        } else if state.quiescent(map, window) {
            Some(StopKind::Quiescence)
        } else {
            None
        };
        if let Some(kind) = kind {
            log::debug!("async run stopped by {kind:?} after {} events", k + 1);
            trace.stop = Some(kind);
            trace.stop_event = Some(k);
            return Ok(trace);
        }
    }
    log::warn!("async run exhausted its horizon of {horizon} events");
    Err(EngineError::HorizonExhausted {
        max_events: horizon,
        trace: Box::new(trace),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every component is a fixed constant.
    struct Constant(Vec<f64>);

    impl AsyncMapping for Constant {
        fn components(&self) -> usize {
            self.0.len()
        }
        fn arity(&self) -> usize {
            1
        }
        fn read_set(&self, _i: usize) -> Vec<Read> {
            Vec::new()
        }
        fn eval(&self, i: usize, _inputs: &[&[f64]]) -> Vec<f64> {
            vec![self.0[i]]
        }
    }

    #[test]
    fn constant_mapping_settles_in_one_window() {
        let map = Constant(vec![1.0, 2.0, 3.0]);
        let init = BlockVector::zeros(3, 1);
        for policy in [ActivationPolicy::RoundRobin, ActivationPolicy::RandomFair] {
            let sched = AsyncSchedule::new(policy, 5, 2);
            let trace = simulate_async(&map, &init, &sched, None).unwrap();
            assert_eq!(trace.stop, Some(StopKind::Quiescence));
            let w = trace.window;
            assert_eq!(trace.state_after(w).flatten(), vec![1.0, 2.0, 3.0]);
        }
    }

    #[test]
    fn horizon_error_carries_trace() {
        struct Counter;
        impl AsyncMapping for Counter {
            fn components(&self) -> usize {
                1
            }
            fn arity(&self) -> usize {
                1
            }
            fn read_set(&self, _i: usize) -> Vec<Read> {
                vec![Read { source: 0, slot: 1 }]
            }
            fn eval(&self, _i: usize, inputs: &[&[f64]]) -> Vec<f64> {
                vec![inputs[0][0] + 1.0]
            }
        }
        let sched = AsyncSchedule::full_sweep().with_max_events(10);
        match simulate_async(&Counter, &BlockVector::zeros(1, 1), &sched, None) {
            Err(EngineError::HorizonExhausted { max_events, trace }) => {
                assert_eq!(max_events, 10);
                assert_eq!(trace.len(), 10);
                assert_eq!(trace.final_state().flatten(), vec![10.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn init_size_is_checked() {
        let map = Constant(vec![1.0, 2.0]);
        let err = simulate_async(
            &map,
            &BlockVector::zeros(3, 1),
            &AsyncSchedule::full_sweep(),
            None,
        );
        assert!(matches!(
            err,
            Err(EngineError::InitMismatch {
                expected: 2,
                got: 3
            })
        ));
    }
}
