use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SlotPolicy;
use crate::linalg::BlockVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadRecord {
    pub source: usize,
    pub slot: usize,
    pub version: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRecord {
    pub k_global: usize,
    pub component: usize,
    pub reads: Vec<ReadRecord>,
    /// Always false: update sets are singletons, skipped components have no
    /// record.
    pub frozen: bool,
    /// Version produced by this event.
    pub version: usize,
    pub digest: u64,
    /// `‖new − old‖∞` of the updated component.
    pub delta: f64,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopKind {
    Predicate,
    Quiescence,
}

impl StopKind {
    pub fn name(self) -> &'static str {
        match self {
            StopKind::Predicate => "predicate",
            StopKind::Quiescence => "quiescence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsyncTrace {
    pub initial: BlockVector,
    pub events: Vec<UpdateRecord>,
    pub per_component_counts: Vec<usize>,
    pub active: Vec<bool>,
    pub slot_policies: Vec<SlotPolicy>,
    pub delay_bound: usize,
    pub window: usize,
    pub stop_event: Option<usize>,
    pub stop: Option<StopKind>,
}

/// FNV-1a over the little-endian bits of every entry.
pub fn digest(value: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in value {
        for byte in x.to_bits().to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

impl AsyncTrace {
    /// A trace without stop information, for hand-built schedules.
    pub fn from_events(
        initial: BlockVector,
        active: Vec<bool>,
        slot_policies: Vec<SlotPolicy>,
        delay_bound: usize,
        events: Vec<UpdateRecord>,
    ) -> Self {
        let mut counts = vec![0; initial.len()];
        for e in &events {
            counts[e.component] += 1;
        }
        let window = active.iter().filter(|a| **a).count() * (delay_bound + 1);
        AsyncTrace {
            initial,
            events,
            per_component_counts: counts,
            active,
            slot_policies,
            delay_bound,
            window,
            stop_event: None,
            stop: None,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// State after every event, in order.
    pub fn snapshots(&self) -> Snapshots<'_> {
        Snapshots {
            trace: self,
            state: self.initial.clone(),
            next: 0,
        }
    }

    /// State after the first `n` events.
    pub fn state_after(&self, n: usize) -> BlockVector {
        let mut state = self.initial.clone();
        for e in &self.events[..n] {
            state.block_mut(e.component).clone_from(&e.value);
        }
        state
    }

    pub fn final_state(&self) -> BlockVector {
        self.state_after(self.events.len())
    }

    /// One JSON object per event, newline terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let line = serde_json::to_string(e).expect("records serialize");
            writeln!(out, "{line}").expect("writing to a string");
        }
        out
    }
}

pub struct Snapshots<'a> {
    trace: &'a AsyncTrace,
    state: BlockVector,
    next: usize,
}

impl Iterator for Snapshots<'_> {
    type Item = BlockVector;

    fn next(&mut self) -> Option<BlockVector> {
        let e = self.trace.events.get(self.next)?;
        self.next += 1;
        self.state.block_mut(e.component).clone_from(&e.value);
        Some(self.state.clone())
    }
}

/// Per-component update counts `κᵢ` and their maximum `κ`.
pub fn kappa(trace: &AsyncTrace) -> (Vec<usize>, usize) {
    let counts = trace.per_component_counts.clone();
    let max = counts.iter().copied().max().unwrap_or(0);
    (counts, max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessViolation {
    pub component: usize,
    /// First event of the earliest window that misses the component.
    pub window_start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StalenessViolation {
    pub k_global: usize,
    pub component: usize,
    pub source: usize,
    pub slot: usize,
    pub version: usize,
    pub latest: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub fairness: Vec<FairnessViolation>,
    pub staleness: Vec<StalenessViolation>,
}

impl ScheduleReport {
    pub fn is_valid(&self) -> bool {
        self.fairness.is_empty() && self.staleness.is_empty()
    }
}

/// Checks that every active component fires in each window of `w` events
/// and that every read is at most `d` versions old (`d + w` for persisted
/// slots, which may hold a version from the worker's previous event).
pub fn validate_schedule(trace: &AsyncTrace, d: usize, w: usize) -> ScheduleReport {
    let mut report = ScheduleReport::default();
    let n = trace.events.len();
    let comps = trace.initial.len();

    if w > 0 && n >= w {
        for c in (0..comps).filter(|c| trace.active.get(*c).copied().unwrap_or(false)) {
            let mut fires: Vec<usize> = trace
                .events
                .iter()
                .filter(|e| e.component == c)
                .map(|e| e.k_global)
                .collect();
            fires.push(n + w);
            let mut prev: Option<usize> = None;
            for f in fires {
                let start = prev.map_or(0, |p| p + 1);
                if start + w <= n && f >= start + w {
                    report.fairness.push(FairnessViolation {
                        component: c,
                        window_start: start,
                    });
                }
                prev = Some(f);
            }
        }
    }

    let mut latest = vec![0usize; comps];
    for e in &trace.events {
        for r in &e.reads {
            let persisted = matches!(
                trace.slot_policies.get(r.slot - 1),
                Some(SlotPolicy::Persisted { .. })
            );
            let bound = if persisted { d + w } else { d };
            let cur = latest[r.source];
            if r.version > cur || cur - r.version > bound {
                report.staleness.push(StalenessViolation {
                    k_global: e.k_global,
                    component: e.component,
                    source: r.source,
                    slot: r.slot,
                    version: r.version,
                    latest: cur,
                    bound,
                });
            }
        }
        latest[e.component] += 1;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(k: usize, component: usize, reads: Vec<ReadRecord>) -> UpdateRecord {
        UpdateRecord {
            k_global: k,
            component,
            reads,
            frozen: false,
            version: 0,
            digest: 0,
            delta: 0.0,
            value: vec![k as f64],
        }
    }

    fn blank(comps: usize, active: Vec<bool>, events: Vec<UpdateRecord>, d: usize) -> AsyncTrace {
        AsyncTrace::from_events(
            BlockVector::zeros(comps, 1),
            active,
            vec![SlotPolicy::Delayed],
            d,
            events,
        )
    }

    #[test]
    fn round_robin_is_valid() {
        let events = (0..30).map(|k| record(k, 1 + k % 3, vec![])).collect();
        let t = blank(4, vec![false, true, true, true], events, 0);
        assert!(validate_schedule(&t, 0, 3).is_valid());
        let (counts, max) = kappa(&t);
        assert_eq!(counts, vec![0, 10, 10, 10]);
        assert_eq!(max, 10);
    }

    #[test]
    fn starved_component_breaks_fairness() {
        let events = (0..100)
            .map(|k| {
                let c = if k <= 10 { k % 3 } else { k % 2 };
                record(k, c, vec![])
            })
            .collect();
        let t = blank(3, vec![true; 3], events, 3);
        let report = validate_schedule(&t, 3, 12);
        assert!(report.staleness.is_empty());
        let last_two = (0..=10).filter(|k| k % 3 == 2).max().unwrap();
        assert_eq!(
            report.fairness,
            vec![FairnessViolation {
                component: 2,
                window_start: last_two + 1
            }]
        );
    }

    #[test]
    fn component_silent_after_event_ten() {
        let events = (0..100)
            .map(|k| {
                let c = if k == 10 { 2 } else { k % 2 };
                record(k, c, vec![])
            })
            .collect();
        let t = blank(3, vec![true; 3], events, 3);
        let report = validate_schedule(&t, 3, 12);
        assert!(report.fairness.contains(&FairnessViolation {
            component: 2,
            window_start: 11
        }));
    }

    #[test]
    fn old_read_breaks_staleness() {
        // component 0 fires every event, so its latest version equals k
        let mut events: Vec<UpdateRecord> = (0..10).map(|k| record(k, 0, vec![])).collect();
        events.push(record(
            10,
            1,
            vec![ReadRecord {
                source: 0,
                slot: 1,
                version: 5,
            }],
        ));
        let t = blank(2, vec![true, true], events, 3);
        let report = validate_schedule(&t, 3, 1000);
        assert_eq!(report.staleness.len(), 1);
        assert_eq!(report.staleness[0].latest, 10);
    }

    #[test]
    fn empty_trace() {
        let t = blank(3, vec![true; 3], vec![], 0);
        assert_eq!(kappa(&t), (vec![0, 0, 0], 0));
        assert!(validate_schedule(&t, 0, 3).is_valid());
        assert_eq!(t.final_state(), t.initial);
    }

    #[test]
    fn digest_distinguishes_signed_zero() {
        assert_ne!(digest(&[0.0]), digest(&[-0.0]));
        assert_eq!(digest(&[1.5, 2.0]), digest(&[1.5, 2.0]));
    }

    #[test]
    fn jsonl_has_one_line_per_event() {
        let events = (0..5).map(|k| record(k, k % 2, vec![])).collect();
        let t = blank(2, vec![true; 2], events, 0);
        let text = t.to_jsonl();
        assert_eq!(text.lines().count(), 5);
        for line in text.lines() {
            let _: UpdateRecord = serde_json::from_str(line).unwrap();
        }
    }
}
