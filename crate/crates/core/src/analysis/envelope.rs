use serde::{Deserialize, Serialize};

use super::{AnalysisError, ContractionReport};
use crate::engine::AsyncTrace;
use crate::linalg::{BlockVector, NormKind};
use crate::sync::SyncTrace;

/// Contraction depth of a component version. `Saturated` versions are
/// exact: their dependency chain reaches the constant component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Depth {
    Finite(u32),
    Saturated,
}

impl Depth {
    fn succ(self) -> Depth {
        match self {
            Depth::Finite(s) => Depth::Finite(s + 1),
            Depth::Saturated => Depth::Saturated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    /// Number of events applied.
    pub events: usize,
    pub sigma: Depth,
    pub bound: f64,
}

/// `σ` and `α̃^σ·‖λ⁰−λ*‖` before the first event and after each event.
///
/// Inactive components must already hold their exact value in `lam0`.
pub fn sigma_envelope(
    trace: &AsyncTrace,
    report: &ContractionReport,
    lam_star: &BlockVector,
    lam0: &BlockVector,
) -> Result<Vec<EnvelopePoint>, AnalysisError> {
    let at = report.alpha_tilde;
    if !(at < 1.0) {
        return Err(AnalysisError::EnvelopeUndefined(at));
    }
    let comps = trace.initial.len();
    if lam_star.len() != comps || lam0.len() != comps {
        return Err(AnalysisError::Inconsistent(format!(
            "trace has {comps} components, oracle {}, initial state {}",
            lam_star.len(),
            lam0.len()
        )));
    }
    for c in (0..comps).filter(|c| !trace.active[*c]) {
        if lam0.block(c) != lam_star.block(c) {
            return Err(AnalysisError::Inconsistent(format!(
                "constant component {c} is not exact initially"
            )));
        }
    }
    let e0 = lam0.distance(lam_star, report.norm_kind);
    let bound = |sigma: Depth| match sigma {
        Depth::Finite(s) => at.powi(s as i32) * e0,
        Depth::Saturated => 0.0,
    };

    let mut depth: Vec<Vec<Depth>> = trace
        .active
        .iter()
        .map(|a| {
            vec![if *a {
                Depth::Finite(0)
            } else {
                Depth::Saturated
            }]
        })
        .collect();
    let sigma_now = |depth: &[Vec<Depth>]| {
        (0..comps)
            .filter(|c| trace.active[*c])
            .map(|c| *depth[c].last().expect("version 0 exists"))
            .min()
            .unwrap_or(Depth::Saturated)
    };

    let s0 = sigma_now(&depth);
    let mut points = Vec::with_capacity(trace.len() + 1);
    points.push(EnvelopePoint {
        events: 0,
        sigma: s0,
        bound: bound(s0),
    });
    for (n, e) in trace.events.iter().enumerate() {
        let d = e
            .reads
            .iter()
            .map(|r| depth[r.source][r.version].succ())
            .min()
            .unwrap_or(Depth::Saturated);
        depth[e.component].push(d);
        let s = sigma_now(&depth);
        points.push(EnvelopePoint {
            events: n + 1,
            sigma: s,
            bound: bound(s),
        });
    }
    Ok(points)
}

/// Events at which the measured error exceeds `bound·(1 + slack)`, as
/// `(events, measured, bound)`.
pub fn envelope_violations(
    trace: &AsyncTrace,
    points: &[EnvelopePoint],
    lam_star: &BlockVector,
    kind: NormKind,
    slack: f64,
) -> Vec<(usize, f64, f64)> {
    let states = std::iter::once(trace.initial.clone()).chain(trace.snapshots());
    states
        .zip(points)
        .filter_map(|(state, pt)| {
            let err = state.distance(lam_star, kind);
            (err > pt.bound * (1.0 + slack)).then_some((pt.events, err, pt.bound))
        })
        .collect()
}

pub enum TraceRef<'a> {
    Sync(&'a SyncTrace),
    Async(&'a AsyncTrace),
}

/// First iteration (sync) or event count (async) at which the state equals
/// `lam_seq` to `1e-12` relative; `None` if never.
pub fn check_finite_termination(trace: TraceRef<'_>, lam_seq: &BlockVector) -> Option<usize> {
    let scale = lam_seq.max_norm(NormKind::Infinity).max(f64::MIN_POSITIVE);
    let exact = |x: &BlockVector| x.distance(lam_seq, NormKind::Infinity) <= 1e-12 * scale;
    match trace {
        TraceRef::Sync(t) => t.iterates.iter().position(exact),
        TraceRef::Async(t) => {
            if exact(&t.initial) {
                return Some(0);
            }
            t.snapshots().position(|s| exact(&s)).map(|n| n + 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::contraction_factors;
    use crate::async_parareal::run_async_parareal;
    use crate::engine::{ActivationPolicy, AsyncSchedule};
    use crate::model::AffinePropagator;
    use crate::sync::{coarse_init, run_parareal, sequential_fine_solve};

    fn scalar_pair() -> (AffinePropagator, AffinePropagator) {
        (
            AffinePropagator::scalar(0.8, 0.0, 1.0),
            AffinePropagator::scalar(0.77880, 0.0, 25.0),
        )
    }

    #[test]
    fn full_sweep_depths() {
        let (g, f) = scalar_pair();
        let p = 3;
        let sched = AsyncSchedule::full_sweep().with_max_events(3 * p);
        let trace = match run_async_parareal(&g, &f, &[1.0], p, &sched, None) {
            Ok(t) => t,
            Err(crate::async_parareal::AsyncPararealError::Engine(
                crate::engine::EngineError::HorizonExhausted { trace, .. },
            )) => *trace,
            Err(e) => panic!("{e}"),
        };
        let report = contraction_factors(&g, &f, p, NormKind::Spectral, None).unwrap();
        let lam_star = sequential_fine_solve(&f, &[1.0], p).unwrap();
        let lam0 = coarse_init(&g, &[1.0], p).unwrap();
        let pts = sigma_envelope(&trace, &report, &lam_star, &lam0).unwrap();
        let per_sweep: Vec<Depth> = (1..=3).map(|k| pts[k * p].sigma).collect();
        assert_eq!(
            per_sweep,
            vec![Depth::Finite(1), Depth::Finite(2), Depth::Saturated]
        );
        let e0 = lam0.distance(&lam_star, NormKind::Spectral);
        assert!((pts[p].bound - report.alpha_tilde * e0).abs() < 1e-15);
        assert_eq!(pts[3 * p].bound, 0.0);
        assert!(envelope_violations(&trace, &pts, &lam_star, NormKind::Spectral, 1e-10).is_empty());
    }

    #[test]
    fn empty_trace_envelope() {
        let (g, f) = scalar_pair();
        let lam_star = sequential_fine_solve(&f, &[1.0], 2).unwrap();
        let lam0 = coarse_init(&g, &[1.0], 2).unwrap();
        let trace =
            AsyncTrace::from_events(lam0.clone(), vec![false, true, true], vec![], 0, vec![]);
        let report = contraction_factors(&g, &f, 2, NormKind::Spectral, None).unwrap();
        let pts = sigma_envelope(&trace, &report, &lam_star, &lam0).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].sigma, Depth::Finite(0));
        assert_eq!(pts[0].bound, lam0.distance(&lam_star, NormKind::Spectral));
    }

    #[test]
    fn adversarial_envelope_holds() {
        let (g, f) = scalar_pair();
        let p = 4;
        let sched = AsyncSchedule::new(ActivationPolicy::AdversarialStale, 3, 2);
        let trace = run_async_parareal(&g, &f, &[1.0], p, &sched, None).unwrap();
        let report = contraction_factors(&g, &f, p, NormKind::Spectral, None).unwrap();
        let lam_star = sequential_fine_solve(&f, &[1.0], p).unwrap();
        let lam0 = coarse_init(&g, &[1.0], p).unwrap();
        let pts = sigma_envelope(&trace, &report, &lam_star, &lam0).unwrap();
        assert!(pts.windows(2).all(|w| w[0].sigma <= w[1].sigma));
        assert_eq!(pts.last().unwrap().sigma, Depth::Saturated);
        assert!(envelope_violations(&trace, &pts, &lam_star, NormKind::Spectral, 1e-10).is_empty());
    }

    #[test]
    fn undefined_when_not_contractive() {
        let g = AffinePropagator::scalar(0.9, 0.0, 1.0);
        let f = AffinePropagator::scalar(0.2, 0.0, 1.0);
        let report = contraction_factors(&g, &f, 2, NormKind::Spectral, None).unwrap();
        let lam = coarse_init(&g, &[1.0], 2).unwrap();
        let trace =
            AsyncTrace::from_events(lam.clone(), vec![false, true, true], vec![], 0, vec![]);
        assert!(matches!(
            sigma_envelope(&trace, &report, &lam, &lam),
            Err(AnalysisError::EnvelopeUndefined(_))
        ));
    }

    #[test]
    fn termination_indices() {
        let (g, f) = scalar_pair();
        let p = 4;
        let lam_seq = sequential_fine_solve(&f, &[1.0], p).unwrap();
        let sync = run_parareal(&g, &f, &[1.0], p, 0.0, None).unwrap();
        let k = check_finite_termination(TraceRef::Sync(&sync), &lam_seq).unwrap();
        assert!(k <= p);
        let sched = AsyncSchedule::new(ActivationPolicy::RandomFair, 11, 1);
        let trace = run_async_parareal(&g, &f, &[1.0], p, &sched, None).unwrap();
        assert!(check_finite_termination(TraceRef::Async(&trace), &lam_seq).is_some());
    }
}
