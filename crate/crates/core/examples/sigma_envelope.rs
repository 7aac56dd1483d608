//! Contraction depth σ along an adversarial trace and the envelope
//! α̃^σ·‖λ⁰ − λ*‖ it gives, next to the measured error.

use parareal_lab::analysis::{contraction_factors, envelope_violations, sigma_envelope, Depth};
use parareal_lab::async_parareal::run_async_parareal;
use parareal_lab::engine::{ActivationPolicy, AsyncSchedule};
use parareal_lab::model::{scalar_decay, Rule};
use parareal_lab::sync::{coarse_init, sequential_fine_solve};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (p, dt) = (6, 0.25);
    let ivp = scalar_decay(1.0, 1.0, p as f64 * dt)?;
    let g = Rule::BackwardEuler.propagator(&ivp, dt, 1)?;
    let f = Rule::Trapezoidal.propagator(&ivp, dt, 25)?;
    let report = contraction_factors(&g, &f, p, Default::default(), None)?;
    println!("α̃ = {:.5}", report.alpha_tilde);

    let oracle = sequential_fine_solve(&f, &ivp.initial, p)?;
    let lam0 = coarse_init(&g, &ivp.initial, p)?;
    let schedule = AsyncSchedule::new(ActivationPolicy::AdversarialStale, 3, 2);
    let trace = run_async_parareal(&g, &f, &ivp.initial, p, &schedule, None)?;
    let points = sigma_envelope(&trace, &report, &oracle, &lam0)?;

    let states = std::iter::once(trace.initial.clone()).chain(trace.snapshots());
    for (state, pt) in states.zip(&points).step_by(6) {
        let err = state.distance(&oracle, report.norm_kind);
        let sigma = match pt.sigma {
            Depth::Finite(s) => s.to_string(),
            Depth::Saturated => "exact".into(),
        };
        println!(
            "event {:>4}  σ = {sigma:>5}  bound {:.3e}  error {err:.3e}",
            pt.events, pt.bound
        );
    }
    let bad = envelope_violations(&trace, &points, &oracle, report.norm_kind, 1e-10);
    println!("{} events, {} violations", trace.len(), bad.len());
    Ok(())
}
