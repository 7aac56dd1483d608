//! Asynchronous Parareal under the three activation policies, with the
//! schedule checked against its fairness window and delay bound.

use parareal_lab::async_parareal::run_async_parareal;
use parareal_lab::engine::{kappa, validate_schedule, ActivationPolicy, AsyncSchedule};
use parareal_lab::linalg::NormKind;
use parareal_lab::model::{heat1d_system, Rule};
use parareal_lab::sync::{run_parareal, sequential_fine_solve};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (p, dt, eps) = (8, 0.2, 1e-6);
    let ivp = heat1d_system(8, 1.0, 23.0, 23.0, 30.0, p as f64 * dt)?;
    let g = Rule::BackwardEuler.propagator(&ivp, dt, 1)?;
    let f = Rule::Trapezoidal.propagator(&ivp, dt, 100)?;
    let oracle = sequential_fine_solve(&f, &ivp.initial, p)?;
    let k = run_parareal(&g, &f, &ivp.initial, p, eps, None)?.k_final;
    println!("sync: k = {k}");

    let policies = [
        ActivationPolicy::RoundRobin,
        ActivationPolicy::RandomFair,
        ActivationPolicy::AdversarialStale,
    ];
    for policy in policies {
        for d in [0, 1, 3] {
            let schedule = AsyncSchedule::new(policy, 7, d);
            let trace = run_async_parareal(&g, &f, &ivp.initial, p, &schedule, Some(eps))?;
            let (counts, kap) = kappa(&trace);
            let valid = validate_schedule(&trace, d, trace.window).is_valid();
            let err = trace.final_state().distance(&oracle, NormKind::Infinity);
            println!(
                "{:<18} D={d}  events {:>4}  κ = {kap:>3} (κ/k {:.2})  valid {valid}  error {err:.2e}  counts {:?}",
                policy.name(),
                trace.len(),
                kap as f64 / k as f64,
                &counts[1..]
            );
        }
    }
    Ok(())
}
