//! Without contraction, synchronous and asynchronous Parareal still reach
//! the sequential fine solution exactly after finitely many updates.

use parareal_lab::analysis::{check_finite_termination, TraceRef};
use parareal_lab::async_parareal::run_async_parareal;
use parareal_lab::engine::{ActivationPolicy, AsyncSchedule};
use parareal_lab::model::AffinePropagator;
use parareal_lab::sync::{run_parareal, sequential_fine_solve};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // |G| > 1: no contraction in any norm
    let g = AffinePropagator::scalar(1.5, 0.1, 1.0);
    let f = AffinePropagator::scalar(-0.9, 0.3, 50.0);
    let u0 = [2.0];
    for p in [2, 4, 8] {
        let oracle = sequential_fine_solve(&f, &u0, p)?;
        let sync = run_parareal(&g, &f, &u0, p, 0.0, None)?;
        let at = check_finite_termination(TraceRef::Sync(&sync), &oracle);
        println!("p = {p}: sync exact at iteration {at:?}");
        for seed in [1, 2, 3] {
            let schedule = AsyncSchedule::new(ActivationPolicy::RandomFair, seed, 2);
            let trace = run_async_parareal(&g, &f, &u0, p, &schedule, None)?;
            let at = check_finite_termination(TraceRef::Async(&trace), &oracle);
            println!(
                "        async seed {seed}: exact after {at:?} events, quiescent after {}",
                trace.len()
            );
        }
    }
    Ok(())
}
