//! Asynchronous Jacobi relaxation: the ρ(|H|) < 1 test, and the measured
//! weighted error against the per-window bound.

use parareal_lab::analysis::{chazan_miranker_check, perron_weights, weighted_error, window_bound};
use parareal_lab::engine::relaxation::LinearRelaxation;
use parareal_lab::engine::{simulate_async, ActivationPolicy, AsyncSchedule, SimView};
use parareal_lab::linalg::{BlockVector, DenseMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = DenseMatrix::from_rows(&[
        vec![4.0, -1.0, 0.0, 1.0],
        vec![-1.0, 4.0, -1.0, 0.0],
        vec![0.0, -1.0, 4.0, -1.0],
        vec![1.0, 0.0, -1.0, 4.0],
    ])?;
    let b = [1.0, 2.0, 3.0, 4.0];
    let m = DenseMatrix::diag(&[4.0; 4]);
    let report = chazan_miranker_check(&a, &m)?;
    println!(
        "ρ(|I − M⁻¹A|) = {:.4}, converges for every fair schedule: {}",
        report.radius, report.holds
    );

    let (w, gamma) = perron_weights(&report.abs_iteration);
    let map = LinearRelaxation::new(&a, &m, &b)?;
    let exact = {
        let stop = |v: &SimView| v.last_deltas().iter().all(|d| *d < 1e-15);
        let sched = AsyncSchedule::full_sweep();
        simulate_async(&map, &BlockVector::zeros(4, 1), &sched, Some(&stop))?
            .final_state()
            .flatten()
    };

    for d in [0, 2, 4] {
        let schedule = AsyncSchedule::new(ActivationPolicy::AdversarialStale, 11, d);
        let stop = |v: &SimView| {
            v.last_deltas().iter().all(|x| *x < 1e-12) && v.max_in_flight_change() < 1e-12
        };
        let trace = simulate_async(&map, &BlockVector::zeros(4, 1), &schedule, Some(&stop))?;
        let e0 = weighted_error(&[0.0; 4], &exact, &w);
        println!("D = {d}: {} events, window {}", trace.len(), trace.window);
        for (n, state) in trace
            .snapshots()
            .enumerate()
            .filter(|(n, _)| (n + 1) % (4 * trace.window) == 0)
        {
            let windows = (n + 1) / trace.window;
            let err = weighted_error(&state.flatten(), &exact, &w);
            println!(
                "  windows {windows:>3}  error {err:.3e}  bound {:.3e}",
                window_bound(gamma, windows, d, e0)
            );
        }
    }
    Ok(())
}
