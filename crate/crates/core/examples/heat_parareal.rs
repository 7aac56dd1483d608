//! Synchronous Parareal on the 1D heat benchmark: error per iteration
//! against the sequential fine solution and the a priori bound.

use parareal_lab::analysis::{contraction_factors, sync_convergence_check};
use parareal_lab::linalg::NormKind;
use parareal_lab::model::{heat1d_system, Rule};
use parareal_lab::sync::{run_parareal, sequential_fine_solve};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (p, dt) = (16, 0.2);
    let ivp = heat1d_system(8, 1.0, 23.0, 23.0, 30.0, p as f64 * dt)?;
    let g = Rule::BackwardEuler.propagator(&ivp, dt, 1)?;
    let f = Rule::Trapezoidal.propagator(&ivp, dt, 100)?;

    let report = contraction_factors(&g, &f, p, NormKind::Spectral, None)?;
    let check = sync_convergence_check(&report);
    println!(
        "‖G‖ = {:.4}  ‖F−G‖ = {:.4e}  α = {:.4e}  converges: {} (margin {:.3})",
        report.norm_g, report.norm_fmg, report.alpha, check.holds, check.margin
    );

    let oracle = sequential_fine_solve(&f, &ivp.initial, p)?;
    let trace = run_parareal(&g, &f, &ivp.initial, p, 1e-6, None)?;
    let e0 = trace.iterates[0].distance(&oracle, NormKind::Spectral);
    println!(
        "{:>3}  {:>12}  {:>12}  {:>12}",
        "k", "error", "bound", "delta"
    );
    for (k, lam) in trace.iterates.iter().enumerate() {
        let err = lam.distance(&oracle, NormKind::Spectral);
        let delta = k.checked_sub(1).map_or(f64::NAN, |j| trace.deltas[j]);
        let bound = report.alpha.powi(k as i32) * e0;
        println!("{k:>3}  {err:>12.3e}  {bound:>12.3e}  {delta:>12.3e}");
    }
    println!(
        "stopped after k = {} ({})",
        trace.k_final,
        trace.stop_reason.name()
    );
    Ok(())
}
