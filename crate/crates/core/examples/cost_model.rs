//! Cost model for one Table-1 style row: p = 16, k = 10, κ = 24,
//! C_F = 14, C_G = 0.14, C̄ = 1.53.

use parareal_lab::analysis::{
    asymptotic_speedups, async_cost, fit_overhead, sequential_cost, speedup_bound, sync_cost,
    CostParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let row = CostParams::new(16, 14.0, 0.14, 1.53)
        .with_k(10)
        .with_kappa(24);
    println!("sequential      {:>8.2}", sequential_cost(&row));
    println!("sync            {:>8.2}", sync_cost(&row)?);
    println!("async           {:>8.2}", async_cost(&row)?);
    let speedup = speedup_bound(&row)?;
    println!(
        "speedup bound   {:>8.3}  achieved {:.3}",
        speedup.bound,
        speedup.achieved.unwrap_or(f64::NAN)
    );
    let limits = asymptotic_speedups(&row)?;
    println!(
        "p → ∞           sync/seq {:.4}  async/seq {:.2}  async/sync {:.2}",
        limits.sync_vs_seq, limits.async_vs_seq, limits.async_vs_sync
    );
    for t in [280.0, 288.99, 300.0] {
        println!(
            "fit C̄ from T = {t:>6}: {:.4}",
            fit_overhead(t, 16, 10, 14.0, 0.14)?
        );
    }
    Ok(())
}
