use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode};
use super::ExperimentError;
use crate::analysis::{
    async_convergence_check, async_cost, contraction_factors, fit_overhead, sequential_cost,
    speedup_bound, sync_convergence_check, sync_cost, ContractionReport, ConvergenceCheck,
    CostParams,
};
use crate::async_parareal::{run_async_parareal, AsyncPararealError};
use crate::engine::{kappa, AsyncTrace, EngineError};
use crate::linalg::{BlockVector, NormKind};
use crate::sync::{run_parareal, sequential_fine_solve};

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub p: usize,
    pub t_p: f64,
    pub mode: Mode,
    pub policy: Option<String>,
    pub seed: Option<u64>,
    pub delay_bound: Option<usize>,
    /// `k` for sync, `κ` for async.
    pub iterations: Option<usize>,
    pub events: Option<usize>,
    pub model_cost: f64,
    pub fitted_c_bar: Option<f64>,
    pub error_vs_oracle: f64,
    pub converged: bool,
    pub stop_reason: Option<String>,
    pub kappa_over_k: Option<f64>,
    pub sync_converges: bool,
    pub sync_margin: f64,
    pub async_converges: bool,
    pub async_margin: f64,
    pub alpha: f64,
    pub alpha_tilde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerP {
    pub p: usize,
    pub contraction: ContractionReport,
    pub sync_check: ConvergenceCheck,
    pub async_check: ConvergenceCheck,
    pub cost: CostParams,
    pub speedup_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub analysis: Vec<PerP>,
    pub rows: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub all_converged: bool,
}

fn oracle_error(state: &BlockVector, oracle: &BlockVector) -> f64 {
    state.distance(oracle, NormKind::Infinity)
}

/// Runs every mode for every `p` and writes `summary.csv`, `report.json`
/// and, when asked, `traces/` under `out`.
pub fn run_experiment(
    config: &ExperimentConfig,
    out: &Path,
    traces: bool,
) -> Result<ExperimentOutcome, ExperimentError> {
    config.validate()?;
    fs::create_dir_all(out).map_err(ExperimentError::io(out))?;
    let trace_dir = out.join("traces");
    if traces {
        fs::create_dir_all(&trace_dir).map_err(ExperimentError::io(&trace_dir))?;
    }

    let mut modes = config.modes.clone();
    // errors are measured against the sequential solution, so it is always listed
    if !modes.contains(&Mode::Sequential) && modes.iter().any(|m| *m != Mode::Sequential) {
        modes.push(Mode::Sequential);
    }
    modes.sort();
    modes.dedup();

    let mut rows = Vec::new();
    let mut analysis = Vec::new();
    let mut all_converged = true;

    for p in config.decomposition.p.values() {
        let decomposition = config.decomposition_for(p)?;
        let t_p = decomposition.t_end();
        let ivp = config.problem.build(t_p)?;
        let span = decomposition.coarse_dt;
        let g =
            config
                .propagators
                .coarse
                .propagator(&ivp, span, config.propagators.coarse_steps)?;
        let f = config
            .propagators
            .fine
            .propagator(&ivp, span, decomposition.fine_steps)?;
        let u0 = &ivp.initial;
        let oracle = sequential_fine_solve(&f, u0, p)?;

        let report = contraction_factors(&g, &f, p, config.norm, None)?;
        let sync_check = sync_convergence_check(&report);
        let async_check = async_convergence_check(&report);
        let cost = CostParams::new(
            p,
            config.cost.c_f.unwrap_or(f.cost_units),
            config.cost.c_g.unwrap_or(g.cost_units),
            config.cost.c_bar.unwrap_or(0.0),
        );

        let base = |mode: Mode| SummaryRow {
            p,
            t_p,
            mode,
            policy: None,
            seed: None,
            delay_bound: None,
            iterations: None,
            events: None,
            model_cost: 0.0,
            fitted_c_bar: None,
            error_vs_oracle: 0.0,
            converged: true,
            stop_reason: None,
            kappa_over_k: None,
            sync_converges: sync_check.holds,
            sync_margin: sync_check.margin,
            async_converges: async_check.holds,
            async_margin: async_check.margin,
            alpha: report.alpha,
            alpha_tilde: report.alpha_tilde,
        };

        let mut k_sync = None;
        for mode in &modes {
            match mode {
                Mode::Sequential => rows.push(SummaryRow {
                    model_cost: sequential_cost(&cost),
                    ..base(Mode::Sequential)
                }),
                Mode::Sync => {
                    let trace = run_parareal(&g, &f, u0, p, config.epsilon, None)?;
                    let k = trace.k_final;
                    k_sync = Some(k);
                    let fitted = match config.cost.measured_sync_time {
                        Some(t) => Some(fit_overhead(t, p, k, cost.c_f, cost.c_g)?),
                        None => None,
                    };
                    log::info!("p={p} sync: k={k} ({})", trace.stop_reason.name());
                    if traces {
                        let path = trace_dir.join(format!("sync_p{p}.json"));
                        let text = serde_json::to_string_pretty(&trace.to_json(true))? + "\n";
                        fs::write(&path, text).map_err(ExperimentError::io(&path))?;
                    }
                    rows.push(SummaryRow {
                        iterations: Some(k),
                        model_cost: sync_cost(&cost.with_k(k))?,
                        fitted_c_bar: fitted,
                        error_vs_oracle: oracle_error(trace.final_iterate(), &oracle),
                        stop_reason: Some(trace.stop_reason.name().into()),
                        ..base(Mode::Sync)
                    });
                }
                Mode::Async => {
                    for (idx, schedule) in config.schedules.iter().enumerate() {
                        let result =
                            run_async_parareal(&g, &f, u0, p, schedule, Some(config.epsilon));
                        let (trace, converged): (AsyncTrace, bool) = match result {
                            Ok(t) => (t, true),
                            Err(AsyncPararealError::Engine(EngineError::HorizonExhausted {
                                trace,
                                ..
                            })) => (*trace, false),
                            Err(e) => return Err(e.into()),
                        };
                        all_converged &= converged;
                        let (_, kap) = kappa(&trace);
                        log::info!(
                            "p={p} async {} seed={} D={}: kappa={kap}{}",
                            schedule.policy.name(),
                            schedule.seed,
                            schedule.delay_bound,
                            if converged {
                                ""
                            } else {
                                " (horizon exhausted)"
                            }
                        );
                        if traces {
                            let path = trace_dir.join(format!("async_p{p}_{idx}.jsonl"));
                            fs::write(&path, trace.to_jsonl())
                                .map_err(ExperimentError::io(&path))?;
                        }
                        let stop = trace.stop.map_or("horizon", |k| k.name());
                        rows.push(SummaryRow {
                            policy: Some(schedule.policy.name().into()),
                            seed: Some(schedule.seed),
                            delay_bound: Some(schedule.delay_bound),
                            iterations: Some(kap),
                            events: Some(trace.len()),
                            model_cost: async_cost(&cost.with_kappa(kap))?,
                            error_vs_oracle: oracle_error(&trace.final_state(), &oracle),
                            converged,
                            stop_reason: Some(stop.into()),
                            kappa_over_k: k_sync.filter(|k| *k > 0).map(|k| kap as f64 / k as f64),
                            ..base(Mode::Async)
                        });
                    }
                }
            }
        }
        analysis.push(PerP {
            p,
            contraction: report,
            sync_check,
            async_check,
            cost,
            speedup_bound: (p >= 2)
                .then(|| speedup_bound(&cost).map(|s| s.bound))
                .transpose()?,
        });
    }

    let summary = out.join("summary.csv");
    let mut writer = csv::Writer::from_path(&summary)?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(ExperimentError::io(&summary))?;

    let report = ExperimentReport {
        config: config.clone(),
        analysis,
        rows,
    };
    let path = out.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
        .map_err(ExperimentError::io(&path))?;
    Ok(ExperimentOutcome {
        report,
        all_converged,
    })
}
