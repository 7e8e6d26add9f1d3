use rayon::prelude::*;
use serde::Serialize;

use super::{stream, Context, PopulationReport, Setup};
use crate::error::Result;
use crate::exchange::RetentionRule;
use crate::stats::{
    meanfield_diagnostic, quantile_grid, select_xmin, tail_exponent_pooled, MeanfieldTable, TailEstimate,
};

#[derive(Clone, Debug, Serialize)]
pub struct TransitionRow {
    pub c2: f64,
    pub population: PopulationReport,
    pub tail: std::result::Result<TailEstimate, String>,
    pub meanfield: std::result::Result<MeanfieldTable, String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionSweep {
    pub setup: Setup,
    /// Per-agent c1, drawn once from U(0, 1) and shared by every row.
    pub quenched_c1: Vec<f64>,
    pub rows: Vec<TransitionRow>,
}

/// Tail cutoff by KS minimisation over the 5%..95% quantiles, keeping at
/// least ten agents' worth of pooled samples above it.
fn fit_tail(pooled: &crate::stats::Ecdf, snapshots: usize) -> Result<TailEstimate> {
    let xmin = select_xmin(pooled, &quantile_grid(0.05, 0.95, 0.01), 10 * snapshots)?;
    tail_exponent_pooled(pooled, xmin, snapshots)
}

/// Quenched-c1 sweep over c2; the c1 vector comes from `TRANSITION.split(0)`
/// and row `i` runs on `TRANSITION.split(1).split(i)`.
pub fn run_transition(ctx: &Context, c2_values: &[f64], setup: &Setup) -> Result<TransitionSweep> {
    setup.validate()?;
    let base = ctx.stream(stream::TRANSITION);
    let mut q = base.split(0);
    let quenched_c1: Vec<f64> = (0..setup.n_agents).map(|_| q.uniform()).collect();
    let rules = c2_values
        .iter()
        .map(|&c2| RetentionRule::quenched(quenched_c1.clone(), c2))
        .collect::<Result<Vec<_>>>()?;
    ctx.nulls().table(setup.pooled_len())?;
    let runs = base.split(1);
    let snapshots = setup.protocol.sample_count;
    let rows = rules
        .par_iter()
        .enumerate()
        .map(|(i, rule)| {
            let out = setup.simulate(rule, &runs.split(i as u64))?;
            let population = PopulationReport::from_run(ctx, &out)?;
            let tail = fit_tail(&population.summary.pooled, snapshots).map_err(|e| e.to_string());
            let agents: Vec<(f64, f64)> = out
                .agent_mean_lambda
                .iter()
                .copied()
                .zip(out.agent_mean_w.iter().copied())
                .collect();
            let meanfield = meanfield_diagnostic(&agents).map_err(|e| e.to_string());
            Ok(TransitionRow {
                c2: c2_values[i],
                population,
                tail,
                meanfield,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionSweep {
        setup: setup.clone(),
        quenched_c1,
        rows,
    })
}
