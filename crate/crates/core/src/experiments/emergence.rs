use rayon::prelude::*;
use serde::Serialize;

use super::{stream, Context, PopulationReport, Setup};
use crate::error::{Error, Result};
use crate::exchange::{ExchangeTopology, FirmVector, RetentionRule, Simulation, TrajectoryRecord};
use crate::stats::{summarize, BinScale, DistributionSummary};

#[derive(Clone, Debug, Serialize)]
pub struct EmergenceRow {
    pub c1: f64,
    pub c2: f64,
    pub population: PopulationReport,
}

/// Pooled distributions for one c1 across several c2; row `i` uses stream `i`.
pub fn run_bimodality_emergence(ctx: &Context, c1: f64, c2_values: &[f64], setup: &Setup) -> Result<Vec<EmergenceRow>> {
    setup.validate()?;
    let rules = c2_values
        .iter()
        .map(|&c2| RetentionRule::exp_saturating(c1, c2))
        .collect::<Result<Vec<_>>>()?;
    ctx.nulls().table(setup.pooled_len())?;
    let base = ctx.stream(stream::EMERGENCE);
    rules
        .par_iter()
        .enumerate()
        .map(|(i, rule)| {
            let out = setup.simulate(rule, &base.split(i as u64))?;
            Ok(EmergenceRow {
                c1,
                c2: c2_values[i],
                population: PopulationReport::from_run(ctx, &out)?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryReport {
    pub tracked: usize,
    /// One record per sweep, `t = 0..=sweeps`.
    pub records: Vec<TrajectoryRecord>,
    pub time_average_w: f64,
    /// Population at the final sweep.
    pub final_summary: DistributionSummary,
}

/// Follows one agent's `(w, λ)` for `sweeps` sweeps from the equal start state.
pub fn run_tracked_trajectory(
    ctx: &Context,
    rule: &RetentionRule,
    topology: ExchangeTopology,
    n_agents: usize,
    sweeps: u64,
    tracked: usize,
) -> Result<TrajectoryReport> {
    if tracked >= n_agents {
        return Err(Error::invalid_arg(format!("tracked agent {tracked} out of range for N = {n_agents}")));
    }
    let mut sim = Simulation::new(FirmVector::equal(n_agents)?, rule.clone(), topology, ctx.stream(stream::TRAJECTORY))?;
    let mut records: Vec<TrajectoryRecord> = Vec::with_capacity(sweeps as usize + 1);
    sim.emit(&[tracked], &mut records);
    for _ in 0..sweeps {
        sim.sweep()?;
        sim.emit(&[tracked], &mut records);
    }
    let time_average_w = records[1..].iter().map(|r| r.w).sum::<f64>() / sweeps.max(1) as f64;
    let lambdas = sim.lambdas();
    let final_summary = summarize(sim.state().sizes(), Some(&lambdas), ctx.bins(), BinScale::Linear)?;
    Ok(TrajectoryReport {
        tracked,
        records,
        time_average_w,
        final_summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_series_matches_rule() {
        let ctx = Context::new(1, 100);
        let rule = RetentionRule::exp_saturating(0.95, 3.0).unwrap();
        let rep = run_tracked_trajectory(&ctx, &rule, ExchangeTopology::Global, 100, 200, 7).unwrap();
        assert_eq!(rep.records.len(), 201);
        for (t, r) in rep.records.iter().enumerate() {
            assert_eq!(r.t, t as u64);
            assert_eq!(r.agent, 7);
            assert_eq!(r.lambda, rule.eval(r.w, 7).unwrap());
        }
        assert!(run_tracked_trajectory(&ctx, &rule, ExchangeTopology::Global, 100, 10, 100).is_err());
    }

    #[test]
    fn zero_c1_equals_zero_c2() {
        let ctx = Context::new(2, 100);
        let setup = Setup {
            n_agents: 100,
            protocol: crate::exchange::Protocol {
                relax_sweeps: 10,
                sample_count: 5,
                sample_gap: 2,
            },
            ..Setup::default()
        };
        let a = run_bimodality_emergence(&ctx, 0.0, &[3.0], &setup).unwrap();
        let b = run_bimodality_emergence(&ctx, 0.95, &[0.0], &setup).unwrap();
        assert_eq!(a[0].population.summary.pooled, b[0].population.summary.pooled);
    }
}
