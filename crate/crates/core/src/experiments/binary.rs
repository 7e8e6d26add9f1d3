use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{stream, Context, PopulationReport, Setup};
use crate::error::{Error, Result};
use crate::exchange::{ExchangeTopology, FirmVector, RetentionRule, Simulation};
use crate::rng::RngStream;
use crate::stats::{ks_two_sample, Ecdf};

/// Steady-state detection: pool `window` consecutive sweeps, compare with the
/// previous window, stop at the first KS distance below `threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceCriterion {
    pub window: u64,
    pub threshold: f64,
    pub max_sweeps: u64,
}

impl Default for ConvergenceCriterion {
    fn default() -> Self {
        Self {
            window: 20,
            threshold: 0.01,
            max_sweeps: 5000,
        }
    }
}

impl ConvergenceCriterion {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::config("convergence.window", "must be >= 1"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::config("convergence.threshold", "must lie in (0, 1)"));
        }
        if self.max_sweeps < 2 * self.window {
            return Err(Error::config("convergence.max_sweeps", "must cover at least two windows"));
        }
        Ok(())
    }
}

/// First sweep `t` at which sweeps `t-2W+1..=t-W` and `t-W+1..=t` pool to
/// distributions closer than the threshold; `None` if `max_sweeps` pass first.
pub fn convergence_sweeps(
    rule: &RetentionRule,
    topology: ExchangeTopology,
    init: FirmVector,
    rng: RngStream,
    criterion: &ConvergenceCriterion,
) -> Result<Option<u64>> {
    criterion.validate()?;
    let w = criterion.window as usize;
    let mut sim = Simulation::new(init, rule.clone(), topology, rng)?;
    let mut recent: VecDeque<Vec<f64>> = VecDeque::with_capacity(2 * w + 1);
    for t in 1..=criterion.max_sweeps {
        sim.sweep()?;
        recent.push_back(sim.state().sizes().to_vec());
        if recent.len() > 2 * w {
            recent.pop_front();
        }
        if recent.len() == 2 * w {
            let older = Ecdf::new(recent.iter().take(w).flatten().copied().collect())?;
            let newer = Ecdf::new(recent.iter().skip(w).flatten().copied().collect())?;
            if ks_two_sample(&older, &newer) < criterion.threshold {
                return Ok(Some(t));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct TopologyReport {
    pub topology: ExchangeTopology,
    pub population: PopulationReport,
    pub convergence_sweeps: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BinaryRow {
    pub c2: f64,
    pub global: TopologyReport,
    pub binary: TopologyReport,
    pub verdicts_agree_at_5: bool,
    /// KS distance between the two pooled distributions.
    pub ks_between: f64,
}

impl BinaryRow {
    /// `Some(true)` when Global converged strictly sooner; `None` if either never did.
    pub fn global_faster(&self) -> Option<bool> {
        Some(self.global.convergence_sweeps? < self.binary.convergence_sweeps?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BinaryReport {
    pub c1: f64,
    pub setup: Setup,
    pub criterion: ConvergenceCriterion,
    pub rows: Vec<BinaryRow>,
}

const TOPOLOGIES: [ExchangeTopology; 2] = [ExchangeTopology::Global, ExchangeTopology::Binary];

/// Same rule under Global and Binary exchange. Run `(i, topo)` uses
/// `BINARY.split_path([i, topo, 0])` for the pooled sample and `[i, topo, 1]`
/// for convergence detection.
pub fn run_binary_replication(
    ctx: &Context,
    c1: f64,
    c2_values: &[f64],
    setup: &Setup,
    criterion: &ConvergenceCriterion,
) -> Result<BinaryReport> {
    setup.validate()?;
    setup.with_topology(ExchangeTopology::Binary).validate()?;
    criterion.validate()?;
    let rules = c2_values
        .iter()
        .map(|&c2| RetentionRule::exp_saturating(c1, c2))
        .collect::<Result<Vec<_>>>()?;
    ctx.nulls().table(setup.pooled_len())?;
    let base = ctx.stream(stream::BINARY);
    let jobs: Vec<(usize, usize)> = (0..rules.len()).flat_map(|i| (0..2).map(move |k| (i, k))).collect();
    let mut reports = jobs
        .par_iter()
        .map(|&(i, k)| {
            let topo = TOPOLOGIES[k];
            let s = setup.with_topology(topo);
            let out = s.simulate(&rules[i], &base.split_path(&[i as u64, k as u64, 0]))?;
            let population = PopulationReport::from_run(ctx, &out)?;
            let conv_rng = base.split_path(&[i as u64, k as u64, 1]);
            let init = FirmVector::initial(s.n_agents, s.initial, &mut conv_rng.split(0))?;
            let convergence_sweeps = convergence_sweeps(&rules[i], topo, init, conv_rng.split(1), criterion)?;
            Ok(TopologyReport {
                topology: topo,
                population,
                convergence_sweeps,
            })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let mut rows = Vec::with_capacity(rules.len());
    for &c2 in c2_values {
        let global = reports.next().expect("global report");
        let binary = reports.next().expect("binary report");
        let ks_between = ks_two_sample(&global.population.summary.pooled, &binary.population.summary.pooled);
        rows.push(BinaryRow {
            c2,
            verdicts_agree_at_5: global.population.dip.verdict_at(0.05) == binary.population.dip.verdict_at(0.05),
            ks_between,
            global,
            binary,
        });
    }
    Ok(BinaryReport {
        c1,
        setup: setup.clone(),
        criterion: *criterion,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_dynamics_converge_immediately() {
        let rule = RetentionRule::constant(1.0).unwrap();
        let c = ConvergenceCriterion {
            window: 3,
            threshold: 0.01,
            max_sweeps: 100,
        };
        let t = convergence_sweeps(&rule, ExchangeTopology::Global, FirmVector::equal(10).unwrap(), RngStream::new(0), &c)
            .unwrap();
        assert_eq!(t, Some(6));
    }

    #[test]
    fn criterion_validation() {
        assert!(ConvergenceCriterion::default().validate().is_ok());
        let bad = ConvergenceCriterion {
            window: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ConvergenceCriterion {
            threshold: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
