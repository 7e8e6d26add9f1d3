use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::{ExchangeTopology, Exchanger, FirmVector, RetentionRule};
use crate::rng::RngStream;
use crate::stats::{summarize, BinScale, DistributionSummary};

/// Relative drift of `Σw` tolerated over a run before the state is rescaled.
pub const RENORMALIZE_THRESHOLD: f64 = 1e-9;

/// Steady-state sampling schedule: relax, then record every `sample_gap` sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Protocol {
    pub relax_sweeps: u64,
    pub sample_count: usize,
    pub sample_gap: u64,
}

impl Default for Protocol {
    /// 1000 relaxation sweeps, then 100 snapshots 10 sweeps apart.
    fn default() -> Self {
        Self {
            relax_sweeps: 1000,
            sample_count: 100,
            sample_gap: 10,
        }
    }
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::config("protocol.sample_count", "must be >= 1"));
        }
        if self.sample_gap == 0 {
            return Err(Error::config("protocol.sample_gap", "must be >= 1"));
        }
        Ok(())
    }

    /// Sweeps executed in total; the last snapshot is taken at this time.
    pub fn total_sweeps(&self) -> u64 {
        self.relax_sweeps + (self.sample_count as u64 - 1) * self.sample_gap
    }

    pub fn pooled_len(&self, n_agents: usize) -> usize {
        n_agents * self.sample_count
    }
}

/// One observation of a tracked agent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub t: u64,
    pub agent: usize,
    pub w: f64,
    pub lambda: f64,
}

/// Append-only destination for tracked-agent observations.
pub trait TrajectorySink {
    fn record(&mut self, rec: TrajectoryRecord);
}

impl TrajectorySink for Vec<TrajectoryRecord> {
    fn record(&mut self, rec: TrajectoryRecord) {
        self.push(rec);
    }
}

/// Discards everything.
pub struct NullSink;

impl TrajectorySink for NullSink {
    fn record(&mut self, _rec: TrajectoryRecord) {}
}

/// A population evolving under a fixed rule and topology.
pub struct Simulation {
    state: FirmVector,
    exchanger: Exchanger,
    rng: RngStream,
    reference_total: f64,
    renormalizations: usize,
}

impl Simulation {
    pub fn new(init: FirmVector, rule: RetentionRule, topology: ExchangeTopology, rng: RngStream) -> Result<Self> {
        let exchanger = Exchanger::new(rule, topology, init.len())?;
        let reference_total = init.total();
        Ok(Self {
            state: init,
            exchanger,
            rng,
            reference_total,
            renormalizations: 0,
        })
    }

    pub fn state(&self) -> &FirmVector {
        &self.state
    }

    pub fn rule(&self) -> &RetentionRule {
        self.exchanger.rule()
    }

    pub fn renormalizations(&self) -> usize {
        self.renormalizations
    }

    pub fn sweep(&mut self) -> Result<()> {
        self.exchanger.sweep(&mut self.state, &mut self.rng)?;
        let total = self.state.total();
        if self.reference_total > 0.0 {
            let drift = (total - self.reference_total).abs() / self.reference_total;
            if drift > RENORMALIZE_THRESHOLD {
                log::warn!(
                    "t={}: total drifted by {drift:.3e} (relative); rescaling to {}",
                    self.state.time(),
                    self.reference_total
                );
                let scale = self.reference_total / total;
                self.state.sizes_mut().iter_mut().for_each(|w| *w *= scale);
                self.renormalizations += 1;
            }
        }
        Ok(())
    }

    /// Retention rate of every agent at the current state.
    pub fn lambdas(&self) -> Vec<f64> {
        let rule = self.exchanger.rule();
        self.state
            .sizes()
            .iter()
            .enumerate()
            .map(|(i, &w)| rule.lambda(w, i))
            .collect()
    }

    /// Reports the tracked agents' current `(t, w, λ)` to `sink`.
    pub fn emit(&self, tracked: &[usize], sink: &mut dyn TrajectorySink) {
        let rule = self.exchanger.rule();
        for &agent in tracked {
            let w = self.state.sizes()[agent];
            sink.record(TrajectoryRecord {
                t: self.state.time(),
                agent,
                w,
                lambda: rule.lambda(w, agent),
            });
        }
    }

    pub fn into_state(self) -> FirmVector {
        self.state
    }
}

/// Pooled steady-state samples of one run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    /// All recorded sizes, snapshot-major (`N * sample_count` values).
    pub pooled: Vec<f64>,
    /// Retention rate matching each entry of `pooled`.
    pub pooled_lambda: Vec<f64>,
    /// Per-agent averages over the recorded snapshots.
    pub agent_mean_w: Vec<f64>,
    pub agent_mean_lambda: Vec<f64>,
    pub final_state: FirmVector,
    pub renormalizations: usize,
}

impl RunOutput {
    /// Histogram and moments of the pooled sizes with the λ inset.
    pub fn summary(&self, bins: usize, scale: BinScale) -> Result<DistributionSummary> {
        summarize(&self.pooled, Some(&self.pooled_lambda), bins, scale)
    }
}

/// Relaxes, then pools `sample_count` snapshots `sample_gap` sweeps apart.
///
/// Snapshots are taken at `t = relax + k * gap`, `k = 0..sample_count`. Tracked
/// agents are reported to `sink` at every sweep from `t = 0` onwards.
pub fn run(
    init: FirmVector,
    rule: &RetentionRule,
    topology: ExchangeTopology,
    rng: RngStream,
    protocol: &Protocol,
    tracked: &[usize],
    sink: &mut dyn TrajectorySink,
) -> Result<RunOutput> {
    protocol.validate()?;
    let n = init.len();
    if let Some(&bad) = tracked.iter().find(|&&a| a >= n) {
        return Err(Error::invalid_arg(format!("tracked agent {bad} out of range for N = {n}")));
    }
    let mut sim = Simulation::new(init, rule.clone(), topology, rng)?;
    let mut pooled = Vec::with_capacity(protocol.pooled_len(n));
    let mut pooled_lambda = Vec::with_capacity(protocol.pooled_len(n));
    let mut sum_w = vec![0.0; n];
    let mut sum_l = vec![0.0; n];

    sim.emit(tracked, sink);
    for _ in 0..protocol.relax_sweeps {
        sim.sweep()?;
        sim.emit(tracked, sink);
    }
    for k in 0..protocol.sample_count {
        if k > 0 {
            for _ in 0..protocol.sample_gap {
                sim.sweep()?;
                sim.emit(tracked, sink);
            }
        }
        let lambdas = sim.lambdas();
        for (i, (&w, &l)) in sim.state().sizes().iter().zip(&lambdas).enumerate() {
            sum_w[i] += w;
            sum_l[i] += l;
        }
        pooled.extend_from_slice(sim.state().sizes());
        pooled_lambda.extend_from_slice(&lambdas);
    }
    let m = protocol.sample_count as f64;
    let renormalizations = sim.renormalizations();
    Ok(RunOutput {
        pooled,
        pooled_lambda,
        agent_mean_w: sum_w.into_iter().map(|s| s / m).collect(),
        agent_mean_lambda: sum_l.into_iter().map(|s| s / m).collect(),
        final_state: sim.into_state(),
        renormalizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_dynamics_pool_initial_state() {
        let rule = RetentionRule::constant(1.0).unwrap();
        let mut rng = RngStream::new(1);
        let init = FirmVector::initial(100, crate::exchange::InitialCondition::Uniform, &mut rng).unwrap();
        let protocol = Protocol {
            relax_sweeps: 0,
            sample_count: 1,
            sample_gap: 1,
        };
        let out = run(init.clone(), &rule, ExchangeTopology::Global, rng, &protocol, &[], &mut NullSink).unwrap();
        assert_eq!(out.pooled, init.sizes());
        assert_eq!(out.renormalizations, 0);
    }

    #[test]
    fn standard_protocol_pool_size() {
        let p = Protocol::default();
        assert_eq!((p.relax_sweeps, p.sample_count, p.sample_gap), (1000, 100, 10));
        assert_eq!(p.pooled_len(1000), 100_000);
        assert_eq!(p.total_sweeps(), 1990);
    }

    #[test]
    fn trajectory_covers_every_sweep() {
        let rule = RetentionRule::exp_saturating(0.95, 3.0).unwrap();
        let protocol = Protocol {
            relax_sweeps: 20,
            sample_count: 3,
            sample_gap: 5,
        };
        let mut recs = Vec::new();
        let out = run(
            FirmVector::equal(50).unwrap(),
            &rule,
            ExchangeTopology::Global,
            RngStream::new(2),
            &protocol,
            &[4, 9],
            &mut recs,
        )
        .unwrap();
        assert_eq!(recs.len(), 2 * (protocol.total_sweeps() as usize + 1));
        assert_eq!(out.pooled.len(), 150);
        assert_eq!(out.final_state.time(), protocol.total_sweeps());
        for r in &recs {
            assert_eq!(r.lambda, rule.lambda(r.w, r.agent));
        }
    }

    #[test]
    fn rejects_bad_protocol_and_tracking() {
        let rule = RetentionRule::constant(0.5).unwrap();
        let bad = Protocol {
            relax_sweeps: 0,
            sample_count: 0,
            sample_gap: 1,
        };
        let init = FirmVector::equal(10).unwrap();
        assert!(run(init.clone(), &rule, ExchangeTopology::Global, RngStream::new(0), &bad, &[], &mut NullSink).is_err());
        let p = Protocol::default();
        assert!(run(init, &rule, ExchangeTopology::Global, RngStream::new(0), &p, &[10], &mut NullSink).is_err());
    }
}
