//! Scenario runners, one per studied regime.
//!
//! Every runner draws its randomness from a [`Context`] by position: the
//! stream for a scan cell depends on its grid coordinates and replica index
//! only, so cells can be re-run in isolation and parallel execution order
//! never changes the output.

mod binary;
mod emergence;
mod scan;
mod transition;
mod zipf;

pub use binary::{convergence_sweeps, run_binary_replication, BinaryReport, BinaryRow, ConvergenceCriterion, TopologyReport};
pub use emergence::{run_bimodality_emergence, run_tracked_trajectory, EmergenceRow, TrajectoryReport};
pub use scan::{
    run_phase_scan, run_scan_cell, run_sigmoid_scan, CellResult, PhaseDiagram, RuleKind, ScanCell, ScanGrid, SigmoidScan,
};
pub use transition::{run_transition, TransitionRow, TransitionSweep};
pub use zipf::{run_zipf_laplace, Check, GrowthStats, ZipfLaplaceReport};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exchange::{run, ExchangeTopology, FirmVector, InitialCondition, NullSink, Protocol, RetentionRule, RunOutput};
use crate::rng::RngStream;
use crate::stats::{ks_distance, BinScale, DipResult, DistributionSummary, Ecdf, NullCache, Reference, DEFAULT_BINS};

/// Child stream ids of the master stream.
pub mod stream {
    pub const NULL: u64 = 0;
    pub const EMERGENCE: u64 = 1;
    pub const TRAJECTORY: u64 = 2;
    pub const SCAN: u64 = 3;
    pub const SIGMOID_SCAN: u64 = 4;
    pub const TRANSITION: u64 = 5;
    pub const BINARY: u64 = 6;
    pub const ZIPF: u64 = 7;
    pub const SIMULATE: u64 = 8;
}

/// Master stream plus the dip null tables shared by every experiment.
pub struct Context {
    seed: u64,
    master: RngStream,
    nulls: NullCache,
    bins: usize,
}

impl Context {
    pub fn new(seed: u64, null_reps: usize) -> Self {
        let master = RngStream::new(seed);
        let nulls = NullCache::new(master.split(stream::NULL), null_reps);
        Self {
            seed,
            master,
            nulls,
            bins: DEFAULT_BINS,
        }
    }

    /// Histogram bin count for every summary produced under this context.
    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = bins;
        self
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, id: u64) -> RngStream {
        self.master.split(id)
    }

    pub fn nulls(&self) -> &NullCache {
        &self.nulls
    }

    /// Dip test of a pooled sample against the cached null for its size.
    pub fn dip(&self, pooled: &Ecdf) -> Result<DipResult> {
        self.nulls.test(pooled)
    }
}

/// Population size, topology, start state and sampling protocol of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Setup {
    pub n_agents: usize,
    pub topology: ExchangeTopology,
    #[serde(default)]
    pub initial: InitialCondition,
    pub protocol: Protocol,
}

impl Default for Setup {
    fn default() -> Self {
        Self {
            n_agents: 1000,
            topology: ExchangeTopology::Global,
            initial: InitialCondition::Equal,
            protocol: Protocol::default(),
        }
    }
}

impl Setup {
    pub fn with_topology(&self, topology: ExchangeTopology) -> Self {
        Self { topology, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.topology.validate(self.n_agents)?;
        self.protocol.validate()
    }

    pub fn pooled_len(&self) -> usize {
        self.protocol.pooled_len(self.n_agents)
    }

    /// Runs the protocol; the start state uses `rng.split(0)`, the dynamics `rng.split(1)`.
    pub fn simulate(&self, rule: &RetentionRule, rng: &RngStream) -> Result<RunOutput> {
        let init = FirmVector::initial(self.n_agents, self.initial, &mut rng.split(0))?;
        run(init, rule, self.topology, rng.split(1), &self.protocol, &[], &mut NullSink)
    }
}

/// Pooled distribution of one run with its dip test.
#[derive(Clone, Debug, Serialize)]
pub struct PopulationReport {
    pub summary: DistributionSummary,
    pub dip: DipResult,
    pub ks_exponential: f64,
    pub renormalizations: usize,
}

impl PopulationReport {
    pub fn from_run(ctx: &Context, out: &RunOutput) -> Result<Self> {
        let summary = out.summary(ctx.bins(), BinScale::Linear)?;
        let dip = ctx.dip(&summary.pooled)?;
        let ks_exponential = ks_distance(&summary.pooled, &Reference::Exponential { mean: 1.0 })?;
        Ok(Self {
            summary,
            dip,
            ks_exponential,
            renormalizations: out.renormalizations,
        })
    }
}

/// One run of `rule` under `setup` on the `SIMULATE` stream.
pub fn run_simulation(ctx: &Context, rule: &RetentionRule, setup: &Setup) -> Result<PopulationReport> {
    setup.validate()?;
    let out = setup.simulate(rule, &ctx.stream(stream::SIMULATE))?;
    PopulationReport::from_run(ctx, &out)
}
