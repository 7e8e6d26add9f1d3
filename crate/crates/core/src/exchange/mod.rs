//! The kinetic exchange dynamics.
//!
//! In one group interaction among agents `S`, every `j ∈ S` keeps `λ(w_j) w_j`
//! and the released mass `Σ_{j∈S} (1 − λ(w_j)) w_j` is split by fresh
//! simplex fractions `ε`. Total size is conserved exactly up to rounding.

mod multiplicative;
mod retention;
mod run;
mod state;
mod step;
mod topology;

pub use multiplicative::{growth_series, to_multiplicative};
pub use retention::RetentionRule;
pub use run::{
    run, NullSink, Protocol, RunOutput, Simulation, TrajectoryRecord, TrajectorySink, RENORMALIZE_THRESHOLD,
};
pub use state::{FirmVector, InitialCondition};
pub use step::{apply_exchange, exchange_step, sweep, Exchanger, StepRecord};
pub use topology::ExchangeTopology;
