//! λ = 0 with Global exchange: exponential sizes, Zipf-distributed
//! `m = exp(w)`, and Laplace growth rates `ln(m(t+1) / m(t))`.

use serde::Serialize;

use super::{stream, Context, Setup};
use crate::error::{Error, Result};
use crate::exchange::{growth_series, to_multiplicative, ExchangeTopology, FirmVector, RetentionRule, Simulation};
use crate::stats::{ks_distance, tail_exponent_pooled, Ecdf, Moments, Reference, TailEstimate};

#[derive(Clone, Debug, Serialize)]
pub struct GrowthStats {
    pub count: usize,
    pub pairs: usize,
    pub mean: f64,
    pub variance: f64,
    pub excess_kurtosis: f64,
    pub ks_laplace: f64,
}

/// One named pass/fail check against a stated tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub passed: bool,
}

impl Check {
    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.to_owned(),
            value,
            lo,
            hi,
            passed: value >= lo && value <= hi,
        }
    }

    /// A yes/no check, recorded as value 1 or 0 against the range [1, 1].
    pub fn flag(name: &str, ok: bool) -> Self {
        Self::within(name, if ok { 1.0 } else { 0.0 }, 1.0, 1.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ZipfLaplaceReport {
    pub setup: Setup,
    pub ks_exponential: f64,
    pub zipf: TailEstimate,
    pub growth: GrowthStats,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub m: Ecdf,
    #[serde(skip)]
    pub growth_rates: Ecdf,
}

impl ZipfLaplaceReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Pools `sample_count` snapshots at `relax + k * gap` and `growth_pairs`
/// consecutive-sweep pairs starting at the same times.
pub fn run_zipf_laplace(ctx: &Context, setup: &Setup, growth_pairs: usize) -> Result<ZipfLaplaceReport> {
    if setup.topology != ExchangeTopology::Global {
        return Err(Error::config("zipf_laplace.topology", "the multiplicative mapping assumes global exchange"));
    }
    setup.validate()?;
    if growth_pairs == 0 {
        return Err(Error::config("zipf_laplace.growth_pairs", "must be >= 1"));
    }
    let rule = RetentionRule::constant(0.0)?;
    let rng = ctx.stream(stream::ZIPF);
    let init = FirmVector::initial(setup.n_agents, setup.initial, &mut rng.split(0))?;
    let mut sim = Simulation::new(init, rule, setup.topology, rng.split(1))?;
    let p = setup.protocol;
    for _ in 0..p.relax_sweeps {
        sim.sweep()?;
    }
    let mut pooled = Vec::with_capacity(setup.pooled_len());
    let mut growth = Vec::with_capacity(growth_pairs * setup.n_agents);
    for k in 0..p.sample_count.max(growth_pairs) {
        let mut advanced = 0;
        if k < p.sample_count {
            pooled.extend_from_slice(sim.state().sizes());
        }
        if k < growth_pairs {
            let before = sim.state().clone();
            sim.sweep()?;
            advanced = 1;
            growth.extend(growth_series(&[before, sim.state().clone()])?);
        }
        for _ in advanced..p.sample_gap {
            sim.sweep()?;
        }
    }

    let w = Ecdf::new(pooled)?;
    let ks_exponential = ks_distance(&w, &Reference::Exponential { mean: 1.0 })?;
    let m = Ecdf::new(to_multiplicative(w.values())?)?;
    // m >= 1 always, and P(m > x) = 1/x for exponential w
    let zipf = tail_exponent_pooled(&m, 1.0, p.sample_count)?;
    let moments = Moments::of(&growth);
    let count = growth.len();
    let growth_rates = Ecdf::new(growth)?;
    let ks_laplace = ks_distance(&growth_rates, &Reference::Laplace { loc: 0.0, scale: 1.0 })?;
    let growth = GrowthStats {
        count,
        pairs: growth_pairs,
        mean: moments.mean,
        variance: moments.variance,
        excess_kurtosis: moments.excess_kurtosis,
        ks_laplace,
    };
    let checks = vec![
        Check::within("ks_exponential", ks_exponential, 0.0, 0.03),
        Check::within("zipf_pdf_exponent", zipf.regression.exponent, -2.15, -1.85),
        Check::within("growth_variance", growth.variance, 1.8, 2.2),
        Check::within("growth_excess_kurtosis", growth.excess_kurtosis, 2.5, 3.5),
        Check::within("ks_laplace", growth.ks_laplace, 0.0, 0.05),
    ];
    Ok(ZipfLaplaceReport {
        setup: setup.clone(),
        ks_exponential,
        zipf,
        growth,
        checks,
        m,
        growth_rates,
    })
}
