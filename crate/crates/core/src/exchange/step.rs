use crate::error::{Error, Result};
use crate::exchange::{ExchangeTopology, FirmVector, RetentionRule};
use crate::rng::RngStream;
use crate::simplex::{fill_simplex, SimplexSample};

/// What happened in one group interaction.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub participants: Vec<usize>,
    /// Total released mass `Σ (1 - λ(w_j)) w_j` over the participants.
    pub pool: f64,
    pub epsilon: SimplexSample,
}

/// Applies one exchange among `participants` with given fractions `epsilon`.
///
/// Each participant keeps `λ(w_j) w_j` (λ evaluated at the pre-step size) and
/// receives `ε_j` of the pooled released mass. Returns the pool.
pub fn apply_exchange(
    w: &mut [f64],
    rule: &RetentionRule,
    participants: &[usize],
    epsilon: &[f64],
) -> Result<f64> {
    if participants.len() != epsilon.len() {
        return Err(Error::invalid_arg(format!(
            "{} participants but {} fractions",
            participants.len(),
            epsilon.len()
        )));
    }
    let mut pool = 0.0;
    for &j in participants {
        let wj = *w
            .get(j)
            .ok_or_else(|| Error::invalid_arg(format!("participant {j} out of range")))?;
        let lambda = rule.eval(wj, j)?;
        pool += wj - lambda * wj;
    }
    if !pool.is_finite() {
        return Err(Error::Overflow {
            index: participants[0],
            value: pool,
        });
    }
    for (&j, &e) in participants.iter().zip(epsilon) {
        let wj = w[j];
        w[j] = rule.lambda(wj, j) * wj + e * pool;
    }
    Ok(pool)
}

/// Reusable buffers for repeated steps and sweeps on one population.
#[derive(Clone, Debug)]
pub struct Exchanger {
    rule: RetentionRule,
    topology: ExchangeTopology,
    order: Vec<usize>,
    eps: Vec<f64>,
    released: Vec<f64>,
}

impl Exchanger {
    pub fn new(rule: RetentionRule, topology: ExchangeTopology, n_agents: usize) -> Result<Self> {
        rule.validate()?;
        topology.validate(n_agents)?;
        if let Some(m) = rule.agent_count() {
            if m != n_agents {
                return Err(Error::invalid_arg(format!(
                    "quenched rule has {m} parameters for {n_agents} agents"
                )));
            }
        }
        Ok(Self {
            rule,
            topology,
            order: (0..n_agents).collect(),
            eps: Vec::with_capacity(n_agents),
            released: Vec::with_capacity(n_agents),
        })
    }

    pub fn rule(&self) -> &RetentionRule {
        &self.rule
    }

    pub fn topology(&self) -> ExchangeTopology {
        self.topology
    }

    fn check_len(&self, state: &FirmVector) -> Result<()> {
        if state.len() != self.order.len() {
            return Err(Error::invalid_arg(format!(
                "state has {} agents, exchanger built for {}",
                state.len(),
                self.order.len()
            )));
        }
        Ok(())
    }

    /// One group interaction with a fresh participant set and a record of it.
    ///
    /// Global uses every agent; `Nary(n)` draws `n` distinct agents uniformly.
    pub fn step(&mut self, state: &mut FirmVector, rng: &mut RngStream) -> Result<StepRecord> {
        self.check_len(state)?;
        let n_agents = state.len();
        let n = self.topology.group_size(n_agents);
        let participants: Vec<usize> = if n == n_agents {
            (0..n_agents).collect()
        } else {
            // partial Fisher-Yates on a scratch permutation
            let mut idx: Vec<usize> = (0..n_agents).collect();
            for i in 0..n {
                let j = i + rng.below(n_agents - i);
                idx.swap(i, j);
            }
            idx.truncate(n);
            idx
        };
        let mut eps = vec![0.0; n];
        fill_simplex(rng, &mut eps);
        let pool = apply_exchange(state.sizes_mut(), &self.rule, &participants, &eps)?;
        Ok(StepRecord {
            participants,
            pool,
            epsilon: SimplexSample::from_fractions(eps)?,
        })
    }

    /// One time period: every agent takes part in exactly one group interaction.
    ///
    /// Global runs a single redistribution. Otherwise the population is randomly
    /// permuted and cut into `ceil(N / n)` disjoint groups (the last one may be
    /// smaller). Returns the number of group interactions performed.
    pub fn sweep(&mut self, state: &mut FirmVector, rng: &mut RngStream) -> Result<usize> {
        self.check_len(state)?;
        let n_agents = state.len();
        let n = self.topology.group_size(n_agents);
        let steps = if n == n_agents {
            self.global_exchange(state.sizes_mut(), rng)?;
            1
        } else {
            rng.shuffle(&mut self.order);
            let order = std::mem::take(&mut self.order);
            let mut steps = 0;
            for group in order.chunks(n) {
                self.eps.resize(group.len(), 0.0);
                fill_simplex(rng, &mut self.eps);
                apply_exchange(state.sizes_mut(), &self.rule, group, &self.eps)?;
                steps += 1;
            }
            self.order = order;
            steps
        };
        state.advance();
        Ok(steps)
    }

    fn global_exchange(&mut self, w: &mut [f64], rng: &mut RngStream) -> Result<()> {
        let n = w.len();
        self.released.clear();
        let mut pool = 0.0;
        for (i, &wi) in w.iter().enumerate() {
            if !(wi >= 0.0) {
                return Err(Error::invalid_state(format!("size {wi} of agent {i} is negative or NaN")));
            }
            let r = wi - self.rule.lambda(wi, i) * wi;
            self.released.push(r);
            pool += r;
        }
        if !pool.is_finite() {
            let index = w.iter().position(|x| !x.is_finite()).unwrap_or(0);
            return Err(Error::Overflow { index, value: pool });
        }
        self.eps.resize(n, 0.0);
        fill_simplex(rng, &mut self.eps);
        for ((wi, r), e) in w.iter_mut().zip(&self.released).zip(&self.eps) {
            *wi = (*wi - r) + e * pool;
        }
        Ok(())
    }
}

/// One group interaction; see [`Exchanger::step`].
pub fn exchange_step(
    state: &mut FirmVector,
    rule: &RetentionRule,
    topology: ExchangeTopology,
    rng: &mut RngStream,
) -> Result<StepRecord> {
    Exchanger::new(rule.clone(), topology, state.len())?.step(state, rng)
}

/// One sweep; see [`Exchanger::sweep`].
pub fn sweep(
    state: &mut FirmVector,
    rule: &RetentionRule,
    topology: ExchangeTopology,
    rng: &mut RngStream,
) -> Result<usize> {
    Exchanger::new(rule.clone(), topology, state.len())?.sweep(state, rng)
}
