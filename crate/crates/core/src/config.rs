//! Run configuration: a TOML file with every default spelled out on output.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exchange::{ExchangeTopology, InitialCondition, Protocol, RetentionRule};
use crate::experiments::{ConvergenceCriterion, RuleKind, ScanGrid, Setup};
use crate::stats::{DEFAULT_BINS, DEFAULT_NULL_REPS};

/// Retention rule as written in a config file. The sigmoid anchor is the
/// population mean, which conservation fixes at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RuleConfig {
    Constant { lambda: f64 },
    ExpSaturating { c1: f64, c2: f64 },
    Sigmoid { c1: f64, c2: f64 },
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig::ExpSaturating { c1: 0.95, c2: 3.0 }
    }
}

impl RuleConfig {
    pub fn build(&self) -> Result<RetentionRule> {
        match *self {
            RuleConfig::Constant { lambda } => RetentionRule::constant(lambda),
            RuleConfig::ExpSaturating { c1, c2 } => RetentionRule::exp_saturating(c1, c2),
            RuleConfig::Sigmoid { c1, c2 } => RetentionRule::sigmoid(c1, c2, 1.0),
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        if let RuleConfig::Sigmoid { c1, .. } = *self {
            if !(0.0..0.5).contains(&c1) {
                return Err(Error::config(
                    format!("{field}.c1"),
                    format!("sigmoid rule requires 0 <= c1 < 1/2, got {c1}"),
                ));
            }
        }
        self.build().map(drop).map_err(|e| Error::config(field, strip(e)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub n_agents: usize,
    pub topology: ExchangeTopology,
    pub initial: InitialCondition,
    pub rule: RuleConfig,
    pub protocol: Protocol,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let s = Setup::default();
        Self {
            n_agents: s.n_agents,
            topology: s.topology,
            initial: s.initial,
            rule: RuleConfig::default(),
            protocol: s.protocol,
        }
    }
}

impl ModelConfig {
    pub fn setup(&self) -> Setup {
        Setup {
            n_agents: self.n_agents,
            topology: self.topology,
            initial: self.initial,
            protocol: self.protocol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub c1_values: Vec<f64>,
    pub c2_values: Vec<f64>,
    pub replicas_per_cell: usize,
}

impl GridConfig {
    pub fn grid(&self, setup: Setup) -> ScanGrid {
        ScanGrid {
            c1_values: self.c1_values.clone(),
            c2_values: self.c2_values.clone(),
            rule_kind: RuleKind::ExpSaturating,
            setup,
            replicas_per_cell: self.replicas_per_cell,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = ScanGrid::default_exp();
        Self {
            c1_values: g.c1_values,
            c2_values: g.c2_values,
            replicas_per_cell: g.replicas_per_cell,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SigmoidScanConfig {
    pub c1_values: Vec<f64>,
    pub c2_values: Vec<f64>,
    pub replicas_per_cell: usize,
    /// c1 row whose pooled distributions are written out.
    pub row_c1: f64,
}

impl Default for SigmoidScanConfig {
    fn default() -> Self {
        let g = ScanGrid::default_sigmoid();
        Self {
            c1_values: g.c1_values,
            c2_values: g.c2_values,
            replicas_per_cell: g.replicas_per_cell,
            row_c1: 0.3,
        }
    }
}

impl SigmoidScanConfig {
    pub fn grid(&self, setup: Setup) -> ScanGrid {
        ScanGrid {
            c1_values: self.c1_values.clone(),
            c2_values: self.c2_values.clone(),
            rule_kind: RuleKind::Sigmoid,
            setup,
            replicas_per_cell: self.replicas_per_cell,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmergenceConfig {
    pub c1: f64,
    pub c2_values: Vec<f64>,
}

impl Default for EmergenceConfig {
    fn default() -> Self {
        Self {
            c1: 0.95,
            c2_values: vec![0.5, 1.0, 3.0, 10.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub sweeps: u64,
    pub tracked: usize,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            sweeps: 10_000,
            tracked: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionConfig {
    pub c2_values: Vec<f64>,
    /// Replaces `model.topology` for this experiment.
    pub topology: ExchangeTopology,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        Self {
            c2_values: vec![0.0, 1.0, 10.0, 20.0, 30.0, 40.0, 50.0],
            topology: ExchangeTopology::Binary,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinaryCompareConfig {
    pub c1: f64,
    pub c2_values: Vec<f64>,
    pub convergence: ConvergenceCriterion,
}

impl Default for BinaryCompareConfig {
    fn default() -> Self {
        Self {
            c1: 0.95,
            c2_values: vec![1.0, 3.0, 10.0],
            convergence: ConvergenceCriterion::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZipfLaplaceConfig {
    pub growth_pairs: usize,
}

impl Default for ZipfLaplaceConfig {
    fn default() -> Self {
        Self { growth_pairs: 500 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub bins: usize,
    /// Points of the pooled ECDF written per distribution.
    pub ecdf_points: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            ecdf_points: 1001,
        }
    }
}

/// Fully resolved configuration. Every field affects output and is covered
/// by [`Config::hash`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub null_reps: usize,
    pub model: ModelConfig,
    pub emergence: EmergenceConfig,
    pub trajectory: TrajectoryConfig,
    pub scan: GridConfig,
    pub sigmoid_scan: SigmoidScanConfig,
    pub transition: TransitionConfig,
    pub binary_compare: BinaryCompareConfig,
    pub zipf_laplace: ZipfLaplaceConfig,
    pub output: OutputConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            null_reps: DEFAULT_NULL_REPS,
            model: ModelConfig::default(),
            emergence: EmergenceConfig::default(),
            trajectory: TrajectoryConfig::default(),
            scan: GridConfig::default(),
            sigmoid_scan: SigmoidScanConfig::default(),
            transition: TransitionConfig::default(),
            binary_compare: BinaryCompareConfig::default(),
            zipf_laplace: ZipfLaplaceConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Drops the variant prefix of a core error so it reads well after a field name.
fn strip(e: Error) -> String {
    match e {
        Error::InvalidArgument(m) | Error::InvalidState(m) => m,
        Error::Config { field, message } => format!("{field}: {message}"),
        other => other.to_string(),
    }
}

fn nested(prefix: &str, e: Error) -> Error {
    match e {
        Error::Config { field, message } if field == "grid" => Error::config(prefix, message),
        Error::Config { field, message } => {
            let field = field.strip_prefix("grid.").unwrap_or(&field);
            Error::config(format!("{prefix}.{field}"), message)
        }
        other => Error::config(prefix, strip(other)),
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e.message().split('`').nth(1).unwrap_or("<config>").to_owned();
            Error::config(field, e.to_string().trim_end())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config { message, .. } => Error::Format {
                path: path.to_owned(),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.null_reps == 0 {
            return Err(Error::config("null_reps", "must be >= 1"));
        }
        let m = &self.model;
        m.rule.validate("model.rule")?;
        m.setup().validate().map_err(|e| nested("model", e))?;

        RuleKind::ExpSaturating
            .rule(self.emergence.c1, 0.0)
            .map_err(|e| Error::config("emergence.c1", strip(e)))?;
        for (i, &c2) in self.emergence.c2_values.iter().enumerate() {
            RuleKind::ExpSaturating
                .rule(self.emergence.c1, c2)
                .map_err(|e| Error::config(format!("emergence.c2_values[{i}]"), strip(e)))?;
        }

        if self.trajectory.tracked >= m.n_agents {
            return Err(Error::config(
                "trajectory.tracked",
                format!("agent {} out of range for n_agents = {}", self.trajectory.tracked, m.n_agents),
            ));
        }

        self.scan
            .grid(m.setup())
            .validate()
            .map_err(|e| nested("scan", e))?;
        let sg = &self.sigmoid_scan;
        if let Some(&c1) = sg.c1_values.iter().find(|&&c| !(0.0..0.5).contains(&c)) {
            return Err(Error::config(
                "sigmoid_scan.c1_values",
                format!("sigmoid rule requires 0 <= c1 < 1/2, got {c1}"),
            ));
        }
        sg.grid(m.setup())
            .validate()
            .map_err(|e| nested("sigmoid_scan", e))?;
        if !sg.c1_values.iter().any(|&c| (c - sg.row_c1).abs() < 1e-12) {
            return Err(Error::config("sigmoid_scan.row_c1", "must be one of sigmoid_scan.c1_values"));
        }

        m.setup()
            .with_topology(self.transition.topology)
            .validate()
            .map_err(|e| nested("transition", e))?;
        for (i, &c2) in self.transition.c2_values.iter().enumerate() {
            RetentionRule::quenched(vec![0.5], c2)
                .map_err(|e| Error::config(format!("transition.c2_values[{i}]"), strip(e)))?;
        }

        let b = &self.binary_compare;
        for (i, &c2) in b.c2_values.iter().enumerate() {
            RetentionRule::exp_saturating(b.c1, c2)
                .map_err(|e| Error::config(format!("binary_compare.c2_values[{i}]"), strip(e)))?;
        }
        b.convergence.validate().map_err(|e| nested("binary_compare", e))?;

        if self.zipf_laplace.growth_pairs == 0 {
            return Err(Error::config("zipf_laplace.growth_pairs", "must be >= 1"));
        }
        if self.output.bins == 0 {
            return Err(Error::config("output.bins", "must be >= 1"));
        }
        if self.output.ecdf_points < 2 {
            return Err(Error::config("output.ecdf_points", "must be >= 2"));
        }
        Ok(())
    }
}
