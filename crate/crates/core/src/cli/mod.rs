//! Command-line front end. Values resolve as defaults < config file < flags.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{Config, RuleConfig};
use crate::error::{Error, Result};
use crate::exchange::ExchangeTopology;
use crate::experiments::Context;
use crate::output::{emit, ResultBundle, RunManifest};
use crate::stats::Ecdf;

pub use report::{build, checks_table, Report};

/// Environment variable naming the output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "KINEX_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "kinex-out";

pub mod exit {
    pub const OK: u8 = 0;
    pub const VALIDATION: u8 = 1;
    pub const RUNTIME: u8 = 2;
    /// A reported check failed and `--check` was given.
    pub const CHECK_FAILED: u8 = 3;
}

#[derive(Parser, Debug)]
#[command(name = "kinex", version, about = "Kinetic exchange simulations with size-dependent retention")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// TOML config file; flags override its values.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $KINEX_OUT_DIR, else ./kinex-out].
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Uniform null samples per sample size for dip p-values.
    #[arg(long, global = true)]
    pub null_reps: Option<usize>,
    #[arg(long, global = true)]
    pub n_agents: Option<usize>,
    /// global, binary or nary:<n>. For `transition` this sets the transition topology.
    #[arg(long, global = true)]
    pub topology: Option<ExchangeTopology>,
    #[arg(long, global = true)]
    pub relax: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub gap: Option<u64>,
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Exit with status 3 when any reported check fails.
    #[arg(long, global = true)]
    pub check: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleName {
    Constant,
    ExpSaturating,
    Sigmoid,
}

#[derive(Args, Debug, Default)]
pub struct RuleArgs {
    #[arg(long)]
    pub rule: Option<RuleName>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One run of the model rule: pooled distribution, λ inset, dip test.
    Simulate(RuleArgs),
    /// Pooled distributions for one c1 across several c2.
    Emergence {
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        c2: Option<Vec<f64>>,
    },
    /// One agent's size and retention rate over time.
    Trajectory {
        #[arg(long)]
        sweeps: Option<u64>,
        #[arg(long)]
        tracked: Option<usize>,
        #[command(flatten)]
        rule: RuleArgs,
    },
    /// Dip verdicts over the exp-saturating (c1, c2) grid.
    Scan {
        #[arg(long)]
        replicas: Option<usize>,
    },
    /// Dip verdicts over the sigmoid (c1, c2) grid plus one row's distributions.
    SigmoidScan {
        #[arg(long)]
        row_c1: Option<f64>,
        #[arg(long)]
        replicas: Option<usize>,
    },
    /// Quenched-c1 sweep over c2: dip, tail exponent and mean-field diagnostic.
    Transition {
        #[arg(long, value_delimiter = ',')]
        c2: Option<Vec<f64>>,
    },
    /// Global against binary exchange at the same rule.
    BinaryCompare {
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        c2: Option<Vec<f64>>,
    },
    /// λ = 0 limit: exponential sizes, Zipf tail of exp(w), Laplace growth rates.
    ZipfLaplace {
        #[arg(long)]
        growth_pairs: Option<usize>,
    },
    /// Dip test of a single-column file of values; prints JSON.
    Dip { file: PathBuf },
    /// Re-runs the experiment recorded in a manifest.
    Replay { manifest: PathBuf },
    /// Prints the fully resolved configuration.
    ShowConfig,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Emergence { .. } => "emergence",
            Command::Trajectory { .. } => "trajectory",
            Command::Scan { .. } => "scan",
            Command::SigmoidScan { .. } => "sigmoid-scan",
            Command::Transition { .. } => "transition",
            Command::BinaryCompare { .. } => "binary-compare",
            Command::ZipfLaplace { .. } => "zipf-laplace",
            Command::Dip { .. } => "dip",
            Command::Replay { .. } => "replay",
            Command::ShowConfig => "show-config",
        }
    }
}

impl RuleArgs {
    fn apply(&self, rule: &mut RuleConfig) -> Result<()> {
        let (c1, c2, lambda) = match *rule {
            RuleConfig::Constant { lambda } => (None, None, Some(lambda)),
            RuleConfig::ExpSaturating { c1, c2 } | RuleConfig::Sigmoid { c1, c2 } => (Some(c1), Some(c2), None),
        };
        let kind = self.rule.unwrap_or(match rule {
            RuleConfig::Constant { .. } => RuleName::Constant,
            RuleConfig::ExpSaturating { .. } => RuleName::ExpSaturating,
            RuleConfig::Sigmoid { .. } => RuleName::Sigmoid,
        });
        let need = |flag: &str, v: Option<f64>| v.ok_or_else(|| Error::config(flag, "required by the selected rule"));
        let unused = |flag: &str, v: Option<f64>| match v {
            Some(_) => Err(Error::config(flag, "not a parameter of the selected rule")),
            None => Ok(()),
        };
        *rule = match kind {
            RuleName::Constant => {
                unused("--c1", self.c1)?;
                unused("--c2", self.c2)?;
                RuleConfig::Constant {
                    lambda: need("--lambda", self.lambda.or(lambda))?,
                }
            }
            RuleName::ExpSaturating | RuleName::Sigmoid => {
                unused("--lambda", self.lambda)?;
                let c1 = need("--c1", self.c1.or(c1))?;
                let c2 = need("--c2", self.c2.or(c2))?;
                if kind == RuleName::Sigmoid {
                    RuleConfig::Sigmoid { c1, c2 }
                } else {
                    RuleConfig::ExpSaturating { c1, c2 }
                }
            }
        };
        Ok(())
    }
}

fn set<T>(dst: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *dst = v;
    }
}

/// Defaults, then the config file, then flags; validated.
pub fn resolve_config(common: &Common, command: &Command) -> Result<Config> {
    let mut c = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    set(&mut c.seed, common.seed);
    set(&mut c.null_reps, common.null_reps);
    set(&mut c.model.n_agents, common.n_agents);
    set(&mut c.model.protocol.relax_sweeps, common.relax);
    set(&mut c.model.protocol.sample_count, common.samples);
    set(&mut c.model.protocol.sample_gap, common.gap);
    set(&mut c.output.bins, common.bins);
    if matches!(command, Command::Transition { .. }) {
        set(&mut c.transition.topology, common.topology);
    } else {
        set(&mut c.model.topology, common.topology);
    }
    match command {
        Command::Simulate(rule) => rule.apply(&mut c.model.rule)?,
        Command::Emergence { c1, c2 } => {
            set(&mut c.emergence.c1, *c1);
            set(&mut c.emergence.c2_values, c2.clone());
        }
        Command::Trajectory { sweeps, tracked, rule } => {
            set(&mut c.trajectory.sweeps, *sweeps);
            set(&mut c.trajectory.tracked, *tracked);
            rule.apply(&mut c.model.rule)?;
        }
        Command::Scan { replicas } => set(&mut c.scan.replicas_per_cell, *replicas),
        Command::SigmoidScan { row_c1, replicas } => {
            set(&mut c.sigmoid_scan.row_c1, *row_c1);
            set(&mut c.sigmoid_scan.replicas_per_cell, *replicas);
        }
        Command::Transition { c2 } => set(&mut c.transition.c2_values, c2.clone()),
        Command::BinaryCompare { c1, c2 } => {
            set(&mut c.binary_compare.c1, *c1);
            set(&mut c.binary_compare.c2_values, c2.clone());
        }
        Command::ZipfLaplace { growth_pairs } => set(&mut c.zipf_laplace.growth_pairs, *growth_pairs),
        Command::Dip { .. } | Command::Replay { .. } | Command::ShowConfig => {}
    }
    c.validate()?;
    Ok(c)
}

pub fn out_dir(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Reads one value per line. Blank lines and `#` comments are skipped, and
/// a non-numeric first line is taken as a header.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Err(_) if values.is_empty() && i == 0 => {}
            _ => {
                return Err(Error::Format {
                    path: path.to_owned(),
                    message: format!("line {}: `{line}` is not a finite number", i + 1),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Format {
            path: path.to_owned(),
            message: "no values".into(),
        });
    }
    Ok(values)
}

/// Runs an experiment command and writes its bundle. Returns the exit status.
pub fn run_experiment(command: &str, config: Config, out: &Path, check: bool) -> Result<u8> {
    let report = build(command, &config)?;
    let mut bundle = ResultBundle::new(RunManifest::new(command, config));
    bundle.tables = report.tables;
    let mut summary = report.summary;
    if !report.checks.is_empty() {
        bundle.tables.push(checks_table(&report.checks));
        summary["checks"] = serde_json::to_value(&report.checks).expect("checks serialize");
    }
    bundle.summary = Some(summary);
    emit(&bundle, out)?;

    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{command}: wrote {}", out.display());
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(stdout, "  {status} {} = {} (expected [{}, {}])", c.name, c.value, c.lo, c.hi);
    }
    let failed = report.checks.iter().any(|c| !c.passed);
    Ok(if check && failed { exit::CHECK_FAILED } else { exit::OK })
}

pub fn execute(cli: &Cli) -> Result<u8> {
    let common = &cli.common;
    match &cli.command {
        Command::Replay { manifest } => {
            let m = RunManifest::load(manifest)?;
            m.config.validate()?;
            run_experiment(&m.command, m.config, &out_dir(common), common.check)
        }
        Command::Dip { file } => {
            let config = resolve_config(common, &cli.command)?;
            let ecdf = Ecdf::new(read_values(file)?)?;
            let ctx = Context::new(config.seed, config.null_reps);
            let result = ctx.dip(&ecdf)?;
            println!("{}", serde_json::to_string_pretty(&result).expect("dip result serializes"));
            Ok(exit::OK)
        }
        Command::ShowConfig => {
            print!("{}", resolve_config(common, &cli.command)?.to_toml());
            Ok(exit::OK)
        }
        cmd => {
            let config = resolve_config(common, cmd)?;
            run_experiment(cmd.name(), config, &out_dir(common), common.check)
        }
    }
}

/// Entry point of the `kinex` binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::VALIDATION } else { exit::OK });
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { exit::VALIDATION } else { exit::RUNTIME })
        }
    }
}
