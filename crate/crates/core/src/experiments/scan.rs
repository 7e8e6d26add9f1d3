use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{stream, Context, PopulationReport, Setup};
use crate::error::{Error, Result};
use crate::exchange::RetentionRule;
use crate::rng::RngStream;
use crate::stats::{DipResult, DistributionSummary, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    ExpSaturating,
    Sigmoid,
}

impl RuleKind {
    pub fn rule(self, c1: f64, c2: f64) -> Result<RetentionRule> {
        match self {
            RuleKind::ExpSaturating => RetentionRule::exp_saturating(c1, c2),
            // conservation keeps the population mean at its initial value 1
            RuleKind::Sigmoid => RetentionRule::sigmoid(c1, c2, 1.0),
        }
    }
}

/// Parameter grid of a phase scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    pub c1_values: Vec<f64>,
    pub c2_values: Vec<f64>,
    pub rule_kind: RuleKind,
    pub setup: Setup,
    pub replicas_per_cell: usize,
}

impl ScanGrid {
    /// c1 = 0.05, 0.10, ..., 0.95 and twenty log-spaced c2 from 0.1 to 100,
    /// three replicas per cell.
    pub fn default_exp() -> Self {
        Self {
            c1_values: (1..=19).map(|i| (5 * i) as f64 / 100.0).collect(),
            c2_values: log_spaced(0.1, 100.0, 20),
            rule_kind: RuleKind::ExpSaturating,
            setup: Setup::default(),
            replicas_per_cell: 3,
        }
    }

    /// c1 = 0.05, ..., 0.45 and c2 from 0.01 to 10⁶ (two points per decade).
    pub fn default_sigmoid() -> Self {
        Self {
            c1_values: (1..=9).map(|i| (5 * i) as f64 / 100.0).collect(),
            c2_values: log_spaced(0.01, 1e6, 17),
            rule_kind: RuleKind::Sigmoid,
            setup: Setup::default(),
            replicas_per_cell: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c1_values.is_empty() || self.c2_values.is_empty() {
            return Err(Error::config("grid", "c1_values and c2_values must be non-empty"));
        }
        for (name, v) in [("grid.c1_values", &self.c1_values), ("grid.c2_values", &self.c2_values)] {
            if v.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::config(name, "values must be strictly ascending"));
            }
        }
        if self.replicas_per_cell == 0 {
            return Err(Error::config("grid.replicas_per_cell", "must be >= 1"));
        }
        for &c1 in &self.c1_values {
            for &c2 in &[self.c2_values[0], self.c2_values[self.c2_values.len() - 1]] {
                self.rule_kind
                    .rule(c1, c2)
                    .map_err(|e| Error::config("grid", format!("(c1={c1}, c2={c2}): {e}")))?;
            }
        }
        self.setup.validate()
    }

    pub fn rows(&self) -> usize {
        self.c1_values.len()
    }

    pub fn cols(&self) -> usize {
        self.c2_values.len()
    }
}

/// `count` points from `lo` to `hi` inclusive, evenly spaced in log scale.
pub(crate) fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| {
            let e = a + (b - a) * i as f64 / (count - 1) as f64;
            // round to 12 significant digits so grids print cleanly
            let v = 10f64.powf(e);
            let scale = 10f64.powi(11 - v.log10().floor() as i32);
            (v * scale).round() / scale
        })
        .collect()
}

/// Outcome of one grid point.
#[derive(Clone, Debug, Serialize)]
pub struct CellResult {
    /// Replica with the median p-value; its verdicts are the majority verdicts.
    pub dip: DipResult,
    pub replicas: Vec<DipResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanCell {
    pub row: usize,
    pub col: usize,
    pub c1: f64,
    pub c2: f64,
    pub result: std::result::Result<CellResult, String>,
    /// Replica-0 summary, kept only for rows that asked for it.
    #[serde(skip)]
    pub summary: Option<DistributionSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseDiagram {
    pub grid: ScanGrid,
    pub seed: u64,
    pub null_reps: usize,
    /// Row-major, one per grid point.
    pub cells: Vec<ScanCell>,
}

impl PhaseDiagram {
    pub fn cell(&self, row: usize, col: usize) -> &ScanCell {
        &self.cells[row * self.grid.cols() + col]
    }

    /// Verdict per cell at level `alpha`; `None` for failed cells.
    pub fn verdict_matrix(&self, alpha: f64) -> Vec<Vec<Option<Verdict>>> {
        (0..self.grid.rows())
            .map(|r| {
                (0..self.grid.cols())
                    .map(|c| self.cell(r, c).result.as_ref().ok().map(|res| res.dip.verdict_at(alpha)))
                    .collect()
            })
            .collect()
    }

    /// Verdict changes along one row at level `alpha`, skipping failed cells.
    pub fn row_crossings(&self, row: usize, alpha: f64) -> usize {
        let v: Vec<Verdict> = self.verdict_matrix(alpha)[row].iter().flatten().copied().collect();
        v.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

fn majority(mut replicas: Vec<DipResult>) -> CellResult {
    let mut order: Vec<usize> = (0..replicas.len()).collect();
    order.sort_by(|&a, &b| replicas[a].p_value.total_cmp(&replicas[b].p_value).then(a.cmp(&b)));
    // the upper median, so an even split counts as not rejected
    let dip = replicas[order[replicas.len() / 2]].clone();
    replicas.shrink_to_fit();
    CellResult { dip, replicas }
}

fn cell_stream(base: &RngStream, row: usize, col: usize, replica: usize) -> RngStream {
    base.split_path(&[row as u64, col as u64, replica as u64])
}

fn run_replica(
    ctx: &Context,
    grid: &ScanGrid,
    base: &RngStream,
    (row, col, replica): (usize, usize, usize),
) -> Result<(DipResult, DistributionSummary)> {
    let rule = grid.rule_kind.rule(grid.c1_values[row], grid.c2_values[col])?;
    let out = grid.setup.simulate(&rule, &cell_stream(base, row, col, replica))?;
    let report = PopulationReport::from_run(ctx, &out)?;
    Ok((report.dip, report.summary))
}

fn scan(ctx: &Context, grid: &ScanGrid, base: &RngStream, keep_row: Option<usize>) -> Result<PhaseDiagram> {
    grid.validate()?;
    // built up front: the table is shared by every cell
    ctx.nulls().table(grid.setup.pooled_len())?;
    let reps = grid.replicas_per_cell;
    let jobs: Vec<(usize, usize, usize)> = (0..grid.rows())
        .flat_map(|r| (0..grid.cols()).flat_map(move |c| (0..reps).map(move |k| (r, c, k))))
        .collect();
    let outcomes: Vec<Result<(DipResult, DistributionSummary)>> =
        jobs.par_iter().map(|&job| run_replica(ctx, grid, base, job)).collect();

    let mut cells = Vec::with_capacity(grid.rows() * grid.cols());
    let mut it = outcomes.into_iter();
    for row in 0..grid.rows() {
        for col in 0..grid.cols() {
            let mut dips = Vec::with_capacity(reps);
            let mut summary = None;
            let mut error = None;
            for k in 0..reps {
                match it.next().expect("one outcome per job") {
                    Ok((dip, s)) => {
                        if k == 0 && keep_row == Some(row) {
                            summary = Some(s);
                        }
                        dips.push(dip);
                    }
                    Err(e) => {
                        log::warn!("scan cell ({row}, {col}) replica {k} failed: {e}");
                        error.get_or_insert(format!("replica {k}: {e}"));
                    }
                }
            }
            cells.push(ScanCell {
                row,
                col,
                c1: grid.c1_values[row],
                c2: grid.c2_values[col],
                result: match error {
                    Some(e) => Err(e),
                    None => Ok(majority(dips)),
                },
                summary,
            });
        }
    }
    Ok(PhaseDiagram {
        grid: grid.clone(),
        seed: ctx.seed(),
        null_reps: ctx.nulls().reps(),
        cells,
    })
}

fn scan_base(ctx: &Context, kind: RuleKind) -> RngStream {
    ctx.stream(match kind {
        RuleKind::ExpSaturating => stream::SCAN,
        RuleKind::Sigmoid => stream::SIGMOID_SCAN,
    })
}

/// Dip verdicts over a (c1, c2) grid, majority over replicas.
pub fn run_phase_scan(ctx: &Context, grid: &ScanGrid) -> Result<PhaseDiagram> {
    scan(ctx, grid, &scan_base(ctx, grid.rule_kind), None)
}

/// Re-runs a single grid point exactly as the full scan would.
pub fn run_scan_cell(ctx: &Context, grid: &ScanGrid, row: usize, col: usize) -> Result<CellResult> {
    grid.validate()?;
    if row >= grid.rows() || col >= grid.cols() {
        return Err(Error::invalid_arg(format!("cell ({row}, {col}) outside the grid")));
    }
    let base = scan_base(ctx, grid.rule_kind);
    let dips = (0..grid.replicas_per_cell)
        .map(|k| run_replica(ctx, grid, &base, (row, col, k)).map(|(d, _)| d))
        .collect::<Result<Vec<_>>>()?;
    Ok(majority(dips))
}

/// Sigmoid-rule phase scan plus pooled summaries along one c1 row.
#[derive(Clone, Debug, Serialize)]
pub struct SigmoidScan {
    pub diagram: PhaseDiagram,
    pub row: usize,
    pub row_c1: f64,
    /// `(c2, summary)` along the designated row.
    pub row_summaries: Vec<(f64, DistributionSummary)>,
    /// Verdict changes along the designated row at 5%.
    pub crossings_at_5: usize,
}

pub fn run_sigmoid_scan(ctx: &Context, grid: &ScanGrid, row_c1: f64) -> Result<SigmoidScan> {
    if grid.rule_kind != RuleKind::Sigmoid {
        return Err(Error::config("grid.rule_kind", "sigmoid scan needs rule_kind = sigmoid"));
    }
    let row = grid
        .c1_values
        .iter()
        .position(|&c| (c - row_c1).abs() < 1e-12)
        .ok_or_else(|| Error::config("sigmoid_scan.row_c1", format!("{row_c1} is not one of grid.c1_values")))?;
    let diagram = scan(ctx, grid, &scan_base(ctx, RuleKind::Sigmoid), Some(row))?;
    let row_summaries = (0..grid.cols())
        .filter_map(|c| diagram.cell(row, c).summary.clone().map(|s| (grid.c2_values[c], s)))
        .collect();
    let crossings_at_5 = diagram.row_crossings(row, 0.05);
    Ok(SigmoidScan {
        diagram,
        row,
        row_c1,
        row_summaries,
        crossings_at_5,
    })
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self::default_exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{ExchangeTopology, Protocol};

    fn tiny(kind: RuleKind, c1: Vec<f64>, c2: Vec<f64>) -> ScanGrid {
        ScanGrid {
            c1_values: c1,
            c2_values: c2,
            rule_kind: kind,
            setup: Setup {
                n_agents: 50,
                topology: ExchangeTopology::Global,
                initial: Default::default(),
                protocol: Protocol {
                    relax_sweeps: 20,
                    sample_count: 4,
                    sample_gap: 2,
                },
            },
            replicas_per_cell: 3,
        }
    }

    #[test]
    fn default_grids() {
        let g = ScanGrid::default_exp();
        assert_eq!((g.rows(), g.cols()), (19, 20));
        assert!((g.c1_values[18] - 0.95).abs() < 1e-12);
        assert_eq!(g.c2_values[0], 0.1);
        assert_eq!(g.c2_values[19], 100.0);
        g.validate().unwrap();
        let s = ScanGrid::default_sigmoid();
        s.validate().unwrap();
        assert_eq!(s.c2_values[0], 0.01);
        assert_eq!(*s.c2_values.last().unwrap(), 1e6);
    }

    #[test]
    fn invalid_grids() {
        let mut g = tiny(RuleKind::Sigmoid, vec![0.3, 0.6], vec![1.0]);
        assert!(g.validate().is_err());
        g.c1_values = vec![0.3, 0.2];
        assert!(g.validate().is_err());
        g.c1_values = vec![];
        assert!(g.validate().is_err());
        let mut g = tiny(RuleKind::ExpSaturating, vec![0.5], vec![1.0]);
        g.replicas_per_cell = 0;
        assert!(g.validate().is_err());
    }

    #[test]
    fn majority_is_median_p() {
        let r = |p| DipResult::new(0.01, 100, p, 100);
        let m = majority(vec![r(0.5), r(0.001), r(0.02)]);
        assert_eq!(m.dip.p_value, 0.02);
        assert!(m.dip.is_bimodal_at(0.05));
        assert!(!m.dip.is_bimodal_at(0.01));
        let even = majority(vec![r(0.001), r(0.5)]);
        assert_eq!(even.dip.p_value, 0.5);
    }

    #[test]
    fn cells_reproduce_in_isolation() {
        let ctx = Context::new(3, 100);
        let grid = tiny(RuleKind::ExpSaturating, vec![0.0, 0.9], vec![0.5, 5.0]);
        let d = run_phase_scan(&ctx, &grid).unwrap();
        assert_eq!(d.cells.len(), 4);
        let again = run_scan_cell(&Context::new(3, 100), &grid, 1, 0).unwrap();
        let orig = d.cell(1, 0).result.as_ref().unwrap();
        assert_eq!(orig.replicas, again.replicas);
        let d2 = run_phase_scan(&Context::new(3, 100), &grid).unwrap();
        assert_eq!(d.verdict_matrix(0.05), d2.verdict_matrix(0.05));
    }
}
