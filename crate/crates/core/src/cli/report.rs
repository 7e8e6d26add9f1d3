//! Turns experiment results into tables, a JSON summary and pass/fail checks.

use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::experiments::{
    run_binary_replication, run_bimodality_emergence, run_phase_scan, run_sigmoid_scan, run_simulation,
    run_tracked_trajectory, run_transition, run_zipf_laplace, Check, Context, PhaseDiagram, PopulationReport,
    TransitionRow,
};
use crate::output::{Cell, Table};
use crate::stats::{BinScale, DipResult, Ecdf, Histogram, SIGNIFICANCE_LEVELS};

pub struct Report {
    pub tables: Vec<Table>,
    pub summary: Value,
    pub checks: Vec<Check>,
}

const HIST_COLS: [&str; 4] = ["bin_lo[size]", "bin_hi[size]", "mass[1]", "density[1/size]"];
const LAMBDA_HIST_COLS: [&str; 4] = ["bin_lo[1]", "bin_hi[1]", "mass[1]", "density[1]"];
const CCDF_POINTS: usize = 100;

fn cols<'a>(key: &[&'a str], rest: &[&'a str]) -> Vec<&'a str> {
    key.iter().chain(rest).copied().collect()
}

fn hist_rows(t: &mut Table, key: &[Cell], h: &Histogram) {
    let density = h.density();
    for (i, (&mass, &d)) in h.mass.iter().zip(&density).enumerate() {
        let mut row = key.to_vec();
        row.extend([h.edges[i].into(), h.edges[i + 1].into(), mass.into(), d.into()]);
        t.push(row);
    }
}

fn ecdf_rows(t: &mut Table, key: &[Cell], e: &Ecdf, points: usize) {
    for i in 0..points {
        let p = i as f64 / (points - 1) as f64;
        let mut row = key.to_vec();
        row.extend([p.into(), e.quantile(p).into()]);
        t.push(row);
    }
}

/// CCDF at log-spaced points from the 0.1% quantile (or smallest positive
/// value) to the maximum.
fn ccdf_rows(t: &mut Table, key: &[Cell], e: &Ecdf) {
    let lo = e.quantile(0.001).max(e.values().iter().copied().find(|&v| v > 0.0).unwrap_or(f64::MIN_POSITIVE));
    let hi = e.max();
    if !(hi > lo) {
        return;
    }
    let (a, b) = (lo.ln(), hi.ln());
    for i in 0..CCDF_POINTS {
        let x = (a + (b - a) * i as f64 / (CCDF_POINTS - 1) as f64).exp().min(hi);
        let mut row = key.to_vec();
        row.extend([x.into(), e.ccdf(x).into()]);
        t.push(row);
    }
}

fn dip_json(d: &DipResult) -> Value {
    let verdicts: serde_json::Map<String, Value> = SIGNIFICANCE_LEVELS
        .iter()
        .zip(d.verdicts)
        .map(|(a, v)| (format!("{a}"), json!(v.as_str())))
        .collect();
    json!({"dip": d.dip, "p_value": d.p_value, "n": d.n, "null_reps": d.null_reps, "verdicts": verdicts})
}

fn population_json(p: &PopulationReport) -> Value {
    json!({
        "dip": dip_json(&p.dip),
        "ks_exponential": p.ks_exponential,
        "moments": p.summary.moments,
        "renormalizations": p.renormalizations,
    })
}

fn verdict_cells(d: &DipResult) -> Vec<Cell> {
    d.verdicts.iter().map(|v| v.as_str().into()).collect()
}

pub fn build(command: &str, cfg: &Config) -> Result<Report> {
    let ctx = Context::new(cfg.seed, cfg.null_reps).with_bins(cfg.output.bins);
    match command {
        "simulate" => simulate(&ctx, cfg),
        "emergence" => emergence(&ctx, cfg),
        "trajectory" => trajectory(&ctx, cfg),
        "scan" => scan(&ctx, cfg),
        "sigmoid-scan" => sigmoid_scan(&ctx, cfg),
        "transition" => transition(&ctx, cfg),
        "binary-compare" => binary_compare(&ctx, cfg),
        "zipf-laplace" => zipf_laplace(&ctx, cfg),
        other => Err(Error::invalid_arg(format!("`{other}` does not produce a result bundle"))),
    }
}

fn simulate(ctx: &Context, cfg: &Config) -> Result<Report> {
    let rule = cfg.model.rule.build()?;
    let pop = run_simulation(ctx, &rule, &cfg.model.setup())?;
    let mut hist = Table::new("histogram", &HIST_COLS);
    hist_rows(&mut hist, &[], &pop.summary.histogram);
    let mut lambda = Table::new("lambda_histogram", &LAMBDA_HIST_COLS);
    if let Some(h) = &pop.summary.lambda_histogram {
        hist_rows(&mut lambda, &[], h);
    }
    let mut ecdf = Table::new("ecdf", &["p[1]", "w[size]"]);
    ecdf_rows(&mut ecdf, &[], &pop.summary.pooled, cfg.output.ecdf_points);
    Ok(Report {
        tables: vec![hist, lambda, ecdf],
        summary: json!({"rule": rule.kind_name(), "population": population_json(&pop)}),
        checks: Vec::new(),
    })
}

fn emergence(ctx: &Context, cfg: &Config) -> Result<Report> {
    let e = &cfg.emergence;
    let rows = run_bimodality_emergence(ctx, e.c1, &e.c2_values, &cfg.model.setup())?;
    let mut table = Table::new(
        "emergence",
        &["c2[1/size]", "dip[1]", "p_value[1]", "verdict_0.01", "verdict_0.05", "verdict_0.10", "ks_exponential[1]", "mean[size]", "variance[size^2]"],
    );
    let mut hist = Table::new("histograms", &cols(&["c2[1/size]"], &HIST_COLS));
    let mut lambda = Table::new("lambda_histograms", &cols(&["c2[1/size]"], &LAMBDA_HIST_COLS));
    let mut summary = Vec::new();
    for r in &rows {
        let p = &r.population;
        let mut row = vec![r.c2.into(), p.dip.dip.into(), p.dip.p_value.into()];
        row.extend(verdict_cells(&p.dip));
        row.extend([p.ks_exponential.into(), p.summary.moments.mean.into(), p.summary.moments.variance.into()]);
        table.push(row);
        hist_rows(&mut hist, &[r.c2.into()], &p.summary.histogram);
        if let Some(h) = &p.summary.lambda_histogram {
            hist_rows(&mut lambda, &[r.c2.into()], h);
        }
        summary.push(json!({"c2": r.c2, "population": population_json(p)}));
    }
    let bimodal = rows.iter().filter(|r| r.population.dip.is_bimodal_at(0.05)).count();
    let checks = vec![Check::flag("verdict_changes_across_c2_at_0.05", bimodal > 0 && bimodal < rows.len())];
    Ok(Report {
        tables: vec![table, hist, lambda],
        summary: json!({"c1": e.c1, "rows": summary}),
        checks,
    })
}

fn trajectory(ctx: &Context, cfg: &Config) -> Result<Report> {
    let rule = cfg.model.rule.build()?;
    let t = &cfg.trajectory;
    let rep = run_tracked_trajectory(ctx, &rule, cfg.model.topology, cfg.model.n_agents, t.sweeps, t.tracked)?;
    let mut table = Table::new("trajectory", &["t[sweeps]", "agent", "w[size]", "lambda[1]"]);
    for r in &rep.records {
        table.push(vec![r.t.into(), r.agent.into(), r.w.into(), r.lambda.into()]);
    }
    let mut hist = Table::new("final_histogram", &HIST_COLS);
    hist_rows(&mut hist, &[], &rep.final_summary.histogram);
    let mut lambda = Table::new("final_lambda_histogram", &LAMBDA_HIST_COLS);
    if let Some(h) = &rep.final_summary.lambda_histogram {
        hist_rows(&mut lambda, &[], h);
    }
    let ws = rep.records.iter().map(|r| r.w);
    let (lo, hi) = ws.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), w| (a.min(w), b.max(w)));
    Ok(Report {
        tables: vec![table, hist, lambda],
        summary: json!({
            "rule": rule.kind_name(),
            "tracked": rep.tracked,
            "sweeps": t.sweeps,
            "time_average_w": rep.time_average_w,
            "min_w": lo,
            "max_w": hi,
            "final_moments": rep.final_summary.moments,
        }),
        checks: Vec::new(),
    })
}

fn dip_table(d: &PhaseDiagram) -> Table {
    let mut t = Table::new(
        "dip_table",
        &[
            "row", "col", "c1[1]", "c2[1/size]", "dip[1]", "p_value[1]", "verdict_0.01", "verdict_0.05", "verdict_0.10",
            "replicas_bimodal_0.05", "error",
        ],
    );
    for c in &d.cells {
        let mut row = vec![c.row.into(), c.col.into(), c.c1.into(), c.c2.into()];
        match &c.result {
            Ok(r) => {
                row.extend([r.dip.dip.into(), r.dip.p_value.into()]);
                row.extend(verdict_cells(&r.dip));
                row.push(r.replicas.iter().filter(|d| d.is_bimodal_at(0.05)).count().into());
                row.push(Cell::Empty);
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(Cell::Empty, 6));
                row.push(e.as_str().into());
            }
        }
        t.push(row);
    }
    t
}

fn diagram_json(d: &PhaseDiagram) -> Value {
    let counts: serde_json::Map<String, Value> = SIGNIFICANCE_LEVELS
        .iter()
        .map(|&a| {
            let n = d.cells.iter().filter(|c| c.result.as_ref().is_ok_and(|r| r.dip.is_bimodal_at(a))).count();
            (format!("{a}"), json!(n))
        })
        .collect();
    json!({
        "rows": d.grid.rows(),
        "cols": d.grid.cols(),
        "cells": d.cells.len(),
        "failed_cells": d.cells.iter().filter(|c| c.result.is_err()).count(),
        "bimodal_cells": counts,
    })
}

fn scan(ctx: &Context, cfg: &Config) -> Result<Report> {
    let d = run_phase_scan(ctx, &cfg.scan.grid(cfg.model.setup()))?;
    Ok(Report {
        tables: vec![dip_table(&d)],
        summary: diagram_json(&d),
        checks: Vec::new(),
    })
}

fn sigmoid_scan(ctx: &Context, cfg: &Config) -> Result<Report> {
    let s = &cfg.sigmoid_scan;
    let rep = run_sigmoid_scan(ctx, &s.grid(cfg.model.setup()), s.row_c1)?;
    let mut hist = Table::new("row_histograms", &cols(&["c2[1/size]"], &HIST_COLS));
    let mut lambda = Table::new("row_lambda_histograms", &cols(&["c2[1/size]"], &LAMBDA_HIST_COLS));
    for (c2, summary) in &rep.row_summaries {
        hist_rows(&mut hist, &[(*c2).into()], &summary.histogram);
        if let Some(h) = &summary.lambda_histogram {
            hist_rows(&mut lambda, &[(*c2).into()], h);
        }
    }
    let verdicts: Vec<_> = rep.diagram.verdict_matrix(0.05)[rep.row].clone();
    let mut checks = Vec::new();
    if let (Some(Some(first)), Some(Some(last))) = (verdicts.first(), verdicts.last()) {
        checks.push(Check::flag("row_smallest_c2_bimodal_at_0.05", first.is_bimodal()));
        checks.push(Check::flag("row_largest_c2_unimodal_at_0.05", !last.is_bimodal()));
    }
    checks.push(Check::within("row_verdict_crossings_at_0.05", rep.crossings_at_5 as f64, 1.0, 1.0));
    let mut summary = diagram_json(&rep.diagram);
    summary["row_c1"] = json!(rep.row_c1);
    summary["row_verdicts_0.05"] = json!(verdicts.iter().map(|v| v.map(|v| v.as_str())).collect::<Vec<_>>());
    summary["row_crossings_0.05"] = json!(rep.crossings_at_5);
    Ok(Report {
        tables: vec![dip_table(&rep.diagram), hist, lambda],
        summary,
        checks,
    })
}

fn find_row(rows: &[TransitionRow], c2: f64) -> Option<&TransitionRow> {
    rows.iter().find(|r| r.c2 == c2)
}

fn transition(ctx: &Context, cfg: &Config) -> Result<Report> {
    let setup = cfg.model.setup().with_topology(cfg.transition.topology);
    let sweep = run_transition(ctx, &cfg.transition.c2_values, &setup)?;
    let mut table = Table::new(
        "transition",
        &[
            "c2[1/size]", "dip[1]", "p_value[1]", "verdict_0.05", "ks_exponential[1]", "xmin[size]", "tail_exponent[1]",
            "tail_stderr[1]", "hill_exponent[1]", "hill_stderr[1]", "n_tail", "tail_error",
        ],
    );
    let mut ccdf = Table::new("ccdf", &["c2[1/size]", "w[size]", "ccdf[1]"]);
    let mut hist = Table::new("histograms", &cols(&["c2[1/size]"], &HIST_COLS));
    let mut meanfield = Table::new(
        "meanfield",
        &[
            "c2[1/size]", "lambda_lo[1]", "lambda_hi[1]", "agents", "mean_lambda[1]", "mean_w[size]", "lambda_w[size]",
            "release_w[size]",
        ],
    );
    let mut quenched = Table::new("quenched_c1", &["agent", "c1[1]"]);
    for (i, &c1) in sweep.quenched_c1.iter().enumerate() {
        quenched.push(vec![i.into(), c1.into()]);
    }
    let mut summary = Vec::new();
    for r in &sweep.rows {
        let p = &r.population;
        let mut row = vec![r.c2.into(), p.dip.dip.into(), p.dip.p_value.into(), p.dip.verdict_at(0.05).as_str().into(), p.ks_exponential.into()];
        match &r.tail {
            Ok(t) => {
                row.extend([
                    t.regression.xmin.into(),
                    t.regression.exponent.into(),
                    t.regression.stderr.into(),
                    t.mle.exponent.into(),
                    t.mle.stderr.into(),
                    t.regression.n_tail.into(),
                    Cell::Empty,
                ]);
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(Cell::Empty, 6));
                row.push(e.as_str().into());
            }
        }
        table.push(row);
        ccdf_rows(&mut ccdf, &[r.c2.into()], &p.summary.pooled);
        hist_rows(&mut hist, &[r.c2.into()], &p.summary.histogram);
        let mut mf_json = Value::Null;
        if let Ok(mf) = &r.meanfield {
            for m in &mf.rows {
                meanfield.push(vec![
                    r.c2.into(),
                    m.lambda_lo.into(),
                    m.lambda_hi.into(),
                    m.agents.into(),
                    m.mean_lambda.into(),
                    m.mean_w.into(),
                    m.lambda_w.into(),
                    m.release_w.into(),
                ]);
            }
            let (cv_lw, cv_rw) = mf.coefficients_of_variation(1);
            mf_json = json!({"flatter": mf.flatter(1).0, "cv_lambda_w": cv_lw, "cv_release_w": cv_rw});
        }
        summary.push(json!({
            "c2": r.c2,
            "population": population_json(p),
            "tail": r.tail.as_ref().ok(),
            "tail_error": r.tail.as_ref().err(),
            "meanfield": mf_json,
        }));
    }

    let mut checks = Vec::new();
    let tail = |r: &TransitionRow| r.tail.as_ref().map_or(f64::NAN, |t| t.regression.exponent);
    if let Some(r) = find_row(&sweep.rows, 0.0) {
        checks.push(Check::within("c2=0 ks_exponential", r.population.ks_exponential, 0.0, 0.03));
    }
    if let Some(r) = find_row(&sweep.rows, 1.0) {
        checks.push(Check::flag("c2=1 bimodal_at_0.05", r.population.dip.is_bimodal_at(0.05)));
        checks.push(Check::within("c2=1 tail_exponent", tail(r), -2.3, -1.7));
    }
    if let Some(r) = find_row(&sweep.rows, 50.0) {
        checks.push(Check::within("c2=50 tail_exponent", tail(r), -2.15, -1.85));
        checks.push(Check::flag("c2=50 unimodal_at_0.05", !r.population.dip.is_bimodal_at(0.05)));
    }
    Ok(Report {
        tables: vec![table, ccdf, hist, meanfield, quenched],
        summary: json!({"topology": setup.topology, "rows": summary}),
        checks,
    })
}

fn binary_compare(ctx: &Context, cfg: &Config) -> Result<Report> {
    let b = &cfg.binary_compare;
    let rep = run_binary_replication(ctx, b.c1, &b.c2_values, &cfg.model.setup(), &b.convergence)?;
    let mut runs = Table::new(
        "runs",
        &["c2[1/size]", "topology", "dip[1]", "p_value[1]", "verdict_0.05", "ks_exponential[1]", "convergence_sweeps[sweeps]"],
    );
    let mut cmp = Table::new("comparison", &["c2[1/size]", "verdicts_agree_0.05", "ks_between[1]", "global_faster"]);
    let mut hist = Table::new("histograms", &cols(&["c2[1/size]", "topology"], &HIST_COLS));
    let mut checks = Vec::new();
    let mut summary = Vec::new();
    for r in &rep.rows {
        for t in [&r.global, &r.binary] {
            let p = &t.population;
            runs.push(vec![
                r.c2.into(),
                t.topology.to_string().into(),
                p.dip.dip.into(),
                p.dip.p_value.into(),
                p.dip.verdict_at(0.05).as_str().into(),
                p.ks_exponential.into(),
                t.convergence_sweeps.into(),
            ]);
            hist_rows(&mut hist, &[r.c2.into(), t.topology.to_string().into()], &p.summary.histogram);
        }
        let faster = r.global_faster();
        cmp.push(vec![r.c2.into(), r.verdicts_agree_at_5.into(), r.ks_between.into(), faster.into()]);
        checks.push(Check::flag(&format!("c2={} verdicts_agree_at_0.05", r.c2), r.verdicts_agree_at_5));
        checks.push(Check::flag(&format!("c2={} global_converges_faster", r.c2), faster == Some(true)));
        summary.push(json!({
            "c2": r.c2,
            "global": {"population": population_json(&r.global.population), "convergence_sweeps": r.global.convergence_sweeps},
            "binary": {"population": population_json(&r.binary.population), "convergence_sweeps": r.binary.convergence_sweeps},
            "ks_between": r.ks_between,
        }));
    }
    Ok(Report {
        tables: vec![runs, cmp, hist],
        summary: json!({"c1": b.c1, "rows": summary}),
        checks,
    })
}

fn zipf_laplace(ctx: &Context, cfg: &Config) -> Result<Report> {
    let rep = run_zipf_laplace(ctx, &cfg.model.setup(), cfg.zipf_laplace.growth_pairs)?;
    let mut m = Table::new("m_ccdf", &["m[1]", "ccdf[1]"]);
    ccdf_rows(&mut m, &[], &rep.m);
    let mut growth = Table::new("growth_histogram", &["bin_lo[1]", "bin_hi[1]", "mass[1]", "density[1]"]);
    hist_rows(&mut growth, &[], &Histogram::build(rep.growth_rates.values(), cfg.output.bins, BinScale::Linear)?);
    let mut growth_ecdf = Table::new("growth_ecdf", &["p[1]", "g[1]"]);
    ecdf_rows(&mut growth_ecdf, &[], &rep.growth_rates, cfg.output.ecdf_points);
    Ok(Report {
        tables: vec![m, growth, growth_ecdf],
        summary: json!({
            "ks_exponential": rep.ks_exponential,
            "zipf": rep.zipf,
            "growth": rep.growth,
        }),
        checks: rep.checks,
    })
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new("checks", &["name", "value", "lo", "hi", "passed"]);
    for c in checks {
        t.push(vec![c.name.as_str().into(), c.value.into(), c.lo.into(), c.hi.into(), c.passed.into()]);
    }
    t
}
