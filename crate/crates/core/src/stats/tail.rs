//! Power-law tail exponents.
//!
//! Two estimators of the pdf exponent `-β` in `p(x) ∝ x^-β` above `xmin`:
//!
//! * CCDF regression: OLS of `ln S(x)` on `ln x` over a log-spaced grid, where
//!   `S` is the tail CCDF; the pdf exponent is the slope minus one. Its standard
//!   error is the delta-method variance of the slope under multinomial
//!   fluctuations of the empirical CCDF.
//! * Continuous maximum likelihood (Hill): `β = 1 + k / Σ ln(x_i / xmin)` with
//!   standard error `(β - 1) / sqrt(k)`.
//!
//! Pooled steady-state samples repeat the same agents across snapshots. For
//! those, [`tail_exponent_pooled`] counts `snapshots` samples as one
//! independent unit: the regression grid stops where fewer than ten units
//! remain, and both standard errors use `k / snapshots` observations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::ecdf::Ecdf;
use crate::stats::ks::{ks_distance_fn, Reference};

/// Fewest samples above `xmin` accepted by [`tail_exponent`].
pub const MIN_TAIL_SAMPLES: usize = 100;

/// The regression grid stops where fewer than this many independent units remain above it.
const MIN_GRID_UNITS: usize = 10;
const GRID_POINTS_PER_DECADE: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    CcdfRegression,
    MleHill,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailFit {
    /// pdf exponent, e.g. −2 for Zipf.
    pub exponent: f64,
    pub xmin: f64,
    pub stderr: f64,
    pub method: TailMethod,
    pub n_tail: usize,
}

impl TailFit {
    /// Slope of the CCDF on log-log axes (`exponent + 1`).
    pub fn ccdf_slope(&self) -> f64 {
        self.exponent + 1.0
    }
}

/// Both estimators at one cutoff.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    /// Primary estimate.
    pub regression: TailFit,
    /// Cross-check.
    pub mle: TailFit,
}

impl TailEstimate {
    pub fn joint_stderr(&self) -> f64 {
        self.regression.stderr.hypot(self.mle.stderr)
    }

    /// Difference between the estimators in joint standard errors.
    pub fn discrepancy(&self) -> f64 {
        (self.regression.exponent - self.mle.exponent).abs() / self.joint_stderr()
    }
}

/// Fits both tail estimators to the samples `>= xmin`, treated as independent.
pub fn tail_exponent(pooled: &Ecdf, xmin: f64) -> Result<TailEstimate> {
    tail_exponent_pooled(pooled, xmin, 1)
}

/// [`tail_exponent`] for `snapshots` pooled snapshots of one population.
pub fn tail_exponent_pooled(pooled: &Ecdf, xmin: f64, snapshots: usize) -> Result<TailEstimate> {
    if snapshots == 0 {
        return Err(Error::invalid_arg("snapshots must be >= 1"));
    }
    if !(xmin > 0.0) || !xmin.is_finite() {
        return Err(Error::invalid_arg(format!("xmin = {xmin} must be positive and finite")));
    }
    let tail = pooled.tail(xmin);
    if tail.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientData {
            count: tail.len(),
            required: MIN_TAIL_SAMPLES,
        });
    }
    if tail.len() < MIN_GRID_UNITS * snapshots + 1 {
        return Err(Error::InsufficientData {
            count: tail.len(),
            required: MIN_GRID_UNITS * snapshots + 1,
        });
    }
    Ok(TailEstimate {
        regression: ccdf_regression(tail, xmin, snapshots)?,
        mle: hill_mle(tail, xmin, snapshots)?,
    })
}

fn hill_mle(tail: &[f64], xmin: f64, snapshots: usize) -> Result<TailFit> {
    let k = tail.len() as f64;
    let s: f64 = tail.iter().map(|&x| (x / xmin).ln()).sum();
    if !(s > 0.0) {
        return Err(Error::invalid_arg("all tail samples equal xmin; exponent undefined"));
    }
    let alpha = k / s;
    Ok(TailFit {
        exponent: -(1.0 + alpha),
        xmin,
        stderr: alpha / (k / snapshots as f64).sqrt(),
        method: TailMethod::MleHill,
        n_tail: tail.len(),
    })
}

fn ccdf_regression(tail: &[f64], xmin: f64, snapshots: usize) -> Result<TailFit> {
    let k = tail.len();
    let upper = tail[k - MIN_GRID_UNITS * snapshots];
    if !(upper > xmin) {
        return Err(Error::invalid_arg("tail spans no range above xmin"));
    }
    let span = (upper / xmin).ln();
    let points = ((span / std::f64::consts::LN_10 * GRID_POINTS_PER_DECADE).ceil() as usize).max(5);
    let kf = k as f64;
    let k_eff = kf / snapshots as f64;
    let mut u = Vec::with_capacity(points + 1);
    let mut s = Vec::with_capacity(points + 1);
    for g in 0..=points {
        let x = xmin * (span * g as f64 / points as f64).exp();
        let above = k - tail.partition_point(|&v| v < x);
        u.push(x.ln());
        s.push(above as f64 / kf);
    }
    let m = u.len() as f64;
    let ubar = u.iter().sum::<f64>() / m;
    let suu: f64 = u.iter().map(|x| (x - ubar).powi(2)).sum();
    let ybar = s.iter().map(|p| p.ln()).sum::<f64>() / m;
    let slope = u
        .iter()
        .zip(&s)
        .map(|(x, p)| (x - ubar) * (p.ln() - ybar))
        .sum::<f64>()
        / suu;

    // Var(ln S_g) ≈ Var(S_g) / S_g², Cov(S_g, S_h) = (min(S_g, S_h) − S_g S_h) / k
    let c: Vec<f64> = u.iter().map(|x| (x - ubar) / suu).collect();
    let mut var = 0.0;
    for g in 0..u.len() {
        for h in 0..u.len() {
            let cov = (s[g].min(s[h]) - s[g] * s[h]) / k_eff;
            var += c[g] * c[h] * cov / (s[g] * s[h]);
        }
    }
    Ok(TailFit {
        exponent: slope - 1.0,
        xmin,
        stderr: var.max(0.0).sqrt(),
        method: TailMethod::CcdfRegression,
        n_tail: k,
    })
}

/// Picks the cutoff minimising the KS distance between the tail and its
/// fitted Pareto law, over `candidates` quantiles of the sample.
///
/// Candidates leaving fewer than `min_tail` samples above are skipped.
pub fn select_xmin(pooled: &Ecdf, candidates: &[f64], min_tail: usize) -> Result<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &q in candidates {
        let xmin = pooled.quantile(q);
        if !(xmin > 0.0) {
            continue;
        }
        let tail = pooled.tail(xmin);
        if tail.len() < min_tail.max(MIN_TAIL_SAMPLES) {
            continue;
        }
        let Ok(fit) = hill_mle(tail, xmin, 1) else {
            continue;
        };
        let alpha = -fit.exponent - 1.0;
        let tail_ecdf = Ecdf::from_sorted(tail.to_vec())?;
        let reference = Reference::Pareto { xmin, alpha };
        let d = ks_distance_fn(&tail_ecdf, |x| reference.cdf(x));
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, xmin));
        }
    }
    best.map(|(_, x)| x).ok_or(Error::InsufficientData {
        count: pooled.len(),
        required: min_tail.max(MIN_TAIL_SAMPLES),
    })
}

/// Evenly spaced quantile levels `lo, lo+step, ..., <= hi`.
pub fn quantile_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn pareto(n: usize, alpha: f64, seed: u64) -> Ecdf {
        let mut rng = RngStream::new(seed);
        Ecdf::new((0..n).map(|_| rng.uniform_open().powf(-1.0 / alpha)).collect()).unwrap()
    }

    #[test]
    fn zipf_pareto_recovered() {
        let e = pareto(100_000, 1.0, 1);
        let fit = tail_exponent(&e, 1.0).unwrap();
        assert!((fit.regression.exponent + 2.0).abs() < 0.1, "{fit:?}");
        assert!((fit.mle.exponent + 2.0).abs() < 0.1, "{fit:?}");
        assert!((fit.regression.ccdf_slope() + 1.0).abs() < 0.1);
    }

    #[test]
    fn estimators_agree_on_pareto() {
        for seed in 0..10 {
            let e = pareto(20_000, 1.5, 100 + seed);
            let fit = tail_exponent(&e, 1.0).unwrap();
            assert!(fit.discrepancy() < 2.0, "seed {seed}: {fit:?}");
        }
    }

    #[test]
    fn exponential_data_is_flagged() {
        let mut rng = RngStream::new(2);
        let e = Ecdf::new((0..100_000).map(|_| rng.exponential()).collect()).unwrap();
        let a = tail_exponent(&e, 1.0).unwrap();
        let b = tail_exponent(&e, 3.0).unwrap();
        let drift = (a.mle.exponent - b.mle.exponent).abs() / a.mle.stderr.hypot(b.mle.stderr);
        assert!(a.discrepancy() > 3.0 || drift > 3.0, "{a:?} {b:?}");
    }

    #[test]
    fn pooled_snapshots_widen_errors() {
        let e = pareto(100_000, 1.0, 5);
        let iid = tail_exponent(&e, 1.0).unwrap();
        let pooled = tail_exponent_pooled(&e, 1.0, 100).unwrap();
        assert!((pooled.mle.stderr / iid.mle.stderr - 10.0).abs() < 1e-9);
        assert!(pooled.regression.stderr > iid.regression.stderr);
        assert!((pooled.regression.exponent + 2.0).abs() < 0.1);
        assert!(tail_exponent_pooled(&e, 1.0, 0).is_err());
    }

    #[test]
    fn too_few_tail_samples() {
        let e = pareto(1000, 1.0, 3);
        match tail_exponent(&e, 50.0) {
            Err(Error::InsufficientData { count, required }) => {
                assert!(count < 100);
                assert_eq!(required, 100);
            }
            other => panic!("{other:?}"),
        }
        assert!(tail_exponent(&e, 0.0).is_err());
    }

    #[test]
    fn xmin_selection_finds_power_law_onset() {
        // exponential body glued to a Pareto tail starting at 5
        let mut rng = RngStream::new(7);
        let mut v: Vec<f64> = (0..50_000).map(|_| 5.0 * rng.uniform()).collect();
        v.extend((0..50_000).map(|_| 5.0 * rng.uniform_open().powf(-1.0)));
        let e = Ecdf::new(v).unwrap();
        let xmin = select_xmin(&e, &quantile_grid(0.05, 0.95, 0.05), 100).unwrap();
        assert!((4.0..7.0).contains(&xmin), "{xmin}");
    }
}
