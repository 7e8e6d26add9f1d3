//! Hartigan's dip statistic and its Monte Carlo calibration.
//!
//! The dip is the sup-distance between the empirical CDF and the closest
//! unimodal CDF. It is computed by alternating the greatest convex minorant
//! (left of the modal interval) and least concave majorant (right of it),
//! shrinking the modal interval until the fit stops improving.
//!
//! Tied observations are treated as infinitesimally separated, equally spaced
//! points, which keeps the right-continuous ECDF jumps of height `k/n` and lets
//! a tie group only carry an atom of the fitted unimodal CDF at its mode. An
//! all-equal sample therefore has dip `1/(2n)`, the same as a sample of one
//! point per atom. A single observation is assigned the uninformative `1/4`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::ecdf::{check_sorted, Ecdf};

/// Significance levels at which verdicts are reported.
pub const SIGNIFICANCE_LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

/// Default number of uniform null samples per sample size.
pub const DEFAULT_NULL_REPS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BimodalSuspected,
    UnimodalNotRejected,
}

impl Verdict {
    pub fn from_p(p_value: f64, alpha: f64) -> Self {
        if p_value < alpha {
            Verdict::BimodalSuspected
        } else {
            Verdict::UnimodalNotRejected
        }
    }

    pub fn is_bimodal(self) -> bool {
        self == Verdict::BimodalSuspected
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::BimodalSuspected => "bimodal-suspected",
            Verdict::UnimodalNotRejected => "unimodal-not-rejected",
        }
    }
}

/// Dip statistic with its calibrated p-value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DipResult {
    pub dip: f64,
    pub n: usize,
    pub p_value: f64,
    pub null_reps: usize,
    /// Verdicts at [`SIGNIFICANCE_LEVELS`], in order.
    pub verdicts: [Verdict; 3],
}

impl DipResult {
    pub fn new(dip: f64, n: usize, p_value: f64, null_reps: usize) -> Self {
        let verdicts = SIGNIFICANCE_LEVELS.map(|a| Verdict::from_p(p_value, a));
        Self {
            dip,
            n,
            p_value,
            null_reps,
            verdicts,
        }
    }

    pub fn verdict_at(&self, alpha: f64) -> Verdict {
        Verdict::from_p(self.p_value, alpha)
    }

    pub fn is_bimodal_at(&self, alpha: f64) -> bool {
        self.verdict_at(alpha).is_bimodal()
    }
}

/// Dip of an ECDF.
pub fn dip_statistic(ecdf: &Ecdf) -> f64 {
    let x = ecdf.values();
    if x.len() == 1 {
        return 0.25;
    }
    twice_n_dip(x) / (2.0 * x.len() as f64)
}

/// Dip of raw values that must already be sorted ascending.
pub fn dip_sorted(x: &[f64]) -> Result<f64> {
    check_sorted(x)?;
    match x.len() {
        0 => Err(Error::InsufficientData { count: 0, required: 1 }),
        1 => Ok(0.25),
        n => Ok(twice_n_dip(x) / (2.0 * n as f64)),
    }
}

/// `lim (p_b - p_a) / (p_c - p_a)` for positions `p_i = x_i + δ i`, δ → 0.
#[inline]
fn ratio(x: &[f64], a: usize, b: usize, c: usize) -> f64 {
    let den = x[c] - x[a];
    if den != 0.0 {
        (x[b] - x[a]) / den
    } else {
        (b as f64 - a as f64) / (c as f64 - a as f64)
    }
}

/// The dip in count units, doubled (`2 n dip`). Indices are 1-based internally.
fn twice_n_dip(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let mut x = Vec::with_capacity(n + 1);
    x.push(f64::NAN);
    x.extend_from_slice(sorted);

    let mut dip = 1.0;
    if x[n] == x[1] {
        return dip;
    }

    // mn[j]: predecessor of j on the convex minorant of points 1..j
    let mut mn = vec![0usize; n + 1];
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let a = mn[j];
            let b = mn[a];
            if a == 1 || (x[j] - x[a]) * ((a - b) as f64) < (x[a] - x[b]) * (j - a) as f64 {
                break;
            }
            mn[j] = b;
        }
    }
    // mj[k]: successor of k on the concave majorant of points k..n
    let mut mj = vec![0usize; n + 1];
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let a = mj[k];
            let b = mj[a];
            if a == n || (x[a] - x[k]) * ((b - a) as f64) < (x[b] - x[a]) * (a - k) as f64 {
                break;
            }
            mj[k] = b;
        }
    }

    let mut gcm = vec![0usize; n + 2];
    let mut lcm = vec![0usize; n + 2];
    let mut low = 1usize;
    let mut high = n;
    loop {
        // change points of the GCM from high down to low
        gcm[1] = high;
        let mut i = 1;
        while gcm[i] > low {
            gcm[i + 1] = mn[gcm[i]];
            i += 1;
        }
        let l_gcm = i;
        let mut ig = l_gcm;
        let mut ix = ig - 1;

        // change points of the LCM from low up to high
        lcm[1] = low;
        i = 1;
        while lcm[i] < high {
            lcm[i + 1] = mj[lcm[i]];
            i += 1;
        }
        let l_lcm = i;
        let mut ih = l_lcm;
        let mut iv = 2;

        // largest GCM/LCM gap inside [low, high]
        let mut d = 0.0;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let g1 = gcm[ix + 1];
                    let dx = (lcmiv as f64 - g1 as f64 + 1.0) - ratio(&x, g1, lcmiv, gcmix) * (gcmix - g1) as f64;
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let l1 = lcm[iv - 1];
                    let dx = ratio(&x, l1, gcmix, lcmiv) * (lcmiv - l1) as f64 - (gcmix as f64 - l1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                ix = ix.max(1);
                iv = iv.min(l_lcm);
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }
        if d < dip {
            break;
        }

        // worst ECDF departure from the GCM left of the new modal interval
        let mut dip_l: f64 = 0.0;
        for j in ig..l_gcm {
            let (jb, je) = (gcm[j + 1], gcm[j]);
            let mut max_t: f64 = 1.0;
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    max_t = max_t.max((jj - jb + 1) as f64 - (x[jj] - x[jb]) * c);
                }
            }
            dip_l = dip_l.max(max_t);
        }
        // and from the LCM right of it
        let mut dip_u: f64 = 0.0;
        for j in ih..l_lcm {
            let (jb, je) = (lcm[j], lcm[j + 1]);
            let mut max_t: f64 = 1.0;
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    max_t = max_t.max((x[jj] - x[jb]) * c - (jj as f64 - jb as f64 - 1.0));
                }
            }
            dip_u = dip_u.max(max_t);
        }
        dip = dip.max(dip_l.max(dip_u));

        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }
    dip
}

/// Sorted dips of uniform samples of one size.
#[derive(Clone, Debug)]
pub struct NullTable {
    n: usize,
    dips: Vec<f64>,
}

impl NullTable {
    /// Simulates `reps` Uniform(0,1) samples of size `n`; rep `r` uses `rng.split(r)`.
    pub fn build(n: usize, reps: usize, rng: &RngStream) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid_arg("null table sample size must be >= 1"));
        }
        if reps == 0 {
            return Err(Error::invalid_arg("null_reps must be >= 1"));
        }
        let mut dips: Vec<f64> = (0..reps as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = rng.split(r);
                let sample = sorted_uniform_sample(n, &mut rng);
                if n == 1 {
                    0.25
                } else {
                    twice_n_dip(&sample) / (2.0 * n as f64)
                }
            })
            .collect();
        dips.sort_unstable_by(f64::total_cmp);
        Ok(Self { n, dips })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reps(&self) -> usize {
        self.dips.len()
    }

    pub fn dips(&self) -> &[f64] {
        &self.dips
    }

    /// Fraction of null dips `>=` the observed one.
    pub fn p_value(&self, dip: f64) -> f64 {
        let below = self.dips.partition_point(|&d| d < dip);
        (self.dips.len() - below) as f64 / self.dips.len() as f64
    }

    pub fn evaluate(&self, dip: f64) -> DipResult {
        DipResult::new(dip, self.n, self.p_value(dip), self.reps())
    }

    /// Dip and p-value of a sample of this table's size.
    pub fn test(&self, ecdf: &Ecdf) -> Result<DipResult> {
        if ecdf.len() != self.n {
            return Err(Error::invalid_arg(format!(
                "sample size {} does not match null table size {}",
                ecdf.len(),
                self.n
            )));
        }
        Ok(self.evaluate(dip_statistic(ecdf)))
    }
}

/// Uniform order statistics up to scale: cumulative sums of exponential spacings.
/// The dip is affine invariant, so the final normalisation is skipped.
fn sorted_uniform_sample(n: usize, rng: &mut RngStream) -> Vec<f64> {
    let mut acc = 0.0;
    (0..n)
        .map(|_| {
            acc += rng.exponential();
            acc
        })
        .collect()
}

/// Calibrates `dip` for sample size `n` against `null_reps` uniform samples.
pub fn dip_pvalue(dip: f64, n: usize, rng: &RngStream, null_reps: usize) -> Result<DipResult> {
    Ok(NullTable::build(n, null_reps, rng)?.evaluate(dip))
}

/// Write-once null tables keyed by sample size, shared across a scan.
///
/// The table for size `n` is built from `base.split(n)`, so its content does not
/// depend on which cell asked for it first.
pub struct NullCache {
    base: RngStream,
    reps: usize,
    tables: Mutex<HashMap<usize, Arc<OnceLock<Arc<NullTable>>>>>,
}

impl NullCache {
    pub fn new(base: RngStream, reps: usize) -> Self {
        Self {
            base,
            reps,
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn table(&self, n: usize) -> Result<Arc<NullTable>> {
        let slot = {
            let mut tables = self.tables.lock().expect("null cache poisoned");
            Arc::clone(tables.entry(n).or_default())
        };
        if let Some(t) = slot.get() {
            return Ok(Arc::clone(t));
        }
        let built = Arc::new(NullTable::build(n, self.reps, &self.base.split(n as u64))?);
        Ok(Arc::clone(slot.get_or_init(|| built)))
    }

    pub fn test(&self, ecdf: &Ecdf) -> Result<DipResult> {
        self.table(ecdf.len())?.test(ecdf)
    }
}
