use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::ecdf::Ecdf;

pub const DEFAULT_BINS: usize = 50;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinScale {
    #[default]
    Linear,
    /// Log-spaced edges over the positive range, for power-law plots.
    Log,
}

/// Bin edges and probability mass per bin (mass sums to 1).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub mass: Vec<f64>,
}

impl Histogram {
    /// `bins` bins over `[min, max]`; the last bin is closed on the right.
    pub fn build(sorted: &[f64], bins: usize, scale: BinScale) -> Result<Self> {
        if sorted.is_empty() {
            return Err(Error::InsufficientData { count: 0, required: 1 });
        }
        if bins == 0 {
            return Err(Error::invalid_arg("histogram needs at least one bin"));
        }
        let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
        if lo == hi {
            return Ok(Self {
                edges: vec![lo, hi],
                mass: vec![1.0],
            });
        }
        let edges: Vec<f64> = match scale {
            BinScale::Linear => (0..=bins)
                .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
                .collect(),
            BinScale::Log => {
                if lo <= 0.0 {
                    return Err(Error::invalid_arg("log-spaced bins need strictly positive values"));
                }
                let (a, b) = (lo.ln(), hi.ln());
                (0..=bins).map(|i| (a + (b - a) * i as f64 / bins as f64).exp()).collect()
            }
        };
        let n = sorted.len() as f64;
        let mut mass = Vec::with_capacity(bins);
        let mut start = 0;
        for b in 0..bins {
            let end = if b + 1 == bins {
                sorted.len()
            } else {
                sorted.partition_point(|&v| v < edges[b + 1])
            };
            mass.push((end - start) as f64 / n);
            start = end;
        }
        Ok(Self { edges, mass })
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    /// Mass divided by bin width.
    pub fn density(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .zip(&self.mass)
            .map(|(e, m)| if e[1] > e[0] { m / (e[1] - e[0]) } else { *m })
            .collect()
    }

    /// Indices of interior or boundary bins higher than their neighbours
    /// (strictly above the left, at least the right, so plateaus count once).
    pub fn local_maxima(&self) -> Vec<usize> {
        let h = &self.mass;
        (0..h.len())
            .filter(|&i| {
                let left = i == 0 || h[i] > h[i - 1];
                let right = i + 1 == h.len() || h[i] >= h[i + 1];
                h[i] > 0.0 && left && right
            })
            .collect()
    }

    /// Two local maxima with a trough between them lower than
    /// `ratio * min(peak heights)`, if any. Returns the deepest such pair.
    pub fn separated_peaks(&self, ratio: f64) -> Option<(usize, usize)> {
        let peaks = self.local_maxima();
        let mut best: Option<(f64, (usize, usize))> = None;
        for (a, &i) in peaks.iter().enumerate() {
            for &j in &peaks[a + 1..] {
                let trough = self.mass[i..=j].iter().copied().fold(f64::INFINITY, f64::min);
                let rel = trough / self.mass[i].min(self.mass[j]);
                if rel < ratio && best.is_none_or(|(r, _)| rel < r) {
                    best = Some((rel, (i, j)));
                }
            }
        }
        best.map(|(_, p)| p)
    }
}

/// Mean, variance and standardised third and fourth moments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Moments {
    /// Population moments; shape moments are 0 for a degenerate sample.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= n;
        m3 /= n;
        m4 /= n;
        if m2 == 0.0 {
            return Self {
                mean,
                variance: 0.0,
                skewness: 0.0,
                excess_kurtosis: 0.0,
            };
        }
        Self {
            mean,
            variance: m2,
            skewness: m3 / m2.powf(1.5),
            excess_kurtosis: m4 / (m2 * m2) - 3.0,
        }
    }
}

/// Pooled steady-state distribution with its retention-rate inset.
#[derive(Clone, Debug, Serialize)]
pub struct DistributionSummary {
    #[serde(skip)]
    pub pooled: Ecdf,
    pub histogram: Histogram,
    pub moments: Moments,
    pub lambda_histogram: Option<Histogram>,
}

/// Histogram (default 50 equal-width bins over `[min, max]`), moments and ECDF.
pub fn summarize(
    values: &[f64],
    lambdas: Option<&[f64]>,
    bins: usize,
    scale: BinScale,
) -> Result<DistributionSummary> {
    let pooled = Ecdf::new(values.to_vec())?;
    let histogram = Histogram::build(pooled.values(), bins, scale)?;
    let moments = Moments::of(values);
    let lambda_histogram = match lambdas {
        Some(l) => {
            let e = Ecdf::new(l.to_vec())?;
            Some(Histogram::build(e.values(), bins, BinScale::Linear)?)
        }
        None => None,
    };
    Ok(DistributionSummary {
        pooled,
        histogram,
        moments,
        lambda_histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value() {
        let s = summarize(&[2.5], None, DEFAULT_BINS, BinScale::Linear).unwrap();
        assert_eq!(s.histogram.mass, vec![1.0]);
        assert_eq!(s.moments.variance, 0.0);
        assert!(s.moments.skewness.is_finite());
    }

    #[test]
    fn mass_sums_to_one() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt()).collect();
        let h = Histogram::build(&v, 50, BinScale::Linear).unwrap();
        assert!((h.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(h.edges.len(), 51);
        let pos: Vec<f64> = v[1..].to_vec();
        let h = Histogram::build(&pos, 20, BinScale::Log).unwrap();
        assert!((h.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(Histogram::build(&v, 20, BinScale::Log).is_err());
    }

    #[test]
    fn moments_of_known_sample() {
        let m = Moments::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert_eq!(m.variance, 1.25);
        assert!(m.skewness.abs() < 1e-15);
        // m4 = (2*1.5^4 + 2*0.5^4)/4 = 2.5625, 2.5625/1.5625 - 3
        assert!((m.excess_kurtosis - (2.5625 / 1.5625 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn peak_detection() {
        let h = Histogram {
            edges: (0..=7).map(f64::from).collect(),
            mass: vec![0.1, 0.3, 0.05, 0.04, 0.2, 0.25, 0.06],
        };
        assert_eq!(h.local_maxima(), vec![1, 5]);
        assert_eq!(h.separated_peaks(0.7), Some((1, 5)));
        let mono = Histogram {
            edges: (0..=4).map(f64::from).collect(),
            mass: vec![0.4, 0.3, 0.2, 0.1],
        };
        assert_eq!(mono.separated_peaks(0.7), None);
    }
}
