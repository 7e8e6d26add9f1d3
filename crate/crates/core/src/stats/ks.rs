use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::ecdf::Ecdf;

/// Closed-form reference distributions for goodness-of-fit distances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Reference {
    Exponential { mean: f64 },
    Laplace { loc: f64, scale: f64 },
    Uniform { a: f64, b: f64 },
    LogNormal { mu: f64, sigma: f64 },
    /// Pareto with CCDF `(x / xmin)^-alpha`.
    Pareto { xmin: f64, alpha: f64 },
    /// Beta(1, b); the marginal of a uniform point on the b-simplex.
    BetaOne { b: f64 },
}

impl Reference {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Reference::Exponential { mean } => mean.is_finite() && mean > 0.0,
            Reference::Laplace { loc, scale } => loc.is_finite() && scale.is_finite() && scale > 0.0,
            Reference::Uniform { a, b } => a.is_finite() && b.is_finite() && b > a,
            Reference::LogNormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma > 0.0,
            Reference::Pareto { xmin, alpha } => xmin.is_finite() && xmin > 0.0 && alpha.is_finite() && alpha > 0.0,
            Reference::BetaOne { b } => b.is_finite() && b > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid_arg(format!("invalid reference parameters: {self:?}")))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Reference::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            Reference::Laplace { loc, scale } => {
                let z = (x - loc) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            Reference::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Reference::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    0.5 * libm::erfc(-(x.ln() - mu) / (sigma * std::f64::consts::SQRT_2))
                }
            }
            Reference::Pareto { xmin, alpha } => {
                if x <= xmin {
                    0.0
                } else {
                    1.0 - (x / xmin).powf(-alpha)
                }
            }
            Reference::BetaOne { b } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    -((b * (-x).ln_1p()).exp_m1())
                }
            }
        }
    }
}

/// Sup-distance between the ECDF and a reference CDF.
pub fn ks_distance(sample: &Ecdf, reference: &Reference) -> Result<f64> {
    reference.validate()?;
    Ok(ks_distance_fn(sample, |x| reference.cdf(x)))
}

/// Sup-distance against an arbitrary continuous CDF, checked on both sides of every jump.
pub fn ks_distance_fn(sample: &Ecdf, cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sample.len() as f64;
    sample
        .values()
        .iter()
        .enumerate()
        .fold(0.0, |d, (i, &x)| {
            let f = cdf(x);
            d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
        })
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &Ecdf, b: &Ecdf) -> f64 {
    let (xa, xb) = (a.values(), b.values());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn quantile_sample_has_half_step_distance() {
        let n = 1000;
        let r = Reference::Exponential { mean: 2.0 };
        let v: Vec<f64> = (1..=n)
            .map(|i| {
                let p = (i as f64 - 0.5) / n as f64;
                -2.0 * (1.0 - p).ln()
            })
            .collect();
        let d = ks_distance(&Ecdf::new(v).unwrap(), &r).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-12, "{d}");
    }

    #[test]
    fn exact_sample_distance_small() {
        // Kolmogorov 0.99 quantile / sqrt(1e5) = 1.628 / 316.2 = 0.00515
        let mut rng = RngStream::new(4);
        let v: Vec<f64> = (0..100_000).map(|_| rng.exponential()).collect();
        let d = ks_distance(&Ecdf::new(v).unwrap(), &Reference::Exponential { mean: 1.0 }).unwrap();
        assert!(d < 0.006, "{d}");
    }

    #[test]
    fn reference_cdfs() {
        let lap = Reference::Laplace { loc: 0.0, scale: 1.0 };
        assert_eq!(lap.cdf(0.0), 0.5);
        assert!((lap.cdf(1.0) - (1.0 - 0.5 * (-1f64).exp())).abs() < 1e-15);
        let ln = Reference::LogNormal { mu: 0.0, sigma: 1.0 };
        assert!((ln.cdf(1.0) - 0.5).abs() < 1e-15);
        // Phi(1) = 0.8413447460685429
        assert!((ln.cdf(std::f64::consts::E) - 0.841_344_746_068_542_9).abs() < 1e-12);
        let beta = Reference::BetaOne { b: 3.0 };
        assert!((beta.cdf(0.5) - 0.875).abs() < 1e-15);
        assert_eq!(Reference::Uniform { a: 0.0, b: 2.0 }.cdf(0.5), 0.25);
        assert_eq!(Reference::Pareto { xmin: 1.0, alpha: 1.0 }.cdf(4.0), 0.75);
    }

    #[test]
    fn invalid_parameters() {
        let e = Ecdf::new(vec![1.0]).unwrap();
        assert!(ks_distance(&e, &Reference::Exponential { mean: 0.0 }).is_err());
        assert!(ks_distance(&e, &Reference::Laplace { loc: 0.0, scale: -1.0 }).is_err());
        assert!(ks_distance(&e, &Reference::Uniform { a: 1.0, b: 1.0 }).is_err());
        assert!(ks_distance(&e, &Reference::LogNormal { mu: f64::NAN, sigma: 1.0 }).is_err());
    }

    #[test]
    fn two_sample() {
        let a = Ecdf::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        let b = Ecdf::new(vec![3.5, 4.5, 5.5, 6.5]).unwrap();
        assert_eq!(ks_two_sample(&a, &b), 0.75);
        let c = Ecdf::new(vec![10.0, 11.0]).unwrap();
        assert_eq!(ks_two_sample(&a, &c), 1.0);
    }
}
