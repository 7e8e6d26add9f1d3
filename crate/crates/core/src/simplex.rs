//! Uniform sampling on the probability simplex.
//!
//! Redistribution fractions are drawn by generating `n` uniforms, taking
//! `-ln` of each and normalising by their sum. The result is Dirichlet(1, ..., 1),
//! i.e. uniform on the `(n-1)`-simplex.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Non-negative fractions with unit sum.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexSample(Vec<f64>);

impl SimplexSample {
    pub fn epsilon(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Wraps externally supplied fractions after checking the simplex invariants.
    pub fn from_fractions(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::invalid_arg("simplex sample must have at least one component"));
        }
        if let Some(i) = eps.iter().position(|e| !(*e >= 0.0)) {
            return Err(Error::invalid_arg(format!("fraction {i} is negative or NaN")));
        }
        let sum: f64 = eps.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid_arg(format!("fractions sum to {sum}, not 1")));
        }
        Ok(Self(eps))
    }
}

/// Draws one point uniformly from the `(n-1)`-simplex.
pub fn sample_simplex(rng: &mut RngStream, n: usize) -> Result<SimplexSample> {
    if n == 0 {
        return Err(Error::invalid_arg("simplex dimension n must be >= 1"));
    }
    let mut eps = vec![0.0; n];
    fill_simplex(rng, &mut eps);
    Ok(SimplexSample(eps))
}

/// In-place variant of [`sample_simplex`] for hot loops. `out` must be non-empty.
pub fn fill_simplex(rng: &mut RngStream, out: &mut [f64]) {
    debug_assert!(!out.is_empty());
    if out.len() == 1 {
        out[0] = 1.0;
        return;
    }
    let mut sum = 0.0;
    for e in out.iter_mut() {
        *e = rng.exponential();
        sum += *e;
    }
    let inv = 1.0 / sum;
    for e in out.iter_mut() {
        *e *= inv;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_component_is_one() {
        let mut rng = RngStream::new(0);
        assert_eq!(sample_simplex(&mut rng, 1).unwrap().epsilon(), &[1.0]);
    }

    #[test]
    fn zero_dimension_rejected() {
        let mut rng = RngStream::new(0);
        assert!(matches!(sample_simplex(&mut rng, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn binary_first_fraction_is_uniform() {
        let mut rng = RngStream::new(17);
        let mut xs: Vec<f64> = (0..50_000)
            .map(|_| sample_simplex(&mut rng, 2).unwrap().epsilon()[0])
            .collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| ((i + 1) as f64 / n - x).abs().max((x - i as f64 / n).abs()))
            .fold(0.0, f64::max);
        // Kolmogorov 0.999 quantile is about 1.95 / sqrt(n).
        assert!(d < 1.95 / n.sqrt(), "KS distance {d}");
    }

    #[test]
    fn from_fractions_validates() {
        assert!(SimplexSample::from_fractions(vec![0.5, 0.5]).is_ok());
        assert!(SimplexSample::from_fractions(vec![0.5, 0.6]).is_err());
        assert!(SimplexSample::from_fractions(vec![1.5, -0.5]).is_err());
        assert!(SimplexSample::from_fractions(vec![]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sums_to_one(seed in any::<u64>(), n in 1usize..2000) {
                let mut rng = RngStream::new(seed);
                let s = sample_simplex(&mut rng, n).unwrap();
                let sum: f64 = s.epsilon().iter().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-12, "sum {}", sum);
                prop_assert!(s.epsilon().iter().all(|&e| e >= 0.0));
            }
        }
    }
}
