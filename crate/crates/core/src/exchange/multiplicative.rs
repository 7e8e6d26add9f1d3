//! The multiplicative view of the zero-retention dynamics.
//!
//! Setting `m = exp(w)` turns additive conservation of `Σw` into conservation
//! of `Π m`. When `w` is exponential with mean 1, `m` has a Pareto tail with
//! pdf exponent −2, and log growth rates `ln(m_{t+1}/m_t) = w_{t+1} − w_t`
//! follow Laplace(0, 1).

use crate::error::{Error, Result};
use crate::exchange::FirmVector;

/// Largest `w` for which `exp(w)` is finite.
const MAX_EXPONENT: f64 = 709.782_712_893_384;

/// Elementwise `m = exp(w)`.
pub fn to_multiplicative(w: &[f64]) -> Result<Vec<f64>> {
    w.iter()
        .enumerate()
        .map(|(index, &x)| {
            if x.is_nan() {
                return Err(Error::NotANumber(index));
            }
            if x > MAX_EXPONENT {
                return Err(Error::Overflow { index, value: x });
            }
            Ok(x.exp())
        })
        .collect()
}

/// Log growth rates `w_i(t+1) − w_i(t)` pooled over agents and consecutive pairs.
pub fn growth_series(snapshots: &[FirmVector]) -> Result<Vec<f64>> {
    if snapshots.len() < 2 {
        return Err(Error::InsufficientData {
            count: snapshots.len(),
            required: 2,
        });
    }
    let n = snapshots[0].len();
    if let Some(s) = snapshots.iter().find(|s| s.len() != n) {
        return Err(Error::invalid_arg(format!(
            "snapshot sizes differ: {} vs {n} agents",
            s.len()
        )));
    }
    let mut g = Vec::with_capacity(n * (snapshots.len() - 1));
    for pair in snapshots.windows(2) {
        g.extend(pair[1].sizes().iter().zip(pair[0].sizes()).map(|(b, a)| b - a));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponentials() {
        let m = to_multiplicative(&[0.0, 2f64.ln(), 4f64.ln()]).unwrap();
        assert_eq!(m[0], 1.0);
        assert!((m[1] - 2.0).abs() < 1e-15);
        assert!((m[2] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn overflow_reports_index() {
        match to_multiplicative(&[1.0, 800.0]) {
            Err(Error::Overflow { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        assert!(to_multiplicative(&[709.0]).unwrap()[0].is_finite());
    }

    #[test]
    fn identical_snapshots_have_zero_growth() {
        let s = FirmVector::from_sizes(vec![0.5, 1.5, 1.0]).unwrap();
        let g = growth_series(&[s.clone(), s.clone(), s]).unwrap();
        assert_eq!(g, vec![0.0; 6]);
    }

    #[test]
    fn growth_errors() {
        let a = FirmVector::from_sizes(vec![1.0, 1.0]).unwrap();
        let b = FirmVector::from_sizes(vec![1.0]).unwrap();
        assert!(growth_series(std::slice::from_ref(&a)).is_err());
        assert!(growth_series(&[a, b]).is_err());
    }
}
