use crate::error::{Error, Result};

/// Empirical distribution of a sample, stored as its sorted values.
#[derive(Clone, Debug, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    /// Sorts `values`. Fails on NaN or an empty sample.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::NotANumber(i));
        }
        if values.is_empty() {
            return Err(Error::InsufficientData { count: 0, required: 1 });
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    /// Takes already sorted values without re-sorting.
    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        check_sorted(&values)?;
        if values.is_empty() {
            return Err(Error::InsufficientData { count: 0, required: 1 });
        }
        Ok(Self { sorted: values })
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// `F(x) = #{x_i <= x} / n` (right-continuous).
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Fraction of the sample strictly above `x`.
    pub fn ccdf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Sample values `>= xmin`, ascending.
    pub fn tail(&self, xmin: f64) -> &[f64] {
        let start = self.sorted.partition_point(|&v| v < xmin);
        &self.sorted[start..]
    }

    /// Type-7 quantile (linear interpolation between order statistics).
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        self.sorted[lo] + (h - lo as f64) * (self.sorted[hi] - self.sorted[lo])
    }
}

/// Fails with the first out-of-order index, or on NaN.
pub fn check_sorted(values: &[f64]) -> Result<()> {
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::NotANumber(i));
    }
    if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Unsorted(i + 1));
    }
    Ok(())
}
