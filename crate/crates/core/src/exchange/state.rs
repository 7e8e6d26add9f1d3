use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Sizes of all agents plus the sweep counter.
#[derive(Clone, Debug, PartialEq)]
pub struct FirmVector {
    w: Vec<f64>,
    t: u64,
}

/// Starting configuration; both variants give `Σw = N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCondition {
    /// Every agent starts at 1.
    #[default]
    Equal,
    /// Uniform(0, 2) draws rescaled to total N.
    Uniform,
}

impl FirmVector {
    pub fn from_sizes(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::invalid_arg("firm vector must contain at least one agent"));
        }
        if let Some(i) = w.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid_state(format!("size {} at index {i} is negative or not finite", w[i])));
        }
        Ok(Self { w, t: 0 })
    }

    /// `n` agents of size 1.
    pub fn equal(n: usize) -> Result<Self> {
        Self::from_sizes(vec![1.0; n])
    }

    pub fn initial(n: usize, init: InitialCondition, rng: &mut RngStream) -> Result<Self> {
        match init {
            InitialCondition::Equal => Self::equal(n),
            InitialCondition::Uniform => {
                let mut w: Vec<f64> = (0..n).map(|_| 2.0 * rng.uniform()).collect();
                let scale = n as f64 / w.iter().sum::<f64>();
                w.iter_mut().for_each(|x| *x *= scale);
                Self::from_sizes(w)
            }
        }
    }

    pub fn sizes(&self) -> &[f64] {
        &self.w
    }

    pub(crate) fn sizes_mut(&mut self) -> &mut [f64] {
        &mut self.w
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub(crate) fn advance(&mut self) {
        self.t += 1;
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.w.len() as f64
    }

    pub fn into_sizes(self) -> Vec<f64> {
        self.w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_conditions_conserve_total() {
        let mut rng = RngStream::new(1);
        for init in [InitialCondition::Equal, InitialCondition::Uniform] {
            let s = FirmVector::initial(1000, init, &mut rng).unwrap();
            assert!((s.total() - 1000.0).abs() < 1e-9);
            assert_eq!(s.time(), 0);
        }
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(FirmVector::from_sizes(vec![1.0, -0.1]).is_err());
        assert!(FirmVector::from_sizes(vec![f64::NAN]).is_err());
        assert!(FirmVector::from_sizes(vec![]).is_err());
    }
}
