use std::sync::Arc;

use crate::error::{Error, Result};

/// Maps an agent's current size to the fraction of it retained in an exchange.
#[derive(Clone, Debug, PartialEq)]
pub enum RetentionRule {
    /// `λ(w) = lambda` for every agent.
    Constant { lambda: f64 },
    /// `λ(w) = c1 (1 - exp(-c2 w))`.
    ExpSaturating { c1: f64, c2: f64 },
    /// `λ(w) = c1 + (1 - 2 c1) / (1 + exp(-(w - mean_w) / c2))`, with `c1 < 1/2`.
    Sigmoid { c1: f64, c2: f64, mean_w: f64 },
    /// Exp-saturating with a frozen per-agent `c1`.
    QuenchedExpSaturating { c1: Arc<[f64]>, c2: f64 },
}

impl RetentionRule {
    pub fn constant(lambda: f64) -> Result<Self> {
        let r = RetentionRule::Constant { lambda };
        r.validate()?;
        Ok(r)
    }

    pub fn exp_saturating(c1: f64, c2: f64) -> Result<Self> {
        let r = RetentionRule::ExpSaturating { c1, c2 };
        r.validate()?;
        Ok(r)
    }

    pub fn sigmoid(c1: f64, c2: f64, mean_w: f64) -> Result<Self> {
        let r = RetentionRule::Sigmoid { c1, c2, mean_w };
        r.validate()?;
        Ok(r)
    }

    pub fn quenched(c1: impl Into<Arc<[f64]>>, c2: f64) -> Result<Self> {
        let r = RetentionRule::QuenchedExpSaturating { c1: c1.into(), c2 };
        r.validate()?;
        Ok(r)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            RetentionRule::Constant { .. } => "constant",
            RetentionRule::ExpSaturating { .. } => "exp-saturating",
            RetentionRule::Sigmoid { .. } => "sigmoid",
            RetentionRule::QuenchedExpSaturating { .. } => "quenched-exp-saturating",
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn unit(name: &str, v: f64) -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid_arg(format!("{name} = {v} must lie in [0, 1]")))
            }
        }
        match self {
            RetentionRule::Constant { lambda } => unit("lambda", *lambda),
            RetentionRule::ExpSaturating { c1, c2 } => {
                unit("c1", *c1)?;
                if !(*c2 >= 0.0) || c2.is_infinite() {
                    return Err(Error::invalid_arg(format!("c2 = {c2} must be finite and >= 0")));
                }
                Ok(())
            }
            RetentionRule::Sigmoid { c1, c2, mean_w } => {
                if !(0.0..0.5).contains(c1) {
                    return Err(Error::invalid_arg(format!(
                        "sigmoid rule requires 0 <= c1 < 1/2, got c1 = {c1}"
                    )));
                }
                if !(*c2 > 0.0) || c2.is_infinite() {
                    return Err(Error::invalid_arg(format!("c2 = {c2} must be finite and > 0")));
                }
                if !mean_w.is_finite() {
                    return Err(Error::invalid_arg("mean_w must be finite"));
                }
                Ok(())
            }
            RetentionRule::QuenchedExpSaturating { c1, c2 } => {
                for (i, v) in c1.iter().enumerate() {
                    unit(&format!("c1[{i}]"), *v)?;
                }
                if !(*c2 >= 0.0) || c2.is_infinite() {
                    return Err(Error::invalid_arg(format!("c2 = {c2} must be finite and >= 0")));
                }
                Ok(())
            }
        }
    }

    /// Number of agents the rule is bound to, if any.
    pub fn agent_count(&self) -> Option<usize> {
        match self {
            RetentionRule::QuenchedExpSaturating { c1, .. } => Some(c1.len()),
            _ => None,
        }
    }

    /// Retention rate without input checks. `w` must be a non-negative number
    /// and `agent` in range for quenched rules.
    #[inline]
    pub fn lambda(&self, w: f64, agent: usize) -> f64 {
        match self {
            RetentionRule::Constant { lambda } => *lambda,
            RetentionRule::ExpSaturating { c1, c2 } => -c1 * (-c2 * w).exp_m1(),
            RetentionRule::Sigmoid { c1, c2, mean_w } => {
                // logistic(x) = (1 + tanh(x / 2)) / 2, exact at the midpoint
                0.5 + (0.5 - c1) * ((w - mean_w) / (2.0 * c2)).tanh()
            }
            RetentionRule::QuenchedExpSaturating { c1, c2 } => -c1[agent] * (-c2 * w).exp_m1(),
        }
    }

    /// Checked retention rate for agent `agent` holding `w`.
    pub fn eval(&self, w: f64, agent: usize) -> Result<f64> {
        if !(w >= 0.0) {
            return Err(Error::invalid_state(format!("size w = {w} of agent {agent} is negative or NaN")));
        }
        if let Some(n) = self.agent_count() {
            if agent >= n {
                return Err(Error::invalid_arg(format!(
                    "agent index {agent} out of range for {n} quenched parameters"
                )));
            }
        }
        Ok(self.lambda(w, agent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_saturating_zero_at_origin() {
        for (c1, c2) in [(0.95, 3.0), (0.3, 0.1), (1.0, 100.0)] {
            let r = RetentionRule::exp_saturating(c1, c2).unwrap();
            assert_eq!(r.eval(0.0, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn exp_saturating_reference_value() {
        // 0.95 * (1 - e^-3), evaluated to 30 digits with mpmath.
        let r = RetentionRule::exp_saturating(0.95, 3.0).unwrap();
        let expected = 0.902_702_285_050_529_3;
        assert!((r.eval(1.0, 0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn sigmoid_half_at_mean() {
        for c1 in [0.0, 0.1, 0.3, 0.49] {
            for c2 in [1e-6, 0.5, 3.0, 1e6] {
                let r = RetentionRule::sigmoid(c1, c2, 1.0).unwrap();
                assert_eq!(r.eval(1.0, 0).unwrap(), 0.5);
            }
        }
    }

    #[test]
    fn sigmoid_limits() {
        let flat = RetentionRule::sigmoid(0.3, 1e9, 1.0).unwrap();
        let step = RetentionRule::sigmoid(0.3, 1e-6, 1.0).unwrap();
        for w in [0.0, 0.2, 0.9, 1.1, 3.0, 50.0] {
            assert!((flat.eval(w, 0).unwrap() - 0.5).abs() < 1e-6);
            let expect = if w < 1.0 { 0.3 } else { 0.7 };
            assert!((step.eval(w, 0).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn large_c2_recovers_constant() {
        let r = RetentionRule::exp_saturating(0.7, 1e6).unwrap();
        for w in [0.01, 0.5, 1.0, 10.0] {
            assert!((r.eval(w, 0).unwrap() - 0.7).abs() / 0.7 < 1e-6);
        }
    }

    #[test]
    fn quenched_uses_agent_parameter() {
        let r = RetentionRule::quenched(vec![0.2, 0.8], 1e6).unwrap();
        assert!((r.eval(1.0, 0).unwrap() - 0.2).abs() < 1e-12);
        assert!((r.eval(1.0, 1).unwrap() - 0.8).abs() < 1e-12);
        assert!(r.eval(1.0, 2).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let r = RetentionRule::exp_saturating(0.5, 1.0).unwrap();
        assert!(matches!(r.eval(-1.0, 0), Err(Error::InvalidState(_))));
        assert!(matches!(r.eval(f64::NAN, 0), Err(Error::InvalidState(_))));
        assert!(RetentionRule::sigmoid(0.6, 1.0, 1.0).is_err());
        assert!(RetentionRule::sigmoid(0.5, 1.0, 1.0).is_err());
        assert!(RetentionRule::sigmoid(0.3, 0.0, 1.0).is_err());
        assert!(RetentionRule::exp_saturating(1.2, 1.0).is_err());
        assert!(RetentionRule::exp_saturating(0.5, -1.0).is_err());
        assert!(RetentionRule::constant(-0.1).is_err());
        assert!(RetentionRule::quenched(vec![0.5, 1.5], 1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn exp_saturating_bounded_and_monotone(
                c1 in 0.0f64..=1.0, c2 in 0.0f64..100.0, a in 0.0f64..50.0, b in 0.0f64..50.0
            ) {
                let r = RetentionRule::exp_saturating(c1, c2).unwrap();
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let (la, lb) = (r.eval(lo, 0).unwrap(), r.eval(hi, 0).unwrap());
                prop_assert!((0.0..=c1).contains(&la) && (0.0..=c1).contains(&lb));
                prop_assert!(la <= lb);
            }

            #[test]
            fn sigmoid_bounded_and_monotone(
                c1 in 0.0f64..0.499, c2 in 1e-3f64..100.0, a in 0.0f64..20.0, b in 0.0f64..20.0
            ) {
                let r = RetentionRule::sigmoid(c1, c2, 1.0).unwrap();
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let (la, lb) = (r.eval(lo, 0).unwrap(), r.eval(hi, 0).unwrap());
                prop_assert!(la >= c1 - 1e-15 && lb <= 1.0 - c1 + 1e-15);
                prop_assert!(la <= lb);
            }
        }
    }
}
