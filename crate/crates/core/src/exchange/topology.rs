use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How many agents take part in one exchange.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExchangeTopology {
    /// Pairwise trades, equivalent to `Nary(2)`.
    Binary,
    /// Random disjoint groups of `n` agents.
    Nary(usize),
    /// The whole population pools and redistributes at once.
    Global,
}

impl ExchangeTopology {
    /// Group size for a population of `n_agents`.
    pub fn group_size(&self, n_agents: usize) -> usize {
        match *self {
            ExchangeTopology::Binary => 2,
            ExchangeTopology::Nary(n) => n,
            ExchangeTopology::Global => n_agents,
        }
    }

    /// Checks `2 <= n <= N` (Global needs only `N >= 1`).
    pub fn validate(&self, n_agents: usize) -> Result<()> {
        if n_agents == 0 {
            return Err(Error::invalid_arg("population must contain at least one agent"));
        }
        if let ExchangeTopology::Global = self {
            return Ok(());
        }
        let n = self.group_size(n_agents);
        if n < 2 || n > n_agents {
            return Err(Error::invalid_arg(format!(
                "group size {n} must satisfy 2 <= n <= N = {n_agents}"
            )));
        }
        Ok(())
    }

    /// Group interactions per sweep, `ceil(N / n)`.
    pub fn steps_per_sweep(&self, n_agents: usize) -> usize {
        n_agents.div_ceil(self.group_size(n_agents).max(1))
    }
}

impl fmt::Display for ExchangeTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExchangeTopology::Binary => f.write_str("binary"),
            ExchangeTopology::Nary(n) => write!(f, "nary:{n}"),
            ExchangeTopology::Global => f.write_str("global"),
        }
    }
}

impl FromStr for ExchangeTopology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "binary" => Ok(ExchangeTopology::Binary),
            "global" => Ok(ExchangeTopology::Global),
            other => {
                let n = other
                    .strip_prefix("nary:")
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::config("topology", format!("expected binary, global or nary:<n>, got `{other}`"))
                    })?;
                Ok(ExchangeTopology::Nary(n))
            }
        }
    }
}

impl serde::Serialize for ExchangeTopology {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for ExchangeTopology {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
