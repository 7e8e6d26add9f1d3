//! Checks which quantity is constant across retention-rate classes in a
//! quenched-heterogeneity run: `λ·⟨w⟩` or `(1 − λ)·⟨w⟩`.

use serde::Serialize;

use crate::error::{Error, Result};

const DECILES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanfieldRow {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub agents: usize,
    pub mean_lambda: f64,
    pub mean_w: f64,
    /// Decile average of per-agent `λ̄_i w̄_i`.
    pub lambda_w: f64,
    /// Decile average of per-agent `(1 − λ̄_i) w̄_i`.
    pub release_w: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanfieldColumn {
    LambdaW,
    ReleaseW,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanfieldTable {
    pub rows: Vec<MeanfieldRow>,
}

impl MeanfieldTable {
    /// Coefficients of variation of `(λ w, (1 − λ) w)` across rows, skipping
    /// the first `skip` (lowest-λ) rows.
    pub fn coefficients_of_variation(&self, skip: usize) -> (f64, f64) {
        let rows = &self.rows[skip.min(self.rows.len().saturating_sub(1))..];
        let cv = |f: fn(&MeanfieldRow) -> f64| {
            let v: Vec<f64> = rows.iter().map(f).collect();
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            if mean == 0.0 {
                0.0
            } else {
                var.sqrt() / mean.abs()
            }
        };
        (cv(|r| r.lambda_w), cv(|r| r.release_w))
    }

    /// Column with the smaller coefficient of variation.
    pub fn flatter(&self, skip: usize) -> (MeanfieldColumn, f64) {
        let (a, b) = self.coefficients_of_variation(skip);
        if a <= b {
            (MeanfieldColumn::LambdaW, a)
        } else {
            (MeanfieldColumn::ReleaseW, b)
        }
    }
}

/// Bins agents into λ deciles from `(λ̄_i, w̄_i)` pairs.
///
/// All-equal λ collapses to a single row. Otherwise at least ten distinct λ
/// values are needed.
pub fn meanfield_diagnostic(agents: &[(f64, f64)]) -> Result<MeanfieldTable> {
    if let Some(i) = agents.iter().position(|(l, w)| !l.is_finite() || !w.is_finite()) {
        return Err(Error::NotANumber(i));
    }
    let mut sorted = agents.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut distinct = sorted.iter().map(|p| p.0).collect::<Vec<_>>();
    distinct.dedup();
    let groups: Vec<&[(f64, f64)]> = match distinct.len() {
        0 => return Err(Error::InsufficientData { count: 0, required: DECILES }),
        1 => vec![&sorted[..]],
        d if d < DECILES => {
            return Err(Error::InsufficientData {
                count: d,
                required: DECILES,
            })
        }
        _ => {
            let n = sorted.len();
            (0..DECILES)
                .map(|k| &sorted[k * n / DECILES..(k + 1) * n / DECILES])
                .filter(|g| !g.is_empty())
                .collect()
        }
    };
    let rows = groups
        .into_iter()
        .map(|g| {
            let m = g.len() as f64;
            MeanfieldRow {
                lambda_lo: g[0].0,
                lambda_hi: g[g.len() - 1].0,
                agents: g.len(),
                mean_lambda: g.iter().map(|p| p.0).sum::<f64>() / m,
                mean_w: g.iter().map(|p| p.1).sum::<f64>() / m,
                lambda_w: g.iter().map(|p| p.0 * p.1).sum::<f64>() / m,
                release_w: g.iter().map(|p| (1.0 - p.0) * p.1).sum::<f64>() / m,
            }
        })
        .collect();
    Ok(MeanfieldTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_lambda_is_constant() {
        let agents: Vec<(f64, f64)> = (0..100).map(|_| (0.4, 1.0)).collect();
        let t = meanfield_diagnostic(&agents).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.coefficients_of_variation(0), (0.0, 0.0));
    }

    #[test]
    fn release_constant_population() {
        // w = C / (1 - λ) exactly: (1 - λ) w is flat, λ w is not
        let agents: Vec<(f64, f64)> = (0..1000)
            .map(|i| {
                let l = i as f64 / 1000.0 * 0.98;
                (l, 0.2 / (1.0 - l))
            })
            .collect();
        let t = meanfield_diagnostic(&agents).unwrap();
        assert_eq!(t.rows.len(), 10);
        let (col, cv) = t.flatter(1);
        assert_eq!(col, MeanfieldColumn::ReleaseW);
        assert!(cv < 1e-12);
        assert!(t.rows.windows(2).all(|r| r[1].mean_w >= r[0].mean_w));
    }

    #[test]
    fn too_few_distinct_values() {
        let agents: Vec<(f64, f64)> = (0..100).map(|i| ((i % 5) as f64 / 10.0, 1.0)).collect();
        assert!(matches!(
            meanfield_diagnostic(&agents),
            Err(Error::InsufficientData { count: 5, required: 10 })
        ));
    }
}
