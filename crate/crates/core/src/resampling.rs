//! ADASYN oversampling with exact synthetic-count accounting.
//!
//! Minority seeds that sit among many majority neighbours receive more
//! synthetic samples. Every generated row is tagged [`Provenance::Synthetic`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::tabular::{ColumnKind, Dataset, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdasynConfig {
    pub k_neighbors: usize,
    /// Desired balance level; 1.0 fully equalizes the classes.
    pub beta: f64,
    pub seed: u64,
}

impl Default for AdasynConfig {
    fn default() -> Self {
        AdasynConfig {
            k_neighbors: 5,
            beta: 1.0,
            seed: 0,
        }
    }
}

impl AdasynConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors < 1 {
            return Err(Error::Config("k_neighbors must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!("beta {} outside [0, 1]", self.beta)));
        }
        Ok(())
    }
}

/// Number of synthetic rows ADASYN adds for the given class sizes.
pub fn synthetic_count(majority: usize, minority: usize, beta: f64) -> usize {
    (beta * majority.saturating_sub(minority) as f64).round() as usize
}

/// Splits `total` into integer counts proportional to `weights`.
///
/// Each entry gets `floor(w * total)`; the leftover units go to the largest
/// fractional remainders, ties to the lower index.
pub fn allocate_counts(weights: &[f64], total: usize) -> Result<Vec<usize>> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| w.is_nan() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::UnnormalizedWeights(sum));
    }
    let mut counts = Vec::with_capacity(weights.len());
    let mut remainders = Vec::with_capacity(weights.len());
    for (i, w) in weights.iter().enumerate() {
        let exact = w * total as f64;
        let base = exact.floor();
        counts.push(base as usize);
        remainders.push((exact - base, i));
    }
    let assigned: usize = counts.iter().sum();
    let left = total.saturating_sub(assigned);
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(left) {
        counts[i] += 1;
    }
    Ok(counts)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` nearest rows to `query` among `candidates` (excluding `query`
/// itself), by Euclidean distance with ties to the lower row index.
pub(crate) fn nearest_neighbors(
    ds: &Dataset,
    query: usize,
    candidates: &[usize],
    k: usize,
) -> Vec<usize> {
    let q = ds.row(query);
    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .filter(|&&r| r != query)
        .map(|&r| (squared_distance(q, ds.row(r)), r))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(k);
    scored.into_iter().map(|(_, r)| r).collect()
}

/// Fraction of majority rows among each minority row's `k` nearest
/// neighbours within `rows`.
pub fn majority_ratios(ds: &Dataset, rows: &[usize], minority: &[usize], k: usize) -> Vec<f64> {
    let k = k.min(rows.len().saturating_sub(1));
    if k == 0 {
        return vec![0.0; minority.len()];
    }
    minority
        .iter()
        .map(|&i| {
            let own = ds.labels()[i];
            let majority = nearest_neighbors(ds, i, rows, k)
                .iter()
                .filter(|&&r| ds.labels()[r] != own)
                .count();
            majority as f64 / k as f64
        })
        .collect()
}

/// Oversamples the minority class of `rows`.
///
/// The output holds the selected rows in order followed by the synthetic
/// minority rows.
pub fn adasyn(ds: &Dataset, rows: &[usize], cfg: &AdasynConfig) -> Result<Dataset> {
    cfg.validate()?;
    ds.require_complete(rows)?;
    let counts = ds.class_counts(rows);
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::SingleClass);
    }
    let mut out = ds.select_rows(rows);
    // balanced input: nothing to generate
    if counts[0] == counts[1] {
        return Ok(out);
    }
    let minority_label: u8 = if counts[1] < counts[0] { 1 } else { 0 };
    let (m_s, m_l) = (
        counts[minority_label as usize],
        counts[1 - minority_label as usize],
    );
    let g = synthetic_count(m_l, m_s, cfg.beta);
    if g == 0 {
        return Ok(out);
    }

    let minority: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&r| ds.labels()[r] == minority_label)
        .collect();

    let ratios = majority_ratios(ds, rows, &minority, cfg.k_neighbors);
    let total: f64 = ratios.iter().sum();
    let weights: Vec<f64> = if total > 0.0 {
        ratios.iter().map(|r| r / total).collect()
    } else {
        vec![1.0 / minority.len() as f64; minority.len()]
    };
    let per_seed = allocate_counts(&weights, g)?;

    let k_min = cfg.k_neighbors.min(m_s - 1);
    let binary: Vec<bool> = ds
        .columns()
        .iter()
        .map(|c| c.kind == ColumnKind::Binary)
        .collect();
    let mut rng = rng_from_seed(cfg.seed);
    let mut synthetic = vec![0.0; ds.n_cols()];
    for (&seed_row, &n_new) in minority.iter().zip(&per_seed) {
        if n_new == 0 {
            continue;
        }
        let nn = nearest_neighbors(ds, seed_row, &minority, k_min);
        let base = ds.row(seed_row);
        for _ in 0..n_new {
            // a lone minority row has no partner and is duplicated
            let partner = if nn.is_empty() {
                base
            } else {
                ds.row(nn[rng.random_range(0..nn.len())])
            };
            let lambda: f64 = rng.random();
            for c in 0..base.len() {
                let v = base[c] + lambda * (partner[c] - base[c]);
                synthetic[c] = if binary[c] {
                    if v >= 0.5 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    v
                };
            }
            out.push_row(&synthetic, minority_label, Provenance::Synthetic);
        }
    }
    Ok(out)
}
