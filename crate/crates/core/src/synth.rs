//! Synthetic stand-in cohorts with controlled imbalance, signal and
//! missingness.
//!
//! Informative columns are taken from the numeric block first, then the
//! binary block. Informative numeric features are unit-variance Gaussians
//! centred at 0 (negatives) or `signal_strength` (positives); informative
//! binary features are Bernoulli(0.3) vs Bernoulli(min(0.9, 0.3 + 0.2 s)).
//! Uninformative columns follow the negative-class law for every row.
//! Missingness is MCAR on numeric cells only.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};
use crate::tabular::{Column, Dataset, MISSING};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_total: usize,
    pub n_minority: usize,
    pub n_binary_features: usize,
    pub n_numeric_features: usize,
    pub signal_strength: f64,
    pub n_informative: usize,
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_total: 112,
            n_minority: 10,
            n_binary_features: 8,
            n_numeric_features: 12,
            signal_strength: 1.0,
            n_informative: 6,
            missing_rate: 0.1,
            seed: 0,
        }
    }
}

const BINARY_BASE_RATE: f64 = 0.3;

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_minority == 0 || self.n_minority >= self.n_total {
            return Err(Error::Config(format!(
                "need 0 < n_minority ({}) < n_total ({})",
                self.n_minority, self.n_total
            )));
        }
        let p = self.n_binary_features + self.n_numeric_features;
        if p == 0 {
            return Err(Error::Config("need at least one feature".into()));
        }
        if self.n_informative > p {
            return Err(Error::Config(format!(
                "n_informative ({}) exceeds feature count ({p})",
                self.n_informative
            )));
        }
        if !self.signal_strength.is_finite() || self.signal_strength < 0.0 {
            return Err(Error::Config(
                "signal_strength must be finite and >= 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(Error::Config(format!(
                "missing_rate {} outside [0, 1)",
                self.missing_rate
            )));
        }
        Ok(())
    }

    fn positive_binary_rate(&self) -> f64 {
        (BINARY_BASE_RATE + 0.2 * self.signal_strength).min(0.9)
    }
}

pub fn generate_cohort(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let n = cfg.n_total;
    let (nb, nn) = (cfg.n_binary_features, cfg.n_numeric_features);
    let informative_numeric = cfg.n_informative.min(nn);
    let informative_binary = cfg.n_informative - informative_numeric;

    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < cfg.n_minority)).collect();
    labels.shuffle(&mut rng_from_seed(derive_seed(cfg.seed, "synth-labels", 0)));

    let mut columns = Vec::with_capacity(nb + nn);
    columns.extend((0..nn).map(|j| Column::numeric(format!("num_{j:02}"))));
    columns.extend((0..nb).map(|j| Column::binary(format!("bin_{j:02}"))));

    let mut values = rng_from_seed(derive_seed(cfg.seed, "synth-values", 0));
    let mut holes = rng_from_seed(derive_seed(cfg.seed, "synth-missing", 0));
    let p_pos = cfg.positive_binary_rate();
    let mut x = Vec::with_capacity(n * (nb + nn));
    for &y in &labels {
        for j in 0..nn {
            let z: f64 = StandardNormal.sample(&mut values);
            let shift = if j < informative_numeric && y == 1 {
                cfg.signal_strength
            } else {
                0.0
            };
            // drawn unconditionally so the missingness stream is independent
            let drop = holes.random::<f64>() < cfg.missing_rate;
            x.push(if drop { MISSING } else { z + shift });
        }
        for j in 0..nb {
            let rate = if j < informative_binary && y == 1 {
                p_pos
            } else {
                BINARY_BASE_RATE
            };
            x.push(f64::from(u8::from(values.random::<f64>() < rate)));
        }
    }

    let mut ds = Dataset::new(columns, x, labels)?;
    ds.meta.insert("source".into(), "synthetic".into());
    ds.meta.insert("seed".into(), cfg.seed.to_string());
    ds.meta
        .insert("signal_strength".into(), cfg.signal_strength.to_string());
    ds.meta
        .insert("missing_rate".into(), cfg.missing_rate.to_string());
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{is_missing, ColumnKind};

    #[test]
    fn default_shape() {
        let ds = generate_cohort(&SynthConfig::default()).unwrap();
        assert_eq!(ds.n_rows(), 112);
        assert_eq!(ds.class_counts(&ds.all_rows()), [102, 10]);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = SynthConfig {
            seed: 99,
            ..SynthConfig::default()
        };
        let a = generate_cohort(&cfg).unwrap();
        let b = generate_cohort(&cfg).unwrap();
        for r in 0..a.n_rows() {
            let (ra, rb): (Vec<u64>, Vec<u64>) = (
                a.row(r).iter().map(|v| v.to_bits()).collect(),
                b.row(r).iter().map(|v| v.to_bits()).collect(),
            );
            assert_eq!(ra, rb);
        }
        assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn binary_cells_and_missingness_placement() {
        let ds = generate_cohort(&SynthConfig {
            missing_rate: 0.3,
            ..SynthConfig::default()
        })
        .unwrap();
        for (c, col) in ds.columns().iter().enumerate() {
            for r in 0..ds.n_rows() {
                let v = ds.value(r, c);
                match col.kind {
                    ColumnKind::Binary => assert!(v == 0.0 || v == 1.0),
                    ColumnKind::Numeric => assert!(is_missing(v) || v.is_finite()),
                }
            }
        }
        let none = generate_cohort(&SynthConfig {
            missing_rate: 0.0,
            ..SynthConfig::default()
        })
        .unwrap();
        assert_eq!(none.count_missing(), 0);
    }

    #[test]
    fn missing_fraction_within_three_standard_errors() {
        for &rate in &[0.05, 0.1, 0.4] {
            let cfg = SynthConfig {
                n_total: 400,
                n_minority: 40,
                missing_rate: rate,
                seed: 5,
                ..SynthConfig::default()
            };
            let ds = generate_cohort(&cfg).unwrap();
            let cells = (cfg.n_total * cfg.n_numeric_features) as f64;
            let observed = ds.count_missing() as f64 / cells;
            let se = (rate * (1.0 - rate) / cells).sqrt();
            assert!(
                (observed - rate).abs() <= 3.0 * se,
                "rate {rate}: {observed}"
            );
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = SynthConfig::default();
        for bad in [
            SynthConfig {
                n_minority: 0,
                ..base.clone()
            },
            SynthConfig {
                n_minority: 112,
                ..base.clone()
            },
            SynthConfig {
                n_informative: 21,
                ..base.clone()
            },
            SynthConfig {
                missing_rate: 1.0,
                ..base.clone()
            },
            SynthConfig {
                signal_strength: -1.0,
                ..base.clone()
            },
        ] {
            assert!(generate_cohort(&bad).is_err());
        }
    }
}
