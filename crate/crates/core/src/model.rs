//! Random-forest probability classifier and the majority-class baseline.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};
use crate::tabular::{Column, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows trees until purity or `min_leaf`.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Candidate columns per node; `None` means `floor(sqrt(p))`.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            mtry: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.min_leaf < 1 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        if self.mtry == Some(0) {
            return Err(Error::Config("mtry must be at least 1".into()));
        }
        Ok(())
    }

    fn candidates(&self, p: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| (p as f64).sqrt().floor() as usize)
            .clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        column: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        positive_fraction: f64,
    },
}

/// Axis-aligned binary tree stored as a flat node arena; node 0 is the root.
/// Rows with `value <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { positive_fraction } => return positive_fraction,
                Node::Split {
                    column,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[column] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub columns: Vec<Column>,
}

struct Split {
    column: usize,
    threshold: f64,
    impurity: f64,
}

struct Grower<'a> {
    ds: &'a Dataset,
    cfg: &'a ForestConfig,
    mtry: usize,
    nodes: Vec<Node>,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl Grower<'_> {
    fn positives(&self, sample: &[usize]) -> usize {
        sample.iter().filter(|&&r| self.ds.labels()[r] == 1).count()
    }

    /// Best Gini split on one column, scanning midpoints between
    /// consecutive distinct values.
    fn best_on_column(&self, sample: &[usize], column: usize, total_pos: usize) -> Option<Split> {
        let mut sorted: Vec<(f64, u8)> = sample
            .iter()
            .map(|&r| (self.ds.value(r, column), self.ds.labels()[r]))
            .collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = sorted.len();
        let min_leaf = self.cfg.min_leaf;
        let mut best: Option<Split> = None;
        let mut left_pos = 0usize;
        for i in 0..n - 1 {
            left_pos += sorted[i].1 as usize;
            let left_n = i + 1;
            if sorted[i].0 == sorted[i + 1].0 || left_n < min_leaf || n - left_n < min_leaf {
                continue;
            }
            let right_n = n - left_n;
            let impurity = (left_n as f64 * gini(left_pos, left_n)
                + right_n as f64 * gini(total_pos - left_pos, right_n))
                / n as f64;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
                let mid = lo + (hi - lo) / 2.0;
                // adjacent floats: keep `hi` on the right
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Split {
                    column,
                    threshold,
                    impurity,
                });
            }
        }
        best
    }

    fn grow(&mut self, sample: Vec<usize>, depth: usize, rng: &mut impl Rng) -> usize {
        let id = self.nodes.len();
        let n = sample.len();
        let pos = self.positives(&sample);
        self.nodes.push(Node::Leaf {
            positive_fraction: pos as f64 / n as f64,
        });
        let pure = pos == 0 || pos == n;
        let depth_capped = self.cfg.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || n < 2 * self.cfg.min_leaf {
            return id;
        }

        // Columns are visited in a random order; the search stops after
        // `mtry` columns once some valid split exists, otherwise it keeps
        // drawing until one is found or all columns are exhausted.
        let mut order: Vec<usize> = (0..self.ds.n_cols()).collect();
        order.shuffle(rng);
        let mut best: Option<Split> = None;
        for (visited, &column) in order.iter().enumerate() {
            if visited >= self.mtry && best.is_some() {
                break;
            }
            if let Some(s) = self.best_on_column(&sample, column, pos) {
                if best.as_ref().is_none_or(|b| s.impurity < b.impurity) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else {
            return id;
        };

        let (left, right): (Vec<usize>, Vec<usize>) = sample
            .into_iter()
            .partition(|&r| self.ds.value(r, split.column) <= split.threshold);
        let left_id = self.grow(left, depth + 1, rng);
        let right_id = self.grow(right, depth + 1, rng);
        self.nodes[id] = Node::Split {
            column: split.column,
            threshold: split.threshold,
            left: left_id,
            right: right_id,
        };
        id
    }
}

fn grow_tree(ds: &Dataset, rows: &[usize], cfg: &ForestConfig, seed: u64) -> Tree {
    let mut rng = rng_from_seed(seed);
    let sample: Vec<usize> = if cfg.bootstrap {
        (0..rows.len())
            .map(|_| rows[rng.random_range(0..rows.len())])
            .collect()
    } else {
        rows.to_vec()
    };
    let mut grower = Grower {
        ds,
        cfg,
        mtry: cfg.candidates(ds.n_cols()),
        nodes: Vec::new(),
    };
    grower.grow(sample, 0, &mut rng);
    Tree {
        nodes: grower.nodes,
    }
}

/// Trains a forest on `rows`. Tree `t` draws from its own stream derived
/// from `(cfg.seed, t)`, so trees can be grown in any order.
pub fn train_forest(ds: &Dataset, rows: &[usize], cfg: &ForestConfig) -> Result<ForestModel> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(Error::Dataset("cannot train on zero rows".into()));
    }
    if ds.n_cols() == 0 {
        return Err(Error::Dataset(
            "cannot train without feature columns".into(),
        ));
    }
    ds.require_complete(rows)?;
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(ds, rows, cfg, derive_seed(cfg.seed, "tree", t as u64)))
        .collect();
    Ok(ForestModel {
        trees,
        columns: ds.columns().to_vec(),
    })
}

/// Mean leaf positive-fraction across trees for each of `rows`.
pub fn predict_proba(model: &ForestModel, ds: &Dataset, rows: &[usize]) -> Result<Vec<f64>> {
    if !ds.same_schema(&model.columns) {
        return Err(Error::SchemaMismatch(
            "forest was trained on a different column layout".into(),
        ));
    }
    ds.require_complete(rows)?;
    let n_trees = model.trees.len() as f64;
    Ok(rows
        .iter()
        .map(|&r| {
            let x = ds.row(r);
            model.trees.iter().map(|t| t.leaf_value(x)).sum::<f64>() / n_trees
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorityBaseline {
    pub predicted_class: u8,
    pub accuracy: f64,
}

/// Always-predict-the-modal-class classifier; ties go to class 0.
pub fn majority_baseline(labels: &[u8]) -> Result<MajorityBaseline> {
    if labels.is_empty() {
        return Err(Error::Dataset("majority baseline needs labels".into()));
    }
    let ones = labels.iter().filter(|&&l| l == 1).count();
    let zeros = labels.len() - ones;
    let (predicted_class, hits) = if ones > zeros { (1, ones) } else { (0, zeros) };
    Ok(MajorityBaseline {
        predicted_class,
        accuracy: hits as f64 / labels.len() as f64,
    })
}
