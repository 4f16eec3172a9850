//! Fold planning, ranking metrics and the synthetic-contamination check.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::tabular::Provenance;

/// Stratified partition of row indices into `k` test folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl FoldPlan {
    pub fn test_rows(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// All rows outside `fold`, ascending.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }
}

fn class_members(labels: &[u8]) -> [Vec<usize>; 2] {
    let mut members = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        members[l as usize].push(i);
    }
    members
}

/// Shuffles each class with a seeded RNG, then deals its members round-robin
/// over the folds. The second class continues dealing where the first
/// stopped so fold sizes also stay within one of each other.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::Config(format!(
            "{k} folds requested for {} rows",
            labels.len()
        )));
    }
    let mut members = class_members(labels);
    if members.iter().any(Vec::is_empty) {
        return Err(Error::SingleClass);
    }
    let mut warnings = Vec::new();
    for (class, m) in members.iter().enumerate() {
        if m.len() < k {
            warnings.push(format!(
                "class {class} has {} members for {k} folds; some folds lack it and \
                 their AUROC is undefined",
                m.len()
            ));
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0usize;
    for m in members.iter_mut() {
        m.shuffle(&mut rng);
        for &row in m.iter() {
            folds[next % k].push(row);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan {
        k,
        folds,
        seed,
        warnings,
    })
}

/// Single stratified split; returns `(train, test)` with
/// `round(test_fraction * n_c)` test rows per class, at least one on each side
/// when the class has two or more members.
pub fn stratified_holdout(
    labels: &[u8],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "holdout test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let mut members = class_members(labels);
    if members.iter().any(Vec::is_empty) {
        return Err(Error::SingleClass);
    }
    let mut rng = rng_from_seed(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for m in members.iter_mut() {
        m.shuffle(&mut rng);
        let mut n_test = (test_fraction * m.len() as f64).round() as usize;
        if m.len() >= 2 {
            n_test = n_test.clamp(1, m.len() - 1);
        }
        test.extend_from_slice(&m[..n_test]);
        train.extend_from_slice(&m[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Mann-Whitney estimate of the area under the ROC curve: the fraction of
/// positive/negative pairs where the positive scores higher, ties counting
/// one half. Computed from mid-ranks.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(scores.len(), labels.len()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuroc);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // ranks are 1-based; doubled so tied groups stay integral
    let mut pos_rank_sum2 = 0u64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid_rank2 = (i + 1 + j + 1) as u64;
        let pos_in_group = order[i..=j].iter().filter(|&&r| labels[r] == 1).count() as u64;
        pos_rank_sum2 += mid_rank2 * pos_in_group;
        i = j + 1;
    }
    let (n_pos, n_neg) = (n_pos as u64, n_neg as u64);
    let u2 = pos_rank_sum2 - n_pos * (n_pos + 1);
    Ok(u2 as f64 / (2 * n_pos * n_neg) as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// A score at or above `threshold` is a positive prediction.
pub fn confusion_matrix(scores: &[f64], labels: &[u8], threshold: f64) -> Result<Confusion> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(scores.len(), labels.len()));
    }
    let mut c = Confusion::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContaminationReport {
    pub synthetic_rows_in_eval: usize,
    /// `[negatives, positives]`
    pub eval_class_counts: [usize; 2],
    pub original_class_counts: [usize; 2],
    pub flagged: bool,
}

/// Flags an evaluation set that holds generated rows, or holds more rows of
/// some class than the original dataset had.
pub fn contamination_check(
    provenance: &[Provenance],
    eval_labels: &[u8],
    original_class_counts: [usize; 2],
) -> ContaminationReport {
    let synthetic_rows_in_eval = provenance
        .iter()
        .filter(|p| **p == Provenance::Synthetic)
        .count();
    let mut eval_class_counts = [0usize; 2];
    for &l in eval_labels {
        eval_class_counts[l as usize] += 1;
    }
    let exceeds = eval_class_counts
        .iter()
        .zip(&original_class_counts)
        .any(|(e, o)| e > o);
    ContaminationReport {
        synthetic_rows_in_eval,
        eval_class_counts,
        original_class_counts,
        flagged: synthetic_rows_in_eval > 0 || exceeds,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdKind {
    /// n - 1 denominator
    #[default]
    Sample,
    /// n denominator
    Population,
}

/// Mean and standard deviation; a single value has std 0.
pub fn summarize(values: &[f64], kind: StdKind) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::EmptySummary);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok(Summary { mean, std: 0.0 });
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let denom = match kind {
        StdKind::Sample => n - 1.0,
        StdKind::Population => n,
    };
    Ok(Summary {
        mean,
        std: (ss / denom).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force_auroc(scores: &[f64], labels: &[u8]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li == 1 && lj == 0 {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc(&[0.9, 0.8, 0.3, 0.2], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.5, 0.5], &[1, 0]).unwrap(), 0.5);
        assert_eq!(auroc(&[0.8, 0.7, 0.6, 0.5], &[1, 0, 1, 0]).unwrap(), 0.75);
        assert_eq!(
            brute_force_auroc(&[0.8, 0.7, 0.6, 0.5], &[1, 0, 1, 0]),
            0.75
        );
        assert!(matches!(
            auroc(&[0.1, 0.2], &[1, 1]),
            Err(Error::UndefinedAuroc)
        ));
        assert!(matches!(
            auroc(&[0.1], &[1, 0]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn confusion_examples() {
        let c = confusion_matrix(&[0.9, 0.1], &[1, 0], 0.5).unwrap();
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (1, 0, 1, 0));
        let c = confusion_matrix(&[0.5], &[0], 0.5).unwrap();
        assert_eq!(c.fp, 1);
        let c = confusion_matrix(&[0.6, 0.6, 0.4], &[1, 0, 1], 0.5).unwrap();
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (1, 1, 0, 1));
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn contamination_examples() {
        let prov = vec![Provenance::Original; 20];
        let r = contamination_check(&prov, &[1; 20], [104, 15]);
        assert!(r.flagged);
        assert_eq!(r.eval_class_counts, [0, 20]);

        let r = contamination_check(&prov[..3], &[0, 1, 0], [104, 15]);
        assert!(!r.flagged);

        let mut prov = vec![Provenance::Original; 3];
        prov[1] = Provenance::Synthetic;
        let r = contamination_check(&prov, &[0, 1, 0], [104, 15]);
        assert!(r.flagged);
        assert_eq!(r.synthetic_rows_in_eval, 1);
    }

    #[test]
    fn summarize_examples() {
        let s = summarize(&[1.0, 1.0, 1.0], StdKind::Sample).unwrap();
        assert_eq!((s.mean, s.std), (1.0, 0.0));
        let s = summarize(&[0.8, 1.0], StdKind::Sample).unwrap();
        assert!((s.mean - 0.9).abs() < 1e-12);
        assert!((s.std - 0.02f64.sqrt()).abs() < 1e-12);
        assert!((s.std - 0.141421).abs() < 1e-6);
        let s = summarize(&[0.7], StdKind::Sample).unwrap();
        assert_eq!((s.mean, s.std), (0.7, 0.0));
        let s = summarize(&[0.8, 1.0], StdKind::Population).unwrap();
        assert!((s.std - 0.1).abs() < 1e-12);
        assert!(matches!(
            summarize(&[], StdKind::Sample),
            Err(Error::EmptySummary)
        ));
    }

    #[test]
    fn kfold_examples() {
        let mut labels = vec![1u8; 10];
        labels.extend(vec![0u8; 102]);
        let plan = stratified_kfold(&labels, 10, 42).unwrap();
        for f in &plan.folds {
            assert_eq!(f.iter().filter(|&&r| labels[r] == 1).count(), 1);
        }
        assert!(plan.warnings.is_empty());

        let plan = stratified_kfold(&[0, 1, 0, 1], 2, 0).unwrap();
        for f in &plan.folds {
            assert_eq!(f.len(), 2);
            assert_eq!(f.iter().filter(|&&r| r % 2 == 1).count(), 1);
        }

        assert!(stratified_kfold(&[0, 1, 0, 1], 13, 0).is_err());
        assert!(stratified_kfold(&[0, 1, 0, 1], 1, 0).is_err());
        assert!(stratified_kfold(&[0, 0, 0], 2, 0).is_err());
        let sparse = stratified_kfold(&[1, 0, 0, 0, 0, 0], 3, 0).unwrap();
        assert_eq!(sparse.warnings.len(), 1);
    }

    #[test]
    fn holdout_keeps_both_classes_on_both_sides() {
        let mut labels = vec![0u8; 20];
        labels.extend([1, 1, 1]);
        let (train, test) = stratified_holdout(&labels, 0.3, 9).unwrap();
        assert_eq!(train.len() + test.len(), 23);
        assert_eq!(test.iter().filter(|&&r| labels[r] == 1).count(), 1);
        assert_eq!(test.iter().filter(|&&r| labels[r] == 0).count(), 6);
        assert!(stratified_holdout(&labels, 1.0, 9).is_err());
    }

    fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
        (2usize..=12)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(0u8..6, n).prop_map(|v| {
                        v.into_iter()
                            .map(|s| f64::from(s) / 5.0)
                            .collect::<Vec<_>>()
                    }),
                    prop::collection::vec(0u8..=1, n),
                )
            })
            .prop_filter("both classes", |(_, l)| l.contains(&0) && l.contains(&1))
    }

    proptest! {
        #[test]
        fn auroc_matches_pair_counting((scores, labels) in scored_labels()) {
            let a = auroc(&scores, &labels).unwrap();
            prop_assert!((a - brute_force_auroc(&scores, &labels)).abs() <= 1e-12);
        }

        #[test]
        fn auroc_complement_under_label_flip((scores, labels) in scored_labels()) {
            let flipped: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
            let sum = auroc(&scores, &labels).unwrap() + auroc(&scores, &flipped).unwrap();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn auroc_invariant_under_increasing_transform((scores, labels) in scored_labels()) {
            let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
            prop_assert_eq!(auroc(&scores, &labels).unwrap(), auroc(&warped, &labels).unwrap());
        }

        #[test]
        fn kfold_is_a_balanced_partition(
            labels in prop::collection::vec(0u8..=1, 4..80),
            k in 2usize..12,
            seed in any::<u64>(),
        ) {
            prop_assume!(labels.contains(&0) && labels.contains(&1) && k <= labels.len());
            let plan = stratified_kfold(&labels, k, seed).unwrap();
            let mut seen = vec![0usize; labels.len()];
            for f in &plan.folds {
                for &r in f {
                    seen[r] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            for class in 0..=1u8 {
                let counts: Vec<usize> = plan
                    .folds
                    .iter()
                    .map(|f| f.iter().filter(|&&r| labels[r] == class).count())
                    .collect();
                let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
                prop_assert!(spread <= 1);
            }
            prop_assert_eq!(&plan, &stratified_kfold(&labels, k, seed).unwrap());
        }
    }
}
