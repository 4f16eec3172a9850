use leakaudit::experiment::{run_setup, run_setups, RunConfig, Setup};
use leakaudit::model::{predict_proba, train_forest, ForestConfig};
use leakaudit::resampling::synthetic_count;
use leakaudit::synth::{generate_cohort, SynthConfig};
use leakaudit::tabular::{Column, Dataset};

fn quick(seed: u64) -> RunConfig {
    RunConfig {
        forest: ForestConfig {
            n_trees: 25,
            ..ForestConfig::default()
        },
        master_seed: seed,
        ..RunConfig::default()
    }
}

#[test]
fn no_signal_gives_chance_auroc() {
    let mut means = Vec::new();
    for seed in 0..20 {
        let ds = generate_cohort(&SynthConfig {
            signal_strength: 0.0,
            seed,
            ..SynthConfig::default()
        })
        .unwrap();
        let r = run_setup(&ds, &quick(seed)).unwrap();
        means.push(r.mean_auroc);
    }
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    assert!(
        (mean - 0.5).abs() <= 0.15,
        "mean AUROC {mean} over {means:?}"
    );
}

#[test]
fn leaking_never_scores_lower() {
    let mut strict = 0;
    for seed in 0..5 {
        let ds = generate_cohort(&SynthConfig {
            seed: 50 + seed,
            ..SynthConfig::default()
        })
        .unwrap();
        let r = run_setups(
            &ds,
            &quick(seed),
            &[Setup::AfterPartitioning, Setup::BeforePartitioning],
        )
        .unwrap();
        assert!(r[1].mean_auroc >= r[0].mean_auroc, "seed {seed}");
        strict += usize::from(r[1].mean_auroc > r[0].mean_auroc);
    }
    assert!(strict >= 4, "strict gap in {strict}/5 seeds");
}

#[test]
fn leaky_runs_flag_whenever_rows_are_generated() {
    for seed in 0..6 {
        let ds = generate_cohort(&SynthConfig {
            n_total: 60,
            n_minority: 6 + seed as usize,
            seed,
            ..SynthConfig::default()
        })
        .unwrap();
        let [neg, pos] = ds.class_counts(&ds.all_rows());
        let g = synthetic_count(neg.max(pos), neg.min(pos), 1.0);
        for setup in [Setup::BeforePartitioning, Setup::LeakyHoldout] {
            let r = run_setup(&ds, &quick(seed).with_setup(setup)).unwrap();
            assert_eq!(r.synthetic_rows, g);
            assert!(g == 0 || r.flagged_folds() >= 1, "{setup} seed {seed}");
        }
    }
}

#[test]
fn partitioned_setups_share_folds_and_evaluate_originals_only() {
    let ds = generate_cohort(&SynthConfig::default()).unwrap();
    let r = run_setups(
        &ds,
        &quick(3),
        &[Setup::AfterPartitioning, Setup::NoOversampling],
    )
    .unwrap();
    for report in &r {
        assert_eq!(report.flagged_folds(), 0);
        for f in &report.folds {
            assert_eq!(f.contamination.synthetic_rows_in_eval, 0);
        }
    }
    let sizes =
        |i: usize| -> Vec<usize> { r[i].folds.iter().map(|f| f.confusion.total()).collect() };
    assert_eq!(sizes(0), sizes(1));
    assert_eq!(r[1].synthetic_rows, 0);
    assert!(r[0].synthetic_rows > 0);
}

/// Every tree sees every row (no bootstrap), so every evaluated row was
/// routed during growth and midpoint placement cannot matter.
#[test]
fn monotone_feature_transform_keeps_training_scores() {
    let n = 40;
    let xs: Vec<f64> = (0..n).map(|i| ((i * 17) % n) as f64 * 0.25 - 3.0).collect();
    let zs: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64).collect();
    let ys: Vec<u8> = xs.iter().map(|&x| u8::from(x.sin() > 0.2)).collect();
    let make = |f: &dyn Fn(f64) -> f64| {
        let cells = xs.iter().zip(&zs).flat_map(|(&x, &z)| [f(x), z]).collect();
        Dataset::new(
            vec![Column::numeric("x"), Column::numeric("z")],
            cells,
            ys.clone(),
        )
        .unwrap()
    };
    let raw = make(&|x| x);
    let squashed = make(&|x| (x / 2.0).exp());
    let cfg = ForestConfig {
        n_trees: 30,
        mtry: Some(1),
        bootstrap: false,
        seed: 11,
        ..ForestConfig::default()
    };
    let rows = raw.all_rows();
    let a = predict_proba(&train_forest(&raw, &rows, &cfg).unwrap(), &raw, &rows).unwrap();
    let b = predict_proba(
        &train_forest(&squashed, &rows, &cfg).unwrap(),
        &squashed,
        &rows,
    )
    .unwrap();
    assert_eq!(a, b);
}

#[test]
fn training_ignores_evaluation_rows() {
    let ds = generate_cohort(&SynthConfig {
        missing_rate: 0.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let train: Vec<usize> = (0..80).collect();
    let cfg = ForestConfig {
        n_trees: 20,
        seed: 4,
        ..ForestConfig::default()
    };
    let model = train_forest(&ds, &train, &cfg).unwrap();
    let test: Vec<usize> = (80..ds.n_rows()).collect();
    let once = predict_proba(&model, &ds, &test).unwrap();
    let reversed: Vec<usize> = test.iter().rev().copied().collect();
    let mut again = predict_proba(&model, &ds, &reversed).unwrap();
    again.reverse();
    assert_eq!(once, again);
    let retrained = train_forest(&ds.select_rows(&train), &train, &cfg).unwrap();
    assert_eq!(predict_proba(&retrained, &ds, &test).unwrap(), once);
}
