mod common;

use casmi_core::baselines::{baseline_select, BaselineKind, PluginContext};
use casmi_core::estimators::sample_coverage;
use casmi_core::inference::test_independence;
use casmi_core::prep::{auto_bin, emit, ingest, IngestOptions};
use casmi_core::selector::{extend_with, select, stage2_greedy, SelectionConfig, StopReason};
use casmi_core::simlab::{
    generate_dataset, generate_replication, run_irr_experiment, true_distribution, IrrExperiment,
    Method,
};
use casmi_core::tabulate::tabulate;
use casmi_core::tabulate::{cross_tabulate, CategoricalColumn};
use casmi_core::Error;
use common::col_from_codes;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_codes(rng: &mut ChaCha8Rng, n: usize, k: u32) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

#[test]
fn copy_of_outcome_is_retained_and_selected_first() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = uniform_codes(&mut rng, 200, 3);
        let noise = uniform_codes(&mut rng, 200, 4);
        let feats = vec![col_from_codes("copy", &y), col_from_codes("noise", &noise)];
        let yc = col_from_codes("y", &y);
        let r = select(&feats, &yc, &SelectionConfig::default()).unwrap();
        assert!(r.retained.iter().any(|s| s.name == "copy"), "seed {seed}");
        assert_eq!(r.selected, vec!["copy".to_string()], "seed {seed}");

        let refs: Vec<&CategoricalColumn> = feats.iter().collect();
        let r = stage2_greedy(&refs, &yc, &SelectionConfig::default()).unwrap();
        assert_eq!(r.selected, vec!["copy".to_string()]);
        assert_eq!(r.stop_reason, StopReason::ScoreDrop);
        let last = r.score_trace.last().unwrap();
        assert!(!last.accepted && last.score <= r.final_score());
    }
}

#[test]
fn simulated_data_never_selects_irrelevant_features() {
    let irrelevant = ["X7", "X8", "X9", "X10"];
    for seed in 0..20u64 {
        let ds = generate_dataset(2000, seed).unwrap();
        let r = select(
            &ds.features(),
            ds.outcome().unwrap(),
            &SelectionConfig::default(),
        )
        .unwrap();
        assert!(!r.selected.is_empty());
        for name in &r.selected {
            assert!(
                !irrelevant.contains(&name.as_str()),
                "seed {seed}: {:?}",
                r.selected
            );
        }
    }
}

#[test]
fn id_column_is_never_selected() {
    for seed in 0..50u64 {
        let ds = generate_dataset(300, 1000 + seed).unwrap();
        let id = CategoricalColumn::from_labels("row_id", (0..300).map(|i| i.to_string())).unwrap();
        let ds = ds.with_column(id).unwrap();
        let r = select(
            &ds.features(),
            ds.outcome().unwrap(),
            &SelectionConfig::default(),
        )
        .unwrap();
        assert!(!r.selected.iter().any(|s| s == "row_id"), "seed {seed}");
    }
}

#[test]
fn generation_is_reproducible_and_replications_differ() {
    let a = generate_replication(100, 5, 3).unwrap();
    let b = generate_replication(100, 5, 3).unwrap();
    let c = generate_replication(100, 5, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    // X6 repeats X4 draw for draw.
    assert_eq!(
        a.column("X4").unwrap().codes(),
        a.column("X6").unwrap().codes()
    );
    assert_eq!(
        a.column("X4").unwrap().labels(),
        a.column("X6").unwrap().labels()
    );
}

#[test]
fn simulated_marginal_frequencies_match_exact_law() {
    let ds = generate_dataset(20_000, 11).unwrap();
    let x3 = ds.column("X3").unwrap();
    for label in ["-2", "-1", "0", "1", "2"] {
        let share = (0..x3.len()).filter(|&r| x3.row_label(r) == label).count() as f64 / 20_000.0;
        assert!((share - 0.2).abs() < 0.015, "{label}: {share}");
    }
    let x2 = ds.column("X2").unwrap();
    let share = (0..x2.len()).filter(|&r| x2.row_label(r) == "-5").count() as f64 / 20_000.0;
    assert!((share - (-2f64).exp()).abs() < 0.01);
}

#[test]
fn exact_distribution_is_normalized() {
    let full = true_distribution(&["X1", "X2", "X3", "X4", "X5"]).unwrap();
    assert!((full.total_probability() - 1.0).abs() < 1e-12);
    let with_noise = true_distribution(&["X3", "X9"]).unwrap();
    assert!((with_noise.total_probability() - 1.0).abs() < 1e-12);
    assert_eq!(with_noise.scope, vec!["X3", "X9"]);
    assert!(true_distribution(&["X11"]).is_err());
}

#[test]
fn mrmr_penalizes_duplicate() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 400;
    let a = uniform_codes(&mut rng, n, 3);
    let b = uniform_codes(&mut rng, n, 3);
    // y depends strongly on a, weakly on b.
    let y: Vec<u32> = (0..n)
        .map(|i| {
            let r: f64 = rng.random();
            if r < 0.6 {
                a[i]
            } else if r < 0.8 {
                b[i]
            } else {
                rng.random_range(0..3)
            }
        })
        .collect();
    let feats = vec![
        col_from_codes("A", &a),
        col_from_codes("dupA", &a),
        col_from_codes("B", &b),
    ];
    let yc = col_from_codes("y", &y);
    let picks = baseline_select(BaselineKind::Mrmr, &feats, &yc, 2).unwrap();
    assert_eq!(picks, vec!["A", "B"]);
    let ctx = PluginContext::new(&feats, &yc).unwrap();
    assert!(ctx.relevance(0) > ctx.relevance(2) && ctx.relevance(2) > 0.0);
}

#[test]
fn mim_full_ranking_matches_sorted_relevance() {
    let ds = generate_dataset(500, 9).unwrap();
    let feats = ds.features();
    let y = ds.outcome().unwrap();
    let ranking = baseline_select(BaselineKind::Mim, &feats, y, feats.len()).unwrap();
    let ctx = PluginContext::new(&feats, y).unwrap();
    let mut order: Vec<usize> = (0..feats.len()).collect();
    order.sort_by(|&i, &j| {
        ctx.relevance(j)
            .total_cmp(&ctx.relevance(i))
            .then(i.cmp(&j))
    });
    let expected: Vec<&str> = order.iter().map(|&i| feats[i].name()).collect();
    assert_eq!(ranking, expected);
}

#[test]
fn extension_appends_baseline_picks() {
    let ds = generate_dataset(400, 21).unwrap();
    let feats = ds.features();
    let y = ds.outcome().unwrap();
    let r = select(&feats, y, &SelectionConfig::default()).unwrap();
    let k = r.selected.len() + 2;
    let extended = extend_with(&r.selected, &feats, y, k, BaselineKind::Jmi).unwrap();
    assert_eq!(extended.len(), k);
    assert_eq!(&extended[..r.selected.len()], &r.selected[..]);
    let mut dedup = extended.clone();
    dedup.sort();
    dedup.dedup();
    assert_eq!(dedup.len(), k);
}

#[test]
fn power_increases_with_dependence() {
    let n = 200;
    let reps = 2000;
    let mut rates = Vec::new();
    for (i, rho) in [0.3, 0.6, 0.9].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(77 + i as u64);
        let mut rejections = 0;
        for _ in 0..reps {
            let x = uniform_codes(&mut rng, n, 4);
            let y: Vec<u32> = x
                .iter()
                .map(|&v| {
                    if rng.random::<f64>() < rho {
                        v
                    } else {
                        rng.random_range(0..4)
                    }
                })
                .collect();
            let ct = cross_tabulate(&col_from_codes("x", &x), &col_from_codes("y", &y)).unwrap();
            if test_independence(&ct, 0.10).unwrap().reject {
                rejections += 1;
            }
        }
        rates.push(rejections as f64 / reps as f64);
    }
    assert!(rates[0] <= rates[1] && rates[1] <= rates[2], "{rates:?}");
}

#[test]
fn emit_then_ingest_round_trips() {
    let ds = generate_dataset(60, 4).unwrap();
    let mut buf = Vec::new();
    emit(&ds, &mut buf, b',').unwrap();
    let opts = IngestOptions {
        all_categorical: true,
        ..Default::default()
    };
    let back = ingest(buf.as_slice(), Some("Y"), &opts).unwrap();
    assert_eq!(back.n_rows(), ds.n_rows());
    for c in ds.columns() {
        let d = back.column(c.name()).unwrap();
        for r in 0..ds.n_rows() {
            assert_eq!(c.row_label(r), d.row_label(r));
        }
    }
}

#[test]
fn auto_bin_reaches_target_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let values: Vec<Option<f64>> = (0..40).map(|_| Some(rng.random::<f64>() * 100.0)).collect();
    let col = auto_bin("v", &values, 40, 0.5).unwrap();
    assert!(sample_coverage(&tabulate(&col)) >= 0.5 || col.cardinality() == 2);
}

#[test]
fn experiment_rows_share_k_across_methods() {
    let exp = IrrExperiment {
        sizes: vec![120],
        reps: 6,
        seed: 3,
        ..Default::default()
    };
    let report = run_irr_experiment(&exp).unwrap();
    assert_eq!(report.rows.len(), 6 * 7);
    for rep in 0..6 {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.rep == rep).collect();
        let casmi = rows.iter().find(|r| r.method == Method::Casmi).unwrap();
        for r in &rows {
            assert_eq!(r.k, casmi.k);
            assert!((0.0..=1.0).contains(&r.irr));
        }
    }
    assert_eq!(report.aggregate.len(), 7);
    let again = run_irr_experiment(&IrrExperiment {
        workers: Some(1),
        ..exp
    })
    .unwrap();
    assert_eq!(report, again);
}

#[test]
fn constant_outcome_is_rejected() {
    let feats = vec![col_from_codes("a", &[0, 1, 0, 1])];
    let y = col_from_codes("y", &[2, 2, 2, 2]);
    assert!(matches!(
        select(&feats, &y, &SelectionConfig::default()),
        Err(Error::DegenerateOutcome)
    ));
}
