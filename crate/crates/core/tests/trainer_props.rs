#[path = "common/model_oracle.rs"]
mod oracle;
#[path = "common/synthetic.rs"]
mod synthetic;

use ladiff_core::model::{argmax, init_classifier_from_lm, init_model, LayerGroupedModel, ModelConfig, ModelKind, Targets};
use ladiff_core::trainer::*;
use proptest::prelude::*;

fn model_with_groups(num_groups: usize, seed: u64) -> LayerGroupedModel {
    let cfg = ModelConfig { num_recurrent_layers: num_groups - 2, ..oracle::tiny_config(seed) };
    init_model(&cfg, ModelKind::LanguageModel).unwrap()
}

fn small_opts() -> TrainOptions {
    TrainOptions { batch_size: 8, bptt: 10, ..TrainOptions::default() }
}

fn policy(total: usize, base_lr: f64) -> LRPolicy {
    LRPolicy { base_lr, ..LRPolicy::new(total) }
}

#[test]
fn unfreeze_events_follow_schedule() {
    let m = oracle::tiny_lm(1);
    let docs = synthetic::repeating_pattern(20, 12, 1);
    let sched = StageSchedule::new(4, 100).unwrap();
    let (_, log) = train_lm(m, &docs, None, &sched, &policy(350, 4e-3), &small_opts(), 1).unwrap();
    assert_eq!(log.unfreeze_events, vec![100, 200, 300]);
    assert_eq!(log.len(), 350);
}

#[test]
fn freeze_soundness_until_each_unfreeze() {
    let m = oracle::tiny_lm(2);
    let initial = m.clone();
    let docs = synthetic::repeating_pattern(30, 12, 2);
    let sched = StageSchedule::new(4, 7).unwrap();
    let mut checked = 0;
    let mut obs = |rec: &LogRecord, model: &LayerGroupedModel| {
        // After step t, groups still frozen at step t are untouched.
        let frozen_now = 4 - rec.unfrozen_groups;
        for g in 0..frozen_now {
            assert_eq!(model.groups[g], initial.groups[g], "group {g} moved at batch {}", rec.batch);
            checked += 1;
        }
    };
    let (end, _) = train_lm_observed(m, &docs, None, &sched, &policy(30, 1e-2), &small_opts(), 2, Some(&mut obs)).unwrap();
    assert!(checked > 0);
    for g in 0..4 {
        assert_ne!(end.groups[g], initial.groups[g]);
    }
}

#[test]
fn frozen_throughout_keeps_embedding() {
    let m = oracle::tiny_lm(3);
    let before = m.groups[0].clone();
    let docs = synthetic::repeating_pattern(20, 12, 3);
    let sched = StageSchedule::new(4, 100).unwrap();
    let (after, log) = train_lm(m, &docs, None, &sched, &policy(40, 1e-2), &small_opts(), 3).unwrap();
    assert_eq!(after.groups[0], before);
    assert!(log.unfreeze_events.is_empty());
}

#[test]
fn pattern_corpus_is_learned() {
    let m = init_model(&ModelConfig { embed_dim: 8, hidden_dim: 16, ..oracle::tiny_config(4) }, ModelKind::LanguageModel).unwrap();
    let docs = synthetic::repeating_pattern(200, 16, 4);
    let sched = StageSchedule::new(4, 50).unwrap();
    let opts = TrainOptions { batch_size: 16, bptt: 16, ..TrainOptions::default() };
    let before = lm_dataset_loss(&m, &docs, &opts).unwrap();
    let (m, log) = train_lm(m, &docs, None, &sched, &policy(300, 1e-2), &opts, 4).unwrap();
    let after = lm_dataset_loss(&m, &docs, &opts).unwrap();
    let first = log.records[0].train_loss;
    let last = log.final_train_loss().unwrap();
    assert!(last < first, "{first} -> {last}");
    assert!(after < before, "{before} -> {after}");
}

#[test]
fn separable_classes_reach_full_accuracy() {
    let lm = init_model(&ModelConfig { embed_dim: 8, hidden_dim: 16, ..oracle::tiny_config(5) }, ModelKind::LanguageModel).unwrap();
    let clf = init_classifier_from_lm(&lm, 2, false, 5).unwrap();
    let (docs, labels) = synthetic::separable(120, 5);
    let data = ClassifierData { inputs: docs.clone(), targets: Targets::Class(labels.clone()) };
    let sched = StageSchedule::new(4, 100).unwrap();
    let opts = TrainOptions { batch_size: 16, ..TrainOptions::default() };
    let (clf, log) = train_classifier(clf, &data, None, &sched, &policy(500, 1e-2), &opts, 5).unwrap();
    assert_eq!(log.len(), 500);
    let preds = predict(&clf, &docs, &opts).unwrap();
    let correct = preds.iter().zip(&labels).filter(|(p, l)| argmax(p) == **l).count();
    assert_eq!(correct, labels.len());
}

#[test]
fn classifier_logs_validation_at_stage_boundaries() {
    let lm = oracle::tiny_lm(6);
    let clf = init_classifier_from_lm(&lm, 4, true, 6).unwrap();
    let (docs, labels) = synthetic::separable(20, 6);
    let hot: Vec<Vec<f64>> = labels.iter().map(|&l| (0..4).map(|k| if k == l { 1.0 } else { 0.0 }).collect()).collect();
    let data = ClassifierData { inputs: docs, targets: Targets::MultiHot(hot) };
    let sched = StageSchedule::new(4, 5).unwrap();
    let (_, log) = train_classifier(clf, &data, Some(&data), &sched, &policy(17, 1e-2), &small_opts(), 6).unwrap();
    let with_val: Vec<usize> = log.records.iter().filter(|r| r.val_loss.is_some()).map(|r| r.batch).collect();
    assert_eq!(with_val, vec![0, 5, 10, 15]);
}

#[test]
fn classifier_rejects_class_count_mismatch() {
    let lm = oracle::tiny_lm(7);
    let clf = init_classifier_from_lm(&lm, 2, false, 7).unwrap();
    let sched = StageSchedule::new(4, 5).unwrap();
    let bad = ClassifierData { inputs: vec![vec![2, 3]], targets: Targets::Class(vec![2]) };
    let err = train_classifier(clf.clone(), &bad, None, &sched, &policy(3, 1e-2), &small_opts(), 7).unwrap_err();
    assert!(matches!(err, TrainError::ClassCountMismatch(_)));
    let bad = ClassifierData { inputs: vec![vec![2, 3]], targets: Targets::MultiHot(vec![vec![1.0, 0.0]]) };
    assert!(matches!(
        train_classifier(clf, &bad, None, &sched, &policy(3, 1e-2), &small_opts(), 7),
        Err(TrainError::ClassCountMismatch(_))
    ));
}

#[test]
fn empty_corpus_is_an_error() {
    let sched = StageSchedule::new(4, 5).unwrap();
    let r = train_lm(oracle::tiny_lm(8), &[vec![2]], None, &sched, &policy(3, 1e-2), &small_opts(), 8);
    assert!(matches!(r, Err(TrainError::EmptyCorpus)));
}

#[test]
fn training_is_deterministic() {
    let docs = synthetic::repeating_pattern(40, 12, 9);
    let sched = StageSchedule::new(4, 10).unwrap();
    let a = train_lm(oracle::tiny_lm(9), &docs, Some(&docs), &sched, &policy(45, 1e-2), &small_opts(), 9).unwrap();
    let b = train_lm(oracle::tiny_lm(9), &docs, Some(&docs), &sched, &policy(45, 1e-2), &small_opts(), 9).unwrap();
    assert_eq!(a.1, b.1);
    assert_eq!(a.0, b.0);
    let c = train_lm(oracle::tiny_lm(9), &docs, Some(&docs), &sched, &policy(45, 1e-2), &small_opts(), 10).unwrap();
    assert_ne!(a.1, c.1);
}

/// Informational: prints how many unfreeze events show a loss spike.
#[test]
fn spike_signature_report() {
    let m = init_model(&ModelConfig { embed_dim: 8, hidden_dim: 16, ..oracle::tiny_config(11) }, ModelKind::LanguageModel).unwrap();
    let docs = synthetic::repeating_pattern(200, 16, 11);
    let sched = StageSchedule::new(4, 100).unwrap();
    let (_, log) = train_lm(m, &docs, None, &sched, &policy(400, 1e-2), &small_opts(), 11).unwrap();
    let spikes = log.spikes(10);
    let n = spikes.iter().filter(|s| s.is_spike()).count();
    println!("spike signature: {n}/{} unfreeze events show a rise", spikes.len());
    assert_eq!(spikes.len(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn logged_events_match_schedule(groups in 3usize..=5, stage in 1usize..15, total in 1usize..60) {
        let docs = synthetic::repeating_pattern(6, 8, 0);
        let sched = StageSchedule::new(groups, stage).unwrap();
        let opts = TrainOptions { batch_size: 4, bptt: 6, ..TrainOptions::default() };
        let (_, log) = train_lm(model_with_groups(groups, 0), &docs, None, &sched, &policy(total, 1e-3), &opts, 0).unwrap();
        prop_assert_eq!(&log.unfreeze_events, &sched.unfreeze_events(total));
        prop_assert_eq!(log.len(), total);
        for (i, r) in log.records.iter().enumerate() {
            prop_assert_eq!(r.batch, i);
            prop_assert_eq!(r.unfrozen_groups, sched.unfrozen_groups(i));
        }
    }

    #[test]
    fn unfrozen_count_is_monotone(groups in 1usize..10, stage in 1usize..50, t in 0usize..2000) {
        let s = StageSchedule::new(groups, stage).unwrap();
        prop_assert!(s.unfrozen_groups(t) <= s.unfrozen_groups(t + 1));
        prop_assert_eq!(s.unfrozen_groups(t), (1 + t / stage).min(groups));
    }

    #[test]
    fn lr_is_slanted_triangle(total in 2usize..500, cut_frac in 0.01f64..0.99, ratio in 1.5f64..100.0, base in 1e-4f64..1.0) {
        let p = LRPolicy { base_lr: base, ratio, cut_frac, total_batches: total, discriminative_factor: 2.6 };
        let cut = p.cut();
        let lrs: Vec<f64> = (0..total).map(|t| p.lr_at(t, 0).unwrap()).collect();
        prop_assert!(lrs.iter().all(|&v| v > 0.0));
        let start = if cut == 0 { base } else { base / ratio };
        prop_assert!((lrs[0] - start).abs() < 1e-12);
        if cut < total {
            let peak = lrs.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert_eq!(lrs[cut], peak);
            prop_assert!((lrs[cut] - base).abs() < 1e-12);
        }
        for t in 1..total {
            if t <= cut {
                prop_assert!(lrs[t] >= lrs[t - 1]);
            } else {
                prop_assert!(lrs[t] <= lrs[t - 1]);
            }
        }
        // Constant second differences inside each linear piece.
        for t in 2..total {
            if t <= cut || t >= cut + 2 {
                let d = (lrs[t] - lrs[t - 1]) - (lrs[t - 1] - lrs[t - 2]);
                prop_assert!(d.abs() < 1e-12);
            }
        }
        prop_assert!((p.lr_at(0, 2).unwrap() * 2.6 * 2.6 - lrs[0]).abs() < 1e-12);
    }
}
