#[path = "common/metrics_oracle.rs"]
mod oracle;

use ladiff_core::metrics::*;
use proptest::prelude::*;

fn flags(bits: u8) -> HostileFlags {
    [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0, bits & 8 != 0]
}

fn posts(max: usize) -> impl Strategy<Value = Vec<(u8, u8)>> {
    prop::collection::vec((0u8..16, 0u8..16), 1..=max)
}

#[test]
fn hand_examples() {
    let r = binary_report(&[1, 0, 0, 0], &[1, 1, 0, 0]).unwrap();
    assert!((r.accuracy - 0.75).abs() < 1e-9);
    assert!((r.f1 - (3.0 * 0.8 + 2.0 / 3.0) / 4.0).abs() < 1e-9);
    assert!((r.f1 - 0.7667).abs() < 1e-4);

    let gold = [flags(1), flags(0), flags(2 | 4), flags(0)];
    let pred = [flags(1), flags(1), flags(0), flags(0)];
    assert!((coarse_f1(&gold, &pred).unwrap() - 0.5).abs() < 1e-9);

    let fg = fine_grained_f1(&[flags(1), flags(1 | 2)], &[flags(1), flags(1)]).unwrap();
    assert_eq!(fg.support, [2, 1, 0, 0]);
    assert!((fg.weighted - 2.0 / 3.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn multilabel_metrics_match_brute_force(p in posts(6)) {
        let gold: Vec<HostileFlags> = p.iter().map(|(g, _)| flags(*g)).collect();
        let pred: Vec<HostileFlags> = p.iter().map(|(_, q)| flags(*q)).collect();
        let c = coarse_f1(&gold, &pred).unwrap();
        prop_assert!((c - oracle::coarse(&gold, &pred)).abs() <= 1e-12);
        let (f, s, w) = oracle::fine(&gold, &pred);
        match fine_grained_f1(&gold, &pred) {
            Ok(fg) => {
                prop_assert_eq!(fg.support, s);
                for (got, want) in fg.per_class.iter().zip(f) {
                    prop_assert!((got - want).abs() <= 1e-12);
                }
                prop_assert!((fg.weighted - w.unwrap()).abs() <= 1e-12);
            }
            Err(e) => {
                prop_assert_eq!(e, MetricsError::UndefinedMetric);
                prop_assert!(w.is_none());
            }
        }
    }

    #[test]
    fn binary_matches_brute_force(p in prop::collection::vec((0usize..2, 0usize..2), 1..40)) {
        let g: Vec<usize> = p.iter().map(|x| x.0).collect();
        let q: Vec<usize> = p.iter().map(|x| x.1).collect();
        let r = binary_report(&g, &q).unwrap();
        let gb: Vec<bool> = g.iter().map(|&v| v == 1).collect();
        let qb: Vec<bool> = q.iter().map(|&v| v == 1).collect();
        prop_assert!((r.f1 - oracle::weighted_binary_f1(&gb, &qb)).abs() <= 1e-12);
        for v in [r.accuracy, r.precision, r.recall, r.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn permutation_invariance(p in posts(12), rot in 0usize..12) {
        let gold: Vec<HostileFlags> = p.iter().map(|(g, _)| flags(*g)).collect();
        let pred: Vec<HostileFlags> = p.iter().map(|(_, q)| flags(*q)).collect();
        let k = rot % gold.len();
        let (mut g2, mut p2) = (gold.clone(), pred.clone());
        g2.rotate_left(k);
        p2.rotate_left(k);
        g2.reverse();
        p2.reverse();
        prop_assert!((coarse_f1(&gold, &pred).unwrap() - coarse_f1(&g2, &p2).unwrap()).abs() < 1e-12);
        match (fine_grained_f1(&gold, &pred), fine_grained_f1(&g2, &p2)) {
            (Ok(a), Ok(b)) => prop_assert!((a.weighted - b.weighted).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn self_consistency(g in prop::collection::vec(0usize..2, 2..30)) {
        prop_assume!(g.contains(&0) && g.contains(&1));
        let r = binary_report(&g, &g).unwrap();
        prop_assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (1.0, 1.0, 1.0, 1.0));
    }
}
