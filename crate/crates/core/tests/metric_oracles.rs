//! Metrics against brute-force recounts.

mod common;

use common::pair_count_auc;
use paygan::data::{FakeKind, Label};
use paygan::metrics::{auc, confusion, ratios, roc_curve, ConfusionMatrix, MetricsReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(rng: &mut ChaCha8Rng, n: usize, levels: u32) -> (Vec<f64>, Vec<Label>) {
    loop {
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 / (levels - 1) as f64).collect();
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.random_bool(0.5) { Label::Fake } else { Label::Real })
            .collect();
        if labels.contains(&Label::Fake) && labels.contains(&Label::Real) {
            return (scores, labels);
        }
    }
}

#[test]
fn confusion_matches_loop_and_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let (scores, labels) = random_case(&mut rng, 200, 21);
        let threshold = rng.random_range(0..21) as f64 / 20.0;
        let mut expect = ConfusionMatrix::default();
        for (s, l) in scores.iter().zip(&labels) {
            let predicted_fake = *s < threshold;
            match (predicted_fake, l) {
                (true, Label::Fake) => expect.tp += 1,
                (true, Label::Real) => expect.fp += 1,
                (false, Label::Fake) => expect.fn_ += 1,
                (false, Label::Real) => expect.tn += 1,
            }
        }
        assert_eq!(confusion(&scores, &labels, threshold).unwrap(), expect);
    }
}

#[test]
fn confusion_forced_cases() {
    let cm = confusion(&[0.9, 0.1], &[Label::Real, Label::Fake], 0.5).unwrap();
    assert_eq!((cm.tp, cm.fp, cm.fn_, cm.tn), (1, 0, 0, 1));
    let cm = confusion(&[1.0; 7], &[Label::Real; 7], 0.5).unwrap();
    assert_eq!((cm.tp, cm.fp, cm.fn_, cm.tn), (0, 0, 0, 7));
    // A score equal to the threshold counts as real.
    let cm = confusion(&[0.5], &[Label::Fake], 0.5).unwrap();
    assert_eq!(cm.fn_, 1);
    assert!(matches!(
        confusion(&[0.5, 0.2], &[Label::Fake], 0.5),
        Err(paygan::Error::Argument(_))
    ));
}

#[test]
fn ratios_match_direct_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let cm = ConfusionMatrix {
            tp: rng.random_range(1..1000),
            fp: rng.random_range(0..1000),
            fn_: rng.random_range(0..1000),
            tn: rng.random_range(0..1000),
        };
        let r = ratios(&cm).unwrap();
        let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
        let p = tp / (tp + fp);
        let rc = tp / (tp + fn_);
        assert!((r.accuracy - (tp + tn) / (tp + fp + fn_ + tn)).abs() < 1e-12);
        assert!((r.precision - p).abs() < 1e-12);
        assert!((r.recall - rc).abs() < 1e-12);
        assert!((r.f1 - 2.0 * p * rc / (p + rc)).abs() < 1e-12);
    }
}

#[test]
fn degenerate_ratios_are_flagged_zero() {
    let r = ratios(&ConfusionMatrix {
        tp: 0,
        fp: 0,
        fn_: 3,
        tn: 5,
    })
    .unwrap();
    assert_eq!((r.precision, r.f1), (0.0, 0.0));
    assert!(r.degenerate.precision);
    let r = ratios(&ConfusionMatrix {
        tp: 1,
        ..Default::default()
    })
    .unwrap();
    assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (1.0, 1.0, 1.0, 1.0));
    assert!(matches!(ratios(&ConfusionMatrix::default()), Err(paygan::Error::Domain(_))));
}

/// For every threshold τ among the distinct scores (descending), recount
/// TPR = #fake with score ≥ τ / #fake and FPR = #real with score ≥ τ / #real.
#[test]
fn roc_matches_per_threshold_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let (scores, labels) = random_case(&mut rng, 50, 12);
        let pos = labels.iter().filter(|&&l| l == Label::Fake).count() as f64;
        let neg = labels.len() as f64 - pos;
        let mut thresholds = scores.clone();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let mut expect = vec![(0.0, 0.0)];
        for t in thresholds {
            let tp = scores.iter().zip(&labels).filter(|(s, l)| **s >= t && **l == Label::Fake).count() as f64;
            let fp = scores.iter().zip(&labels).filter(|(s, l)| **s >= t && **l == Label::Real).count() as f64;
            expect.push((fp / neg, tp / pos));
        }
        let got = roc_curve(&scores, &labels).unwrap();
        assert_eq!(got.len(), expect.len());
        for (g, e) in got.iter().zip(&expect) {
            assert!((g.0 - e.0).abs() < 1e-15 && (g.1 - e.1).abs() < 1e-15, "{g:?} vs {e:?}");
        }
        assert_eq!(*got.last().unwrap(), (1.0, 1.0));
    }
}

#[test]
fn roc_edge_cases() {
    let labels = [Label::Fake, Label::Fake, Label::Real, Label::Real];
    let separated = roc_curve(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap();
    assert!(separated.contains(&(0.0, 1.0)));
    assert_eq!(auc(&separated).unwrap(), 1.0);
    let tied = roc_curve(&[0.4; 4], &labels).unwrap();
    assert_eq!(tied, vec![(0.0, 0.0), (1.0, 1.0)]);
    assert_eq!(auc(&tied).unwrap(), 0.5);
    match roc_curve(&[0.1, 0.2], &[Label::Real, Label::Real]) {
        Err(paygan::Error::Domain(m)) => assert!(m.contains("fake"), "{m}"),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(auc(&[(0.0, 0.0), (0.6, 0.5), (0.4, 1.0), (1.0, 1.0)]), Err(paygan::Error::Argument(_))));
}

#[test]
fn trapezoid_equals_pair_counting_on_balanced_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut labels = vec![Label::Fake; 30];
    labels.extend([Label::Real; 30]);
    let scores: Vec<f64> = (0..60).map(|_| rng.random_range(0..15) as f64).collect();
    let area = auc(&roc_curve(&scores, &labels).unwrap()).unwrap();
    assert!((area - pair_count_auc(&scores, &labels)).abs() < 1e-9);
}

#[test]
fn f1_from_reported_precision_and_recall() {
    // tp/(tp+fp) = 0.955 and tp/(tp+fn) = 0.968 exactly for these counts.
    let cm = ConfusionMatrix {
        tp: 23111,
        fp: 1089,
        fn_: 764,
        tn: 0,
    };
    let r = ratios(&cm).unwrap();
    assert!((r.precision - 0.955).abs() < 1e-12);
    assert!((r.recall - 0.968).abs() < 1e-12);
    assert!((r.f1 - 0.9615).abs() <= 0.0005, "f1 {}", r.f1);
}

#[test]
fn report_satisfies_invariants_and_serializes() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (scores, labels) = random_case(&mut rng, 80, 30);
    let kinds: Vec<FakeKind> = labels
        .iter()
        .map(|l| if *l == Label::Fake { FakeKind::Manipulated } else { FakeKind::NotApplicable })
        .collect();
    let extra = [(0.2, FakeKind::Generated), (0.7, FakeKind::Generated)];
    let report = MetricsReport::from_scores(&scores, &labels, &kinds, 0.5, &extra).unwrap();
    report.check_invariants().unwrap();
    assert_eq!(report.samples, 80);
    assert_eq!(report.recall_by_fake_kind[&FakeKind::Generated], 0.5);

    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    for key in ["Accuracy", "Precision", "Recall", "F1-Score", "AUC", "roc_points", "confusion_matrix"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["confusion_matrix"]["fn"], report.confusion_matrix.fn_);
    let fake_scores: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();
    assert!((report.auc - pair_count_auc(&fake_scores, &labels)).abs() < 1e-9);
    assert!(report.to_csv().starts_with("metric,value\nAccuracy,"));
}
