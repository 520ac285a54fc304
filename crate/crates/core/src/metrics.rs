//! Accuracy, balanced accuracy, macro-F1 and the misclassified-minor
//! diagnostic.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    /// Mean recall over classes present in the evaluation mask.
    pub balanced_accuracy: f64,
    /// Mean per-class F1 over classes present in the mask; 0/0 counts as 0.
    pub macro_f1: f64,
    /// Recall per class; `None` for classes absent from the mask.
    pub per_class_recall: Vec<Option<f64>>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    /// Fraction of misclassified samples predicted into a minor class;
    /// `None` when nothing was misclassified.
    pub misclassified_minor_prob: Option<f64>,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "accuracy,balanced_accuracy,macro_f1,misclassified_minor_prob";

    pub fn csv_row(&self) -> String {
        let minor = self
            .misclassified_minor_prob
            .map(|p| p.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{},{}",
            self.accuracy, self.balanced_accuracy, self.macro_f1, minor
        )
    }
}

fn confusion(preds: &[usize], labels: &[usize], mask: &[usize], num_classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0usize; num_classes]; num_classes];
    for &i in mask {
        m[labels[i]][preds[i]] += 1;
    }
    m
}

/// Metrics over the nodes in `mask`. `preds` and `labels` are indexed by node
/// id. The misclassified-minor field is left as `None`; fill it with
/// [`misclassified_minor_probability`].
pub fn evaluate(preds: &[usize], labels: &[usize], mask: &[usize], num_classes: usize) -> MetricsReport {
    assert!(!mask.is_empty(), "evaluation mask must be nonempty");
    let conf = confusion(preds, labels, mask, num_classes);
    let total = mask.len() as f64;
    let correct: usize = (0..num_classes).map(|c| conf[c][c]).sum();
    let mut recalls = Vec::with_capacity(num_classes);
    let mut f1s = Vec::new();
    for c in 0..num_classes {
        let support: usize = conf[c].iter().sum();
        if support == 0 {
            recalls.push(None);
            continue;
        }
        let tp = conf[c][c] as f64;
        let predicted: usize = (0..num_classes).map(|r| conf[r][c]).sum();
        let recall = tp / support as f64;
        let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        recalls.push(Some(recall));
        f1s.push(f1);
    }
    let present: Vec<f64> = recalls.iter().flatten().copied().collect();
    MetricsReport {
        accuracy: correct as f64 / total,
        balanced_accuracy: present.iter().sum::<f64>() / present.len() as f64,
        macro_f1: f1s.iter().sum::<f64>() / f1s.len() as f64,
        per_class_recall: recalls,
        confusion: conf,
        misclassified_minor_prob: None,
    }
}

/// Among misclassified nodes in `mask`, the fraction whose predicted class is
/// in `minor_classes`. `None` if there are no misclassifications.
pub fn misclassified_minor_probability(
    preds: &[usize],
    labels: &[usize],
    mask: &[usize],
    minor_classes: &[usize],
) -> Option<f64> {
    let wrong: Vec<usize> = mask.iter().copied().filter(|&i| preds[i] != labels[i]).collect();
    if wrong.is_empty() {
        return None;
    }
    let into_minor = wrong.iter().filter(|&&i| minor_classes.contains(&preds[i])).count();
    Some(into_minor as f64 / wrong.len() as f64)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn from_confusion(conf: &[[usize; 2]; 2]) -> (Vec<usize>, Vec<usize>) {
        let (mut preds, mut labels) = (Vec::new(), Vec::new());
        for (t, row) in conf.iter().enumerate() {
            for (p, &k) in row.iter().enumerate() {
                preds.extend(std::iter::repeat_n(p, k));
                labels.extend(std::iter::repeat_n(t, k));
            }
        }
        (preds, labels)
    }

    #[test]
    fn perfect_predictions() {
        let labels = vec![0, 1, 2, 2];
        let r = evaluate(&labels, &labels, &[0, 1, 2, 3], 3);
        assert_eq!((r.accuracy, r.balanced_accuracy, r.macro_f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn balanced_accuracy_is_mean_recall() {
        let (preds, labels) = from_confusion(&[[4, 0], [2, 2]]);
        let mask: Vec<usize> = (0..8).collect();
        assert_eq!(evaluate(&preds, &labels, &mask, 2).balanced_accuracy, 0.75);
    }

    #[test]
    fn macro_f1_hand_computed() {
        // Class 0: P = 8/12, R = 8/10 -> F1 = 8/11. Class 1: P = 6/8, R = 6/10 -> F1 = 2/3.
        let (preds, labels) = from_confusion(&[[8, 2], [4, 6]]);
        let mask: Vec<usize> = (0..20).collect();
        let r = evaluate(&preds, &labels, &mask, 2);
        let expected = (8.0 / 11.0 + 2.0 / 3.0) / 2.0;
        assert!((r.macro_f1 - expected).abs() < 1e-12);
        assert!((r.macro_f1 - 0.6970).abs() < 1e-4);
        assert_eq!(r.accuracy, 0.7);
    }

    #[test]
    fn absent_classes_are_excluded() {
        let r = evaluate(&[0, 0], &[0, 0], &[0, 1], 3);
        assert_eq!(r.per_class_recall, vec![Some(1.0), None, None]);
        assert_eq!(r.balanced_accuracy, 1.0);
        assert_eq!(r.macro_f1, 1.0);
    }

    #[test]
    fn misclassified_minor_examples() {
        let labels = [2, 2, 0, 1];
        let preds = [0, 1, 0, 1];
        assert_eq!(misclassified_minor_probability(&preds, &labels, &[0, 1, 2, 3], &[2]), Some(0.0));
        assert_eq!(misclassified_minor_probability(&preds, &labels, &[2, 3], &[2]), None);
    }

    #[test]
    fn random_predictions_split_evenly() {
        // Four balanced classes, two minor; uniform random predictions put half
        // of the errors into minor classes.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let labels: Vec<usize> = (0..n).map(|i| i % 4).collect();
        let preds: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let mask: Vec<usize> = (0..n).collect();
        let p = misclassified_minor_probability(&preds, &labels, &mask, &[0, 1]).unwrap();
        let wrong = preds.iter().zip(&labels).filter(|(p, l)| p != l).count() as f64;
        let sigma = (0.25 / wrong).sqrt();
        assert!((p - 0.5).abs() < 3.0 * sigma, "{p}");
    }

    #[test]
    fn argmax_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    proptest! {
        #[test]
        fn metric_invariants(pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..200)) {
            let preds: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let labels: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let mask: Vec<usize> = (0..pairs.len()).collect();
            let r = evaluate(&preds, &labels, &mask, 4);
            let trace: usize = (0..4).map(|c| r.confusion[c][c]).sum();
            let total: usize = r.confusion.iter().flatten().sum();
            prop_assert_eq!(r.accuracy, trace as f64 / total as f64);
            for v in [r.accuracy, r.balanced_accuracy, r.macro_f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            for c in 0..4 {
                let support = labels.iter().filter(|&&l| l == c).count();
                prop_assert_eq!(r.confusion[c].iter().sum::<usize>(), support);
            }

            // Duplicating every test row of one class leaves recalls, hence bAcc, unchanged.
            let cls = labels[0];
            let extra: Vec<usize> = mask.iter().copied().filter(|&i| labels[i] == cls).collect();
            let mut bigger = mask.clone();
            bigger.extend(extra);
            let r2 = evaluate(&preds, &labels, &bigger, 4);
            prop_assert!((r2.balanced_accuracy - r.balanced_accuracy).abs() < 1e-12);
        }
    }
}
