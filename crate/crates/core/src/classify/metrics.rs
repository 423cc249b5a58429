use serde::{Deserialize, Serialize};

use super::CATEGORIES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// The class never appears among predictions; precision is 0 by convention.
    pub never_predicted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub total: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Metrics over the seven categories.
pub fn evaluate(truth: &[u8], predicted: &[u8]) -> Evaluation {
    evaluate_labels(truth, predicted, &CATEGORIES.collect::<Vec<_>>())
}

/// Metrics over an explicit label set; the macro average is the unweighted
/// mean over `labels`.
pub fn evaluate_labels(truth: &[u8], predicted: &[u8], labels: &[u8]) -> Evaluation {
    assert_eq!(
        truth.len(),
        predicted.len(),
        "truth and predictions differ in length"
    );
    let per_class: Vec<ClassMetrics> = labels
        .iter()
        .map(|&c| {
            let tp = truth
                .iter()
                .zip(predicted)
                .filter(|(t, p)| **t == c && **p == c)
                .count();
            let support = truth.iter().filter(|t| **t == c).count();
            let predicted_n = predicted.iter().filter(|p| **p == c).count();
            let precision = ratio(tp, predicted_n);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                class: c,
                precision,
                recall,
                f1,
                support,
                never_predicted: predicted_n == 0,
            }
        })
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| {
        if per_class.is_empty() {
            0.0
        } else {
            per_class.iter().map(f).sum::<f64>() / per_class.len() as f64
        }
    };
    let correct = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
    Evaluation {
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        accuracy: ratio(correct, truth.len()),
        total: truth.len(),
        per_class,
    }
}
