use super::{ModelError, TrainedModel};
use crate::corpus::LabeledSentence;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of gold sentences with this label.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    /// One entry per model label, in label order.
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted mean F1 over the classes that occur in the gold labels.
    pub macro_f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy and per-class precision/recall/F1 from gold and predicted class
/// indices. Zero denominators give 0.
pub fn score_predictions(gold: &[usize], pred: &[usize], labels: &[String]) -> Result<EvalReport, ModelError> {
    if gold.is_empty() {
        return Err(ModelError::EmptyEvalSet);
    }
    assert_eq!(gold.len(), pred.len(), "gold and predicted lengths differ");
    let c = labels.len();
    let mut tp = vec![0usize; c];
    let mut gold_n = vec![0usize; c];
    let mut pred_n = vec![0usize; c];
    for (&g, &p) in gold.iter().zip(pred) {
        gold_n[g] += 1;
        pred_n[p] += 1;
        if g == p {
            tp[g] += 1;
        }
    }
    let per_class: Vec<ClassMetrics> = (0..c)
        .map(|k| {
            let precision = ratio(tp[k], pred_n[k]);
            let recall = ratio(tp[k], gold_n[k]);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                label: labels[k].clone(),
                precision,
                recall,
                f1,
                support: gold_n[k],
            }
        })
        .collect();
    let present: Vec<&ClassMetrics> = per_class.iter().filter(|m| m.support > 0).collect();
    let macro_f1 = present.iter().map(|m| m.f1).sum::<f64>() / present.len() as f64;
    let accuracy = ratio(tp.iter().sum(), gold.len());
    Ok(EvalReport {
        accuracy,
        per_class,
        macro_f1,
    })
}

/// Classifies every sentence and scores the predictions.
pub fn evaluate<T: Scalar>(m: &TrainedModel<T>, sentences: &[LabeledSentence]) -> Result<EvalReport, ModelError> {
    if sentences.is_empty() {
        return Err(ModelError::EmptyEvalSet);
    }
    let mut gold = Vec::with_capacity(sentences.len());
    let mut pred = Vec::with_capacity(sentences.len());
    for s in sentences {
        gold.push(
            m.label_index(&s.label)
                .ok_or_else(|| ModelError::UnknownLabel(s.label.clone()))?,
        );
        pred.push(m.predict(&s.tokens)?.label_index);
    }
    score_predictions(&gold, &pred, &m.labels)
}
