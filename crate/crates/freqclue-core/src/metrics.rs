//! Accuracy and ROC AUC. Fake is the positive class.

use crate::data::manifest::Label;
use crate::error::{Error, Result};

/// Area under the ROC curve by trapezoidal integration over the curve's
/// vertices.
///
/// The polyline is accumulated in (false-positive, true-positive) counts and
/// normalized once at the end, which keeps the arithmetic exact for desk-scale
/// sets; ties advance both counts at one threshold, so the result equals the
/// Mann-Whitney statistic `P(s+ > s-) + 0.5 * P(s+ = s-)`.
pub fn auc(scores: &[(f64, Label)]) -> Result<f64> {
    if let Some((bad, _)) = scores.iter().find(|(s, _)| !s.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("score {bad}"),
        });
    }
    let positives = scores.iter().filter(|(_, l)| l.is_fake()).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedMetric(format!(
            "AUC needs both classes, got {positives} fake and {negatives} real"
        )));
    }

    let mut sorted: Vec<(f64, Label)> = scores.to_vec();
    sorted.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));

    let mut area = 0.0f64; // in count space
    let mut tp = 0.0f64;
    let mut fp = 0.0f64;
    let mut prev_tp = 0.0f64;
    let mut prev_fp = 0.0f64;
    let mut prev_score = f64::INFINITY;
    for (score, label) in sorted {
        if score != prev_score {
            area += (fp - prev_fp) * (tp + prev_tp) / 2.0;
            prev_tp = tp;
            prev_fp = fp;
            prev_score = score;
        }
        if label.is_fake() {
            tp += 1.0;
        } else {
            fp += 1.0;
        }
    }
    area += (fp - prev_fp) * (tp + prev_tp) / 2.0;
    Ok(area / (positives as f64 * negatives as f64))
}

/// Fraction of scores on the right side of the threshold: a sample counts as
/// correct when `score >= threshold` matches `label == fake`.
pub fn accuracy(scores: &[(f64, Label)], threshold: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::UndefinedMetric("accuracy of an empty set".into()));
    }
    let correct = scores
        .iter()
        .filter(|(score, label)| (*score >= threshold) == label.is_fake())
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored(pos: &[f64], neg: &[f64]) -> Vec<(f64, Label)> {
        let mut out: Vec<(f64, Label)> = pos.iter().map(|&s| (s, Label::Fake)).collect();
        out.extend(neg.iter().map(|&s| (s, Label::Real)));
        out
    }

    #[test]
    fn perfect_ranking_is_one() {
        let scores = scored(&[0.9, 0.8, 0.7], &[0.3, 0.2, 0.1]);
        assert_eq!(auc(&scores).unwrap(), 1.0);
    }

    #[test]
    fn all_ties_give_half() {
        let scores = scored(&[0.5, 0.5], &[0.5, 0.5, 0.5]);
        assert_eq!(auc(&scores).unwrap(), 0.5);
    }

    #[test]
    fn worked_four_pair_example() {
        let scores = scored(&[0.9, 0.4], &[0.6, 0.1]);
        assert_eq!(auc(&scores).unwrap(), 0.75);
    }

    #[test]
    fn inverted_ranking_is_zero() {
        let scores = scored(&[0.1], &[0.9]);
        assert_eq!(auc(&scores).unwrap(), 0.0);
    }

    #[test]
    fn single_class_is_undefined() {
        let scores = scored(&[0.9, 0.4], &[]);
        assert!(matches!(auc(&scores), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn nan_scores_are_rejected() {
        let scores = scored(&[f64::NAN], &[0.5]);
        assert!(matches!(auc(&scores), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn accuracy_counts() {
        let all_right = scored(&[0.9, 0.6], &[0.4, 0.1]);
        assert_eq!(accuracy(&all_right, 0.5).unwrap(), 1.0);
        let all_wrong = scored(&[0.1, 0.2], &[0.8, 0.9]);
        assert_eq!(accuracy(&all_wrong, 0.5).unwrap(), 0.0);
        let three_of_four = scored(&[0.9, 0.4], &[0.3, 0.2]);
        assert_eq!(accuracy(&three_of_four, 0.5).unwrap(), 0.75);
        assert!(accuracy(&[], 0.5).is_err());
    }

    #[test]
    fn boundary_scores_count_as_fake() {
        let scores = vec![(0.5, Label::Fake), (0.5, Label::Real)];
        assert_eq!(accuracy(&scores, 0.5).unwrap(), 0.5);
    }
}
