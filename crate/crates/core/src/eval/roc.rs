use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// Samples scoring at or above this value are called positive.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// Starts at (0, 0) with an infinite threshold, one point per distinct score after.
    pub points: Vec<RocPoint>,
    /// `None` when `truth` lacks either class.
    pub auc: Option<f64>,
}

/// Threshold sweep over the distinct scores; AUC by the trapezoidal rule.
pub fn roc_auc(scores: &[f64], truth: &[bool]) -> Result<RocCurve> {
    if scores.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} scores for {} labels",
            scores.len(),
            truth.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("ROC scores must be finite".into()));
    }
    let n_pos = truth.iter().filter(|&&t| t).count();
    let n_neg = truth.len() - n_pos;
    let rate = |count: usize, total: usize| {
        if total == 0 {
            0.0
        } else {
            count as f64 / total as f64
        }
    };

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if truth[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: t,
            fpr: rate(fp, n_neg),
            tpr: rate(tp, n_pos),
        });
    }

    let auc = (n_pos > 0 && n_neg > 0).then(|| {
        points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
            .sum()
    });
    Ok(RocCurve { points, auc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Mann-Whitney over all positive/negative pairs, ties worth one half.
    fn pair_count(scores: &[f64], truth: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &ti) in truth.iter().enumerate() {
            for (j, &tj) in truth.iter().enumerate() {
                if ti && !tj {
                    den += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn separated_and_constant() {
        let truth = [true, true, false, false];
        assert_eq!(
            roc_auc(&[0.9, 0.8, 0.2, 0.1], &truth).unwrap().auc,
            Some(1.0)
        );
        assert_eq!(roc_auc(&[0.5; 4], &truth).unwrap().auc, Some(0.5));
    }

    #[test]
    fn one_inversion_on_six_points() {
        let scores = [0.9, 0.8, 0.3, 0.7, 0.2, 0.1];
        let truth = [true, true, true, false, false, false];
        let c = roc_auc(&scores, &truth).unwrap();
        assert!((c.auc.unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert!((c.auc.unwrap() - pair_count(&scores, &truth)).abs() < 1e-15);
        assert_eq!(c.points.len(), 7);
        let last = c.points.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn single_class_has_no_auc() {
        let c = roc_auc(&[0.1, 0.4], &[true, true]).unwrap();
        assert_eq!(c.auc, None);
        assert_eq!(c.points.len(), 3);
        assert!(roc_auc(&[f64::NAN], &[true]).is_err());
        assert!(roc_auc(&[0.1], &[true, false]).is_err());
    }

    proptest! {
        #[test]
        fn matches_pair_count_and_is_monotone(
            data in proptest::collection::vec((0u8..6, any::<bool>()), 2..40)
        ) {
            let scores: Vec<f64> = data.iter().map(|d| f64::from(d.0) / 5.0).collect();
            let truth: Vec<bool> = data.iter().map(|d| d.1).collect();
            let c = roc_auc(&scores, &truth).unwrap();
            for w in c.points.windows(2) {
                prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
                prop_assert!(w[1].threshold < w[0].threshold);
            }
            if let Some(auc) = c.auc {
                prop_assert!((auc - pair_count(&scores, &truth)).abs() < 1e-12);
                // strictly increasing transform
                let t: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
                prop_assert!((roc_auc(&t, &truth).unwrap().auc.unwrap() - auc).abs() < 1e-12);
            } else {
                prop_assert!(truth.iter().all(|&t| t) || truth.iter().all(|&t| !t));
            }
        }
    }
}
