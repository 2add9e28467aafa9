//! Evaluation harness: cross-validation, detection-rate sweeps, ROC/AUC and
//! PCA scatter export.

mod cv;
mod detection;
mod pca;
mod report;
mod roc;

use nalgebra::DMatrix;

use crate::baselines::{KnnModel, LdaModel};
use crate::cem::{predict, CemConfig};
use crate::error::{Error, Result};
use crate::gmm::{CovarianceFamily, MixtureModel};

pub use self::cv::{cross_validate, CvReport, FoldResult};
pub use self::detection::{detection_rate, detection_rate_from_predictions, DrPoint, DrSchedule};
pub use self::pca::{fit_pca, pca_project, Cohort, Pca, PcaScatter};
pub use self::report::{
    merge_external, read_external_predictions, read_predictions_csv, write_dr_csv,
    write_dr_replicates_csv, write_folds_csv, write_predictions_csv, write_roc_csv, ComparisonRow,
    ExternalPrediction,
};
pub use self::roc::{roc_auc, RocCurve, RocPoint};

/// One prediction. `label` is `None` for an unresolved vote tie; `score` is
/// the classifier's confidence in the positive class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Option<usize>,
    pub score: f64,
}

/// Anything that maps feature rows to predictions.
pub trait Classifier {
    fn classify(&self, x: &DMatrix<f64>, positive: usize) -> Result<Vec<Prediction>>;
}

impl Classifier for MixtureModel {
    fn classify(&self, x: &DMatrix<f64>, positive: usize) -> Result<Vec<Prediction>> {
        check_positive(positive, self.k())?;
        let (labels, post) = predict(self, x)?;
        Ok(labels
            .into_iter()
            .enumerate()
            .map(|(j, l)| Prediction {
                label: Some(l),
                score: post[(j, positive)],
            })
            .collect())
    }
}

impl Classifier for KnnModel {
    fn classify(&self, x: &DMatrix<f64>, positive: usize) -> Result<Vec<Prediction>> {
        check_positive(positive, self.n_classes())?;
        Ok(self
            .predict_rows(x)?
            .into_iter()
            .map(|p| Prediction {
                label: p.label(),
                score: p.vote_share(positive),
            })
            .collect())
    }
}

impl Classifier for LdaModel {
    /// Scores are the softmax of the discriminants, i.e. plug-in posteriors.
    fn classify(&self, x: &DMatrix<f64>, positive: usize) -> Result<Vec<Prediction>> {
        check_positive(positive, self.n_classes())?;
        Ok(self
            .predict_rows(x)?
            .into_iter()
            .map(|(label, s)| {
                let lse = crate::math::log_sum_exp(&s);
                Prediction {
                    label: Some(label),
                    score: (s[positive] - lse).exp(),
                }
            })
            .collect())
    }
}

fn check_positive(positive: usize, n_classes: usize) -> Result<()> {
    if positive >= n_classes {
        return Err(Error::InvalidLabel {
            label: positive,
            n_classes,
        });
    }
    Ok(())
}

/// Which classifier to train inside a protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierSpec {
    /// Semi-supervised mixture with BIC selection over `families`.
    Mbss {
        families: Vec<CovarianceFamily>,
        config: CemConfig,
    },
    Knn {
        k: usize,
    },
    Lda {
        regularization: f64,
    },
}

impl ClassifierSpec {
    pub fn name(&self) -> String {
        match self {
            Self::Mbss { .. } => "MBSS".into(),
            Self::Knn { k } => format!("{k}NN"),
            Self::Lda { .. } => "LDA".into(),
        }
    }
}

/// Binary confusion counts with `positive` as the positive class. A tie is
/// always wrong: a false negative on a positive sample, a false positive
/// otherwise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    /// Samples among the above whose prediction was a tie.
    pub ties: usize,
    /// Samples whose predicted label equals the true label.
    pub correct: usize,
}

impl ConfusionCounts {
    pub fn tally(truth: &[usize], predictions: &[Prediction], positive: usize) -> Result<Self> {
        if truth.len() != predictions.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} predictions",
                truth.len(),
                predictions.len()
            )));
        }
        let mut c = Self::default();
        for (&t, p) in truth.iter().zip(predictions) {
            let is_pos = t == positive;
            match p.label {
                None => {
                    c.ties += 1;
                    if is_pos {
                        c.fn_ += 1;
                    } else {
                        c.fp += 1;
                    }
                }
                Some(l) => {
                    if l == t {
                        c.correct += 1;
                    }
                    match (is_pos, l == positive) {
                        (true, true) => c.tp += 1,
                        (true, false) => c.fn_ += 1,
                        (false, true) => c.fp += 1,
                        (false, false) => c.tn += 1,
                    }
                }
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total() as f64
    }

    /// `FP / (FP + TN)`; zero when there are no negatives.
    pub fn false_positive_rate(&self) -> f64 {
        let neg = self.fp + self.tn;
        if neg == 0 {
            0.0
        } else {
            self.fp as f64 / neg as f64
        }
    }

    /// `TP / (TP + FN)`; zero when there are no positives.
    pub fn true_positive_rate(&self) -> f64 {
        let pos = self.tp + self.fn_;
        if pos == 0 {
            0.0
        } else {
            self.tp as f64 / pos as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(label: Option<usize>) -> Prediction {
        Prediction { label, score: 0.0 }
    }

    #[test]
    fn confusion_conserves_count() {
        let truth = [1, 1, 0, 0, 1, 0];
        let preds = [
            p(Some(1)),
            p(Some(0)),
            p(Some(1)),
            p(Some(0)),
            p(None),
            p(None),
        ];
        let c = ConfusionCounts::tally(&truth, &preds, 1).unwrap();
        assert_eq!((c.tp, c.fn_, c.fp, c.tn, c.ties), (1, 2, 2, 1, 2));
        assert_eq!(c.total(), 6);
        assert_eq!(c.correct, 2);
        assert!((c.accuracy() + (1.0 - c.accuracy()) - 1.0).abs() < 1e-15);
        assert_eq!(c.false_positive_rate(), 2.0 / 3.0);
    }

    #[test]
    fn constant_malicious_classifier_on_57_43() {
        let truth: Vec<usize> = (0..100).map(|i| usize::from(i < 57)).collect();
        let preds = vec![p(Some(1)); 100];
        let c = ConfusionCounts::tally(&truth, &preds, 1).unwrap();
        assert_eq!(c.accuracy(), 0.57);
        assert_eq!(c.false_positive_rate(), 1.0);
    }

    #[test]
    fn lda_scores_are_posteriors() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 4.0, 5.0]);
        let m = crate::baselines::lda_fit(&x, &[0, 0, 1, 1], 2, 1e-6).unwrap();
        let preds = m.classify(&x, 1).unwrap();
        assert!(preds[0].score < 0.5 && preds[3].score > 0.5);
        let other = m.classify(&x, 0).unwrap();
        for (a, b) in preds.iter().zip(&other) {
            assert!((a.score + b.score - 1.0).abs() < 1e-12);
        }
        assert!(m.classify(&x, 2).is_err());
    }
}
