use crate::baselines::{lda_fit, KnnModel};
use crate::dataset::{select_rows, stratified_folds, Dataset};
use crate::error::Result;
use crate::gmm::CovarianceFamily;
use crate::math::{mean, sample_sd};
use crate::model_select::select_model;

use super::{roc_auc, Classifier, ClassifierSpec, ConfusionCounts, Prediction, RocCurve};

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub confusion: ConfusionCounts,
    pub accuracy: f64,
    pub fpr: f64,
    /// `None` if the fold holds a single class.
    pub auc: Option<f64>,
    /// Family chosen by BIC, MBSS only.
    pub family: Option<CovarianceFamily>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub classifier: String,
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    pub mean_fpr: f64,
    pub sd_fpr: f64,
    pub ties: usize,
    /// Pooled over all out-of-fold scores.
    pub roc: RocCurve,
    /// Out-of-fold predictions indexed like the labeled rows.
    pub predictions: Vec<Prediction>,
}

impl CvReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }

    pub fn fprs(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.fpr).collect()
    }
}

/// Stratified k-fold cross-validation over the labeled rows of `dataset`.
///
/// For MBSS the held-out fold is passed to the fit as its unlabeled block and
/// predictions are the converged hard labels; baselines see the training
/// folds only. The dataset's own unlabeled rows are not used.
pub fn cross_validate(
    dataset: &Dataset,
    spec: &ClassifierSpec,
    folds: usize,
    seed: u64,
    positive: usize,
) -> Result<CvReport> {
    super::check_positive(positive, dataset.n_classes())?;
    let splits = stratified_folds(dataset.labels(), dataset.n_classes(), folds, seed)?;
    let mut predictions = vec![
        Prediction {
            label: None,
            score: f64::NAN
        };
        dataset.n()
    ];
    let mut results = Vec::with_capacity(folds);
    for (index, split) in splits.iter().enumerate() {
        let train_x = select_rows(dataset.labeled(), &split.train);
        let train_y: Vec<usize> = split.train.iter().map(|&i| dataset.labels()[i]).collect();
        let test_x = select_rows(dataset.labeled(), &split.test);
        let test_y: Vec<usize> = split.test.iter().map(|&i| dataset.labels()[i]).collect();

        let mut family = None;
        let preds = match spec {
            ClassifierSpec::Mbss { families, config } => {
                let fold_data = dataset.with_blocks(train_x, train_y, test_x)?;
                let best = select_model(&fold_data, families, config)?.into_best();
                family = Some(best.family);
                best.fit
                    .hard_labels
                    .iter()
                    .enumerate()
                    .map(|(j, &l)| Prediction {
                        label: Some(l),
                        score: best.fit.posteriors[(j, positive)],
                    })
                    .collect()
            }
            ClassifierSpec::Knn { k } => {
                KnnModel::new(&train_x, &train_y, dataset.n_classes(), *k)?
                    .classify(&test_x, positive)?
            }
            ClassifierSpec::Lda { regularization } => {
                lda_fit(&train_x, &train_y, dataset.n_classes(), *regularization)?
                    .classify(&test_x, positive)?
            }
        };

        let confusion = ConfusionCounts::tally(&test_y, &preds, positive)?;
        let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
        let truth: Vec<bool> = test_y.iter().map(|&t| t == positive).collect();
        let auc = roc_auc(&scores, &truth)?.auc;
        for (&row, p) in split.test.iter().zip(&preds) {
            predictions[row] = *p;
        }
        log::info!(
            "fold {index}: accuracy {:.4}, fpr {:.4}",
            confusion.accuracy(),
            confusion.false_positive_rate()
        );
        results.push(FoldResult {
            fold: index,
            accuracy: confusion.accuracy(),
            fpr: confusion.false_positive_rate(),
            confusion,
            auc,
            family,
        });
    }

    let scores: Vec<f64> = predictions.iter().map(|p| p.score).collect();
    let truth: Vec<bool> = dataset.labels().iter().map(|&t| t == positive).collect();
    let roc = roc_auc(&scores, &truth)?;
    let acc: Vec<f64> = results.iter().map(|f| f.accuracy).collect();
    let fpr: Vec<f64> = results.iter().map(|f| f.fpr).collect();
    Ok(CvReport {
        classifier: spec.name(),
        mean_accuracy: mean(&acc),
        sd_accuracy: sample_sd(&acc),
        mean_fpr: mean(&fpr),
        sd_fpr: sample_sd(&fpr),
        ties: results.iter().map(|f| f.confusion.ties).sum(),
        folds: results,
        roc,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cem::CemConfig;
    use crate::synth::{sample_mixture, SynthSpec};

    fn separable() -> Dataset {
        let s = sample_mixture(&SynthSpec::two_spherical(3, 12.0, 200, 1.0, 5)).unwrap();
        s.dataset
    }

    #[test]
    fn perfect_on_separable_data() {
        let data = separable();
        for spec in [
            ClassifierSpec::Lda {
                regularization: 1e-6,
            },
            ClassifierSpec::Knn { k: 3 },
            ClassifierSpec::Mbss {
                families: vec![CovarianceFamily::EII, CovarianceFamily::VVV],
                config: CemConfig::default(),
            },
        ] {
            let r = cross_validate(&data, &spec, 10, 1, 1).unwrap();
            assert_eq!(r.folds.len(), 10);
            assert_eq!(r.mean_accuracy, 1.0, "{}", spec.name());
            assert_eq!(r.sd_accuracy, 0.0);
            assert_eq!(r.mean_fpr, 0.0);
            assert_eq!(r.roc.auc, Some(1.0));
            let total: usize = r.folds.iter().map(|f| f.confusion.total()).sum();
            assert_eq!(total, data.n());
        }
    }

    #[test]
    fn aggregates_recompute_from_folds() {
        let s = sample_mixture(&SynthSpec::two_spherical(2, 1.5, 150, 1.0, 9)).unwrap();
        let r = cross_validate(&s.dataset, &ClassifierSpec::Knn { k: 3 }, 5, 3, 1).unwrap();
        assert!((mean(&r.accuracies()) - r.mean_accuracy).abs() < 1e-12);
        assert!((sample_sd(&r.fprs()) - r.sd_fpr).abs() < 1e-12);
        assert!(r.mean_accuracy < 1.0);
        let again = cross_validate(&s.dataset, &ClassifierSpec::Knn { k: 3 }, 5, 3, 1).unwrap();
        assert_eq!(r, again);
    }
}
