//! API-call trace ingestion and the labeled/unlabeled dataset container.

mod csv_io;
mod log;
mod split;
mod vocab;

pub use self::log::{parse_log, ApiEvent, FeatureVector, ParseStats};
pub use self::split::{deduplicate, stratified_folds, Fold};
pub use self::vocab::ApiVocabulary;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Labeled block (features + class indices) and unlabeled block sharing one vocabulary.
///
/// Class indices are zero-based: `labels[i] < n_classes`. Rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    labeled: DMatrix<f64>,
    labels: Vec<usize>,
    unlabeled: DMatrix<f64>,
    vocabulary: ApiVocabulary,
    n_classes: usize,
    labeled_ids: Vec<String>,
    unlabeled_ids: Vec<String>,
}

impl Dataset {
    /// Builds a dataset with generated sample ids (`L0..`, `U0..`).
    pub fn new(
        labeled: DMatrix<f64>,
        labels: Vec<usize>,
        unlabeled: DMatrix<f64>,
        vocabulary: ApiVocabulary,
        n_classes: usize,
    ) -> Result<Self> {
        let labeled_ids = (0..labeled.nrows()).map(|i| format!("L{i}")).collect();
        let unlabeled_ids = (0..unlabeled.nrows()).map(|j| format!("U{j}")).collect();
        Self::with_ids(
            labeled,
            labels,
            unlabeled,
            vocabulary,
            n_classes,
            labeled_ids,
            unlabeled_ids,
        )
    }

    pub fn with_ids(
        labeled: DMatrix<f64>,
        labels: Vec<usize>,
        unlabeled: DMatrix<f64>,
        vocabulary: ApiVocabulary,
        n_classes: usize,
        labeled_ids: Vec<String>,
        unlabeled_ids: Vec<String>,
    ) -> Result<Self> {
        let d = vocabulary.len();
        for block in [&labeled, &unlabeled] {
            if block.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: block.ncols(),
                });
            }
        }
        if n_classes == 0 {
            return Err(Error::InvalidArgument("n_classes must be positive".into()));
        }
        if labels.len() != labeled.nrows() || labeled_ids.len() != labeled.nrows() {
            return Err(Error::InvalidArgument(format!(
                "{} labeled rows but {} labels and {} ids",
                labeled.nrows(),
                labels.len(),
                labeled_ids.len()
            )));
        }
        if unlabeled_ids.len() != unlabeled.nrows() {
            return Err(Error::InvalidArgument(format!(
                "{} unlabeled rows but {} ids",
                unlabeled.nrows(),
                unlabeled_ids.len()
            )));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidLabel { label, n_classes });
        }
        if labeled
            .iter()
            .chain(unlabeled.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::Format("non-finite feature value".into()));
        }
        Ok(Self {
            labeled,
            labels,
            unlabeled,
            vocabulary,
            n_classes,
            labeled_ids,
            unlabeled_ids,
        })
    }

    pub fn labeled(&self) -> &DMatrix<f64> {
        &self.labeled
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn unlabeled(&self) -> &DMatrix<f64> {
        &self.unlabeled
    }

    pub fn vocabulary(&self) -> &ApiVocabulary {
        &self.vocabulary
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn labeled_ids(&self) -> &[String] {
        &self.labeled_ids
    }

    pub fn unlabeled_ids(&self) -> &[String] {
        &self.unlabeled_ids
    }

    /// Number of labeled rows.
    pub fn n(&self) -> usize {
        self.labeled.nrows()
    }

    /// Number of unlabeled rows.
    pub fn m(&self) -> usize {
        self.unlabeled.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Errors unless every class has at least `min` labeled members.
    pub fn require_class_support(&self, min: usize) -> Result<()> {
        for (class, &count) in self.class_counts().iter().enumerate() {
            if count < min {
                return Err(Error::ClassTooSmall {
                    class,
                    count,
                    required: min,
                });
            }
        }
        Ok(())
    }

    /// True when every feature value is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.labeled
            .iter()
            .chain(self.unlabeled.iter())
            .all(|&v| v == 0.0 || v == 1.0)
    }

    /// Same vocabulary and classes, new blocks.
    pub fn with_blocks(
        &self,
        labeled: DMatrix<f64>,
        labels: Vec<usize>,
        unlabeled: DMatrix<f64>,
    ) -> Result<Self> {
        Self::new(
            labeled,
            labels,
            unlabeled,
            self.vocabulary.clone(),
            self.n_classes,
        )
    }
}

/// Rows `indices` of `m`, in the given order.
pub fn select_rows(m: &DMatrix<f64>, indices: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(indices.len(), m.ncols(), |r, c| m[(indices[r], c)])
}

/// Stacks two matrices with the same column count.
pub fn vstack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let (a, b) = (top.nrows(), bottom.nrows());
    DMatrix::from_fn(a + b, top.ncols(), |r, c| {
        if r < a {
            top[(r, c)]
        } else {
            bottom[(r - a, c)]
        }
    })
}

/// Builds a row-major matrix from feature vectors.
pub fn matrix_from_vectors(vectors: &[FeatureVector], d: usize) -> Result<DMatrix<f64>> {
    for v in vectors {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: v.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(vectors.len(), d, |r, c| {
        f64::from(vectors[r].bits()[c])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(d: usize) -> ApiVocabulary {
        ApiVocabulary::generic(d).unwrap()
    }

    #[test]
    fn rejects_out_of_range_labels() {
        let err = Dataset::new(
            DMatrix::zeros(2, 2),
            vec![0, 2],
            DMatrix::zeros(0, 2),
            vocab(2),
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidLabel { label: 2, .. }));
    }

    #[test]
    fn rejects_wrong_dimension() {
        let err = Dataset::new(
            DMatrix::zeros(1, 3),
            vec![0],
            DMatrix::zeros(0, 2),
            vocab(2),
            1,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                actual: 3
            }
        ));
    }

    #[test]
    fn class_support_check() {
        let ds = Dataset::new(
            DMatrix::zeros(3, 1),
            vec![0, 0, 1],
            DMatrix::zeros(0, 1),
            vocab(1),
            2,
        )
        .unwrap();
        assert_eq!(ds.class_counts(), vec![2, 1]);
        assert!(ds.require_class_support(1).is_ok());
        assert!(matches!(
            ds.require_class_support(2),
            Err(Error::ClassTooSmall {
                class: 1,
                count: 1,
                required: 2
            })
        ));
    }

    #[test]
    fn stacking_helpers() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let b = DMatrix::from_row_slice(2, 2, &[3.0, 4.0, 5.0, 6.0]);
        let s = vstack(&a, &b);
        assert_eq!(s.row(2)[1], 6.0);
        let picked = select_rows(&s, &[2, 0]);
        assert_eq!(picked.row(0)[0], 5.0);
        assert_eq!(picked.row(1)[1], 2.0);
    }
}
