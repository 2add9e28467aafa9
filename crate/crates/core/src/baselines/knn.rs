use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Majority-vote result. Vote ties are reported, not broken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnOutcome {
    Label(usize),
    AmbiguousTie,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnPrediction {
    pub outcome: KnnOutcome,
    /// Votes per class among the neighbourhood (which may exceed `k` on distance ties).
    pub votes: Vec<usize>,
}

impl KnnPrediction {
    pub fn label(&self) -> Option<usize> {
        match self.outcome {
            KnnOutcome::Label(l) => Some(l),
            KnnOutcome::AmbiguousTie => None,
        }
    }

    /// Fraction of the neighbourhood voting for `class`.
    pub fn vote_share(&self, class: usize) -> f64 {
        let total: usize = self.votes.iter().sum();
        self.votes[class] as f64 / total as f64
    }
}

/// Stored training set; distance is squared Euclidean (the Hamming count on 0/1 data).
#[derive(Debug, Clone)]
pub struct KnnModel {
    rows: DMatrix<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    k: usize,
}

impl KnnModel {
    pub fn new(
        features: &DMatrix<f64>,
        labels: &[usize],
        n_classes: usize,
        k: usize,
    ) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "kNN needs a non-empty training set".into(),
            ));
        }
        if labels.len() != features.nrows() {
            return Err(Error::InvalidArgument(
                "one label per training row required".into(),
            ));
        }
        if k == 0 || k > features.nrows() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} must be in 1..={}",
                features.nrows()
            )));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidLabel { label, n_classes });
        }
        Ok(Self {
            rows: features.transpose(),
            labels: labels.to_vec(),
            n_classes,
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Votes among the `k` nearest points plus every point tied with the `k`-th.
    pub fn predict(&self, x: &[f64]) -> Result<KnnPrediction> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let mut dist: Vec<(f64, usize)> = (0..self.rows.ncols())
            .map(|i| {
                let d2 = self
                    .rows
                    .column(i)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                (d2, i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let radius = dist[self.k - 1].0;
        let mut votes = vec![0usize; self.n_classes];
        for &(d2, i) in dist.iter().take_while(|(d2, _)| *d2 <= radius) {
            debug_assert!(d2 <= radius);
            votes[self.labels[i]] += 1;
        }
        let top = *votes.iter().max().unwrap();
        let winners: Vec<usize> = (0..self.n_classes).filter(|&c| votes[c] == top).collect();
        let outcome = if winners.len() == 1 {
            KnnOutcome::Label(winners[0])
        } else {
            KnnOutcome::AmbiguousTie
        };
        Ok(KnnPrediction { outcome, votes })
    }

    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Result<Vec<KnnPrediction>> {
        let rows = x.transpose();
        (0..x.nrows())
            .map(|j| self.predict(rows.column(j).as_slice()))
            .collect()
    }
}
