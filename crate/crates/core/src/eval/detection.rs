use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{mean, sample_sd};

use super::{Classifier, Prediction};

/// Subsample fractions paired with Monte Carlo replicate counts.
#[derive(Debug, Clone, PartialEq)]
pub struct DrSchedule {
    fractions: Vec<f64>,
    replicates: Vec<usize>,
}

impl DrSchedule {
    pub fn new(fractions: Vec<f64>, replicates: Vec<usize>) -> Result<Self> {
        if fractions.is_empty() || fractions.len() != replicates.len() {
            return Err(Error::InvalidArgument(format!(
                "{} fractions but {} replicate counts",
                fractions.len(),
                replicates.len()
            )));
        }
        if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "fraction {f} not in (0, 1]"
            )));
        }
        if replicates.contains(&0) {
            return Err(Error::InvalidArgument(
                "replicate counts must be positive".into(),
            ));
        }
        Ok(Self {
            fractions,
            replicates,
        })
    }

    /// 0.1%, 1%, 20%, 50%, 90% and 100% with 50, 30, 20, 10, 5 and 1 replicates.
    pub fn standard() -> Self {
        Self {
            fractions: vec![0.001, 0.01, 0.2, 0.5, 0.9, 1.0],
            replicates: vec![50, 30, 20, 10, 5, 1],
        }
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn replicates(&self) -> &[usize] {
        &self.replicates
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrPoint {
    pub fraction: f64,
    pub sample_size: usize,
    /// One detection rate per replicate.
    pub rates: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

/// Detection-rate sweep over precomputed predictions on an all-positive test
/// set. Each replicate draws `round(fraction · N)` rows without replacement;
/// fractions that round to zero rows are skipped. One generator seeded with
/// `seed` serves the whole sweep in schedule order.
pub fn detection_rate_from_predictions(
    predictions: &[Prediction],
    positive: usize,
    schedule: &DrSchedule,
    seed: u64,
) -> Result<Vec<DrPoint>> {
    let n = predictions.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty detection test set".into()));
    }
    let hit: Vec<bool> = predictions
        .iter()
        .map(|p| p.label == Some(positive))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (&fraction, &reps) in schedule.fractions.iter().zip(&schedule.replicates) {
        let size = (fraction * n as f64).round() as usize;
        if size == 0 {
            log::warn!("fraction {fraction} of {n} samples is empty; skipped");
            continue;
        }
        let rates: Vec<f64> = (0..reps)
            .map(|_| {
                let flagged = sample(&mut rng, n, size).iter().filter(|&i| hit[i]).count();
                flagged as f64 / size as f64
            })
            .collect();
        out.push(DrPoint {
            fraction,
            sample_size: size,
            mean: mean(&rates),
            sd: sample_sd(&rates),
            rates,
        });
    }
    Ok(out)
}

/// Classifies `test` (every row taken as positive) and runs the sweep.
pub fn detection_rate(
    classifier: &dyn Classifier,
    test: &DMatrix<f64>,
    positive: usize,
    schedule: &DrSchedule,
    seed: u64,
) -> Result<Vec<DrPoint>> {
    let preds = classifier.classify(test, positive)?;
    detection_rate_from_predictions(&preds, positive, schedule, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preds(labels: &[usize]) -> Vec<Prediction> {
        labels
            .iter()
            .map(|&l| Prediction {
                label: Some(l),
                score: l as f64,
            })
            .collect()
    }

    #[test]
    fn everything_flagged() {
        let p = preds(&[1; 2000]);
        for pt in detection_rate_from_predictions(&p, 1, &DrSchedule::standard(), 4).unwrap() {
            assert!(pt.rates.iter().all(|&r| r == 1.0));
            assert_eq!(pt.sd, 0.0);
        }
    }

    #[test]
    fn full_set_single_replicate_is_exact() {
        let labels: Vec<usize> = (0..333).map(|i| usize::from(i % 3 != 0)).collect();
        let p = preds(&labels);
        let full = DrSchedule::new(vec![1.0], vec![1]).unwrap();
        for seed in 0..5 {
            let r = detection_rate_from_predictions(&p, 1, &full, seed).unwrap();
            assert_eq!(r[0].mean, 222.0 / 333.0);
        }
        let a = detection_rate_from_predictions(&p, 1, &DrSchedule::standard(), 11).unwrap();
        let b = detection_rate_from_predictions(&p, 1, &DrSchedule::standard(), 11).unwrap();
        assert_eq!(a, b);
        // 0.1% of 333 rounds to zero
        assert_eq!(a.len(), 5);
        assert_eq!(a[0].fraction, 0.01);
        assert_eq!(a[0].sample_size, 3);
        assert_eq!(a[0].rates.len(), 30);
    }

    #[test]
    fn ties_are_misses() {
        let p = vec![
            Prediction {
                label: None,
                score: 0.5
            };
            4
        ];
        let full = DrSchedule::new(vec![1.0], vec![1]).unwrap();
        assert_eq!(
            detection_rate_from_predictions(&p, 1, &full, 0).unwrap()[0].mean,
            0.0
        );
    }

    #[test]
    fn schedule_validation() {
        assert!(DrSchedule::new(vec![0.1, 0.2], vec![1]).is_err());
        assert!(DrSchedule::new(vec![0.0], vec![1]).is_err());
        assert!(DrSchedule::new(vec![1.5], vec![1]).is_err());
        assert!(DrSchedule::new(vec![0.5], vec![0]).is_err());
        assert!(detection_rate_from_predictions(&[], 1, &DrSchedule::standard(), 0).is_err());
    }
}
