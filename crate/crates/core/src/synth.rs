//! Seeded synthetic mixtures with known component assignments.
//!
//! Randomness comes from ChaCha8 seeded with `seed`, a portable stream, so a
//! seed reproduces the same dataset on every platform. Draws happen in a single
//! stream: for each point, one uniform for the component, then `d` standard
//! normals; after all points, the labeled subset is sampled.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{select_rows, ApiVocabulary, Dataset};
use crate::error::{Error, Result};
use crate::gmm::CovarianceFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    /// Family the covariances are declared to follow, if any.
    pub family: Option<CovarianceFamily>,
    /// Total number of points.
    pub n: usize,
    /// Fraction of points that keep their label, in `(0, 1]`.
    pub label_fraction: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Two unit-variance spherical components `separation` apart along the first axis.
    pub fn two_spherical(
        d: usize,
        separation: f64,
        n: usize,
        label_fraction: f64,
        seed: u64,
    ) -> Self {
        let mut far = DVector::zeros(d);
        far[0] = separation;
        Self {
            weights: vec![0.5, 0.5],
            means: vec![DVector::zeros(d), far],
            covariances: vec![DMatrix::identity(d, d); 2],
            family: Some(CovarianceFamily::EII),
            n,
            label_fraction,
            seed,
        }
    }

    /// Two components sharing an equicorrelated covariance (unit variances,
    /// correlation `rho`), means `separation` apart along the first axis.
    pub fn two_correlated(
        d: usize,
        separation: f64,
        rho: f64,
        n: usize,
        label_fraction: f64,
        seed: u64,
    ) -> Self {
        let cov = DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { rho });
        let mut far = DVector::zeros(d);
        far[0] = separation;
        Self {
            weights: vec![0.5, 0.5],
            means: vec![DVector::zeros(d), far],
            covariances: vec![cov.clone(), cov],
            family: Some(CovarianceFamily::EEE),
            n,
            label_fraction,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, |m| m.len())
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.weights.len();
        if k == 0 || self.means.len() != k || self.covariances.len() != k {
            return Err(Error::InvalidArgument(
                "weights, means and covariances must have equal non-zero length".into(),
            ));
        }
        if self.weights.iter().any(|&w| w.is_nan() || w < 0.0) {
            return Err(Error::InvalidArgument("negative weight".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}")));
        }
        if !(self.label_fraction > 0.0 && self.label_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "label fraction {} outside (0, 1]",
                self.label_fraction
            )));
        }
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for (m, c) in self.means.iter().zip(&self.covariances) {
            if m.len() != d || c.nrows() != d || c.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: m.len(),
                });
            }
            if Cholesky::new(c.clone()).is_none() {
                return Err(Error::NotPositiveDefinite { epsilon: 0.0 });
            }
        }
        if let Some(family) = self.family {
            let covs: Vec<_> = self.covariances.iter().collect();
            if !family.conforms(&covs, 1e-8) {
                return Err(Error::InvalidArgument(format!(
                    "covariances do not follow family {family}"
                )));
            }
        }
        Ok(())
    }
}

/// Generated data plus the hidden truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub dataset: Dataset,
    /// True component of each unlabeled row.
    pub unlabeled_truth: Vec<usize>,
    /// Every point in generation order.
    pub features: DMatrix<f64>,
    pub assignments: Vec<usize>,
    /// Generation-order index of each labeled row, then of each unlabeled row.
    pub labeled_index: Vec<usize>,
    pub unlabeled_index: Vec<usize>,
}

pub fn sample_mixture(spec: &SynthSpec) -> Result<SyntheticSample> {
    spec.validate()?;
    let d = spec.dim();
    let k = spec.weights.len();
    let factors: Vec<DMatrix<f64>> = spec
        .covariances
        .iter()
        .map(|c| Cholesky::new(c.clone()).map(|ch| ch.l()))
        .collect::<Option<_>>()
        .ok_or(Error::NotPositiveDefinite { epsilon: 0.0 })?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut features = DMatrix::zeros(spec.n, d);
    let mut assignments = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut component = k - 1;
        for (c, &w) in spec.weights.iter().enumerate() {
            acc += w;
            if u < acc && w > 0.0 {
                component = c;
                break;
            }
        }
        // guard against round-off landing on a zero-weight tail
        while spec.weights[component] == 0.0 {
            component -= 1;
        }
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &spec.means[component] + &factors[component] * z;
        features.row_mut(i).copy_from(&x.transpose());
        assignments.push(component);
    }

    let n_labeled = ((spec.label_fraction * spec.n as f64).round() as usize).min(spec.n);
    let mut labeled_index = rand::seq::index::sample(&mut rng, spec.n, n_labeled).into_vec();
    labeled_index.sort_unstable();
    let mut is_labeled = vec![false; spec.n];
    for &i in &labeled_index {
        is_labeled[i] = true;
    }
    let unlabeled_index: Vec<usize> = (0..spec.n).filter(|&i| !is_labeled[i]).collect();

    let labels = labeled_index.iter().map(|&i| assignments[i]).collect();
    let unlabeled_truth = unlabeled_index.iter().map(|&i| assignments[i]).collect();
    let dataset = Dataset::new(
        select_rows(&features, &labeled_index),
        labels,
        select_rows(&features, &unlabeled_index),
        ApiVocabulary::generic(d)?,
        k,
    )?;
    Ok(SyntheticSample {
        dataset,
        unlabeled_truth,
        features,
        assignments,
        labeled_index,
        unlabeled_index,
    })
}

/// `n` points from component `component` of `spec` with its mean moved by
/// `shift`, drawn from their own stream seeded with `seed`.
pub fn sample_shifted(
    spec: &SynthSpec,
    component: usize,
    shift: &DVector<f64>,
    n: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if component >= spec.weights.len() {
        return Err(Error::InvalidLabel {
            label: component,
            n_classes: spec.weights.len(),
        });
    }
    if shift.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            actual: shift.len(),
        });
    }
    let single = SynthSpec {
        weights: vec![1.0],
        means: vec![&spec.means[component] + shift],
        covariances: vec![spec.covariances[component].clone()],
        family: None,
        n,
        label_fraction: 1.0,
        seed,
    };
    Ok(sample_mixture(&single)?.features)
}

/// Elementwise `x > threshold` as 0/1.
pub fn binarize(features: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    features.map(|v| if v > threshold { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_component_mean_converges() {
        let spec = SynthSpec {
            weights: vec![1.0],
            means: vec![DVector::from_row_slice(&[2.0, -1.0])],
            covariances: vec![DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0])],
            family: Some(CovarianceFamily::VVI),
            n: 10_000,
            label_fraction: 1.0,
            seed: 3,
        };
        let s = sample_mixture(&spec).unwrap();
        let mean = s.features.row_mean();
        // 3σ/√N bound per coordinate
        assert!((mean[0] - 2.0).abs() < 3.0 * 2.0 / 100.0);
        assert!((mean[1] + 1.0).abs() < 3.0 * 1.0 / 100.0);
        assert_eq!(s.dataset.n(), 10_000);
        assert_eq!(s.dataset.m(), 0);
    }

    #[test]
    fn zero_weight_component_never_drawn() {
        let mut spec = SynthSpec::two_spherical(2, 3.0, 500, 0.5, 1);
        spec.weights = vec![1.0, 0.0];
        let s = sample_mixture(&spec).unwrap();
        assert!(s.assignments.iter().all(|&c| c == 0));
    }

    #[test]
    fn well_separated_nearest_mean_is_perfect() {
        let spec = SynthSpec::two_spherical(2, 10.0, 400, 0.5, 11);
        let s = sample_mixture(&spec).unwrap();
        for (i, &truth) in s.assignments.iter().enumerate() {
            let x = s.features.row(i);
            let d0 = x.norm_squared();
            let d1 = (x[0] - 10.0).powi(2) + x[1] * x[1];
            assert_eq!(usize::from(d1 < d0), truth);
        }
    }

    #[test]
    fn proportions_within_binomial_bound() {
        let spec = SynthSpec {
            weights: vec![0.3, 0.7],
            ..SynthSpec::two_spherical(1, 1.0, 5000, 1.0, 5)
        };
        let s = sample_mixture(&spec).unwrap();
        let ones = s.assignments.iter().filter(|&&c| c == 1).count() as f64;
        let sd = (5000.0f64 * 0.3 * 0.7).sqrt();
        assert!((ones - 3500.0).abs() < 3.0 * sd);
    }

    #[test]
    fn same_seed_same_data() {
        let spec = SynthSpec::two_correlated(3, 2.0, 0.5, 200, 0.3, 42);
        assert_eq!(
            sample_mixture(&spec).unwrap(),
            sample_mixture(&spec).unwrap()
        );
        let other = SynthSpec {
            seed: 43,
            ..spec.clone()
        };
        assert_ne!(
            sample_mixture(&spec).unwrap().features,
            sample_mixture(&other).unwrap().features
        );
    }

    #[test]
    fn label_split_and_truth_are_consistent() {
        let spec = SynthSpec::two_spherical(2, 4.0, 100, 0.25, 9);
        let s = sample_mixture(&spec).unwrap();
        assert_eq!(s.dataset.n(), 25);
        assert_eq!(s.dataset.m(), 75);
        for (r, &i) in s.unlabeled_index.iter().enumerate() {
            assert_eq!(s.unlabeled_truth[r], s.assignments[i]);
            assert_eq!(s.dataset.unlabeled().row(r), s.features.row(i));
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = SynthSpec::two_spherical(2, 4.0, 100, 0.0, 9);
        assert!(sample_mixture(&spec).is_err());
        spec.label_fraction = 0.5;
        spec.weights = vec![0.6, 0.6];
        assert!(sample_mixture(&spec).is_err());
        spec.weights = vec![0.5, 0.5];
        spec.family = Some(CovarianceFamily::EII);
        spec.covariances[1] *= 2.0;
        assert!(sample_mixture(&spec).is_err());
    }

    #[test]
    fn binarize_thresholds() {
        let x = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.5, 3.0]);
        assert!(binarize(&x, f64::NEG_INFINITY).iter().all(|&v| v == 1.0));
        assert!(binarize(&x, f64::INFINITY).iter().all(|&v| v == 0.0));
        assert_eq!(
            binarize(&x, 0.0),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0])
        );
    }

    #[test]
    fn binarize_symmetric_data_is_half_ones() {
        let spec = SynthSpec {
            weights: vec![1.0],
            means: vec![DVector::zeros(4)],
            covariances: vec![DMatrix::identity(4, 4)],
            family: Some(CovarianceFamily::EII),
            n: 2500,
            label_fraction: 1.0,
            seed: 17,
        };
        let s = sample_mixture(&spec).unwrap();
        let b = binarize(&s.features, 0.0);
        let total = b.len() as f64;
        let ones = b.sum();
        assert!((ones - total / 2.0).abs() < 3.0 * (total * 0.25).sqrt());
    }
}
