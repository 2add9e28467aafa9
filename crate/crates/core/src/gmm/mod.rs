//! Finite Gaussian mixtures under constrained covariance families.
//!
//! All density arithmetic runs in log space on Cholesky factors; binary
//! feature vectors in a few hundred dimensions underflow direct products.

mod component;
mod family;
mod io;
mod likelihood;

pub use self::component::{
    regularize, ComponentParams, DEFAULT_REGULARIZATION, MAX_REGULARIZATION,
};
pub use self::family::{parameter_count, parse_family_list, CovarianceFamily, Geometry};
pub use self::likelihood::{
    complete_log_likelihood, log_joint, log_responsibilities, observed_log_likelihood,
};

use crate::error::{Error, Result};

/// Tolerance for the weight simplex check.
const WEIGHT_TOL: f64 = 1e-12;
/// Relative tolerance for family structure checks.
const FAMILY_TOL: f64 = 1e-8;

/// Mixture weights, components and the declared covariance family.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    weights: Vec<f64>,
    components: Vec<ComponentParams>,
    family: CovarianceFamily,
}

impl MixtureModel {
    pub fn new(
        weights: Vec<f64>,
        components: Vec<ComponentParams>,
        family: CovarianceFamily,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidArgument(
                "mixture weights must be non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidArgument(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        let d = components[0].dim();
        if let Some(c) = components.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: c.dim(),
            });
        }
        let covs: Vec<_> = components.iter().map(|c| c.covariance()).collect();
        if !family.conforms(&covs, FAMILY_TOL) {
            return Err(Error::InvalidArgument(format!(
                "covariances do not conform to family {family}"
            )));
        }
        Ok(Self {
            weights,
            components,
            family,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ComponentParams] {
        &self.components
    }

    pub fn family(&self) -> CovarianceFamily {
        self.family
    }

    /// Number of components.
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn parameter_count(&self) -> usize {
        parameter_count(self.family, self.k(), self.dim())
    }
}

/// Scales non-negative values to sum to one.
pub(crate) fn normalize(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn comp(mean: &[f64], var: f64) -> ComponentParams {
        let d = mean.len();
        ComponentParams::new(DVector::from_row_slice(mean), DMatrix::identity(d, d) * var).unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        let c = vec![comp(&[0.0], 1.0), comp(&[1.0], 1.0)];
        assert!(MixtureModel::new(vec![0.5, 0.6], c.clone(), CovarianceFamily::EII).is_err());
        assert!(MixtureModel::new(vec![-0.5, 1.5], c.clone(), CovarianceFamily::EII).is_err());
        assert!(MixtureModel::new(vec![1.0], c.clone(), CovarianceFamily::EII).is_err());
        assert!(MixtureModel::new(vec![0.5, 0.5], c, CovarianceFamily::EII).is_ok());
    }

    #[test]
    fn rejects_family_violation() {
        let c = vec![comp(&[0.0, 0.0], 1.0), comp(&[1.0, 1.0], 2.0)];
        assert!(MixtureModel::new(vec![0.5, 0.5], c.clone(), CovarianceFamily::EII).is_err());
        let m = MixtureModel::new(vec![0.5, 0.5], c, CovarianceFamily::VII).unwrap();
        assert_eq!(m.parameter_count(), 1 + 4 + 2);
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let c = vec![comp(&[0.0], 1.0), comp(&[1.0, 1.0], 1.0)];
        assert!(matches!(
            MixtureModel::new(vec![0.5, 0.5], c, CovarianceFamily::VVV),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
