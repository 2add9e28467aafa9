use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Default diagonal loading factor applied after every covariance estimate.
pub const DEFAULT_REGULARIZATION: f64 = 1e-6;
/// Largest loading factor tried before giving up.
pub const MAX_REGULARIZATION: f64 = 1e-2;

/// Mean, covariance and cached Cholesky factor of one Gaussian component.
#[derive(Debug, Clone)]
pub struct ComponentParams {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    chol: DMatrix<f64>,
    log_det: f64,
}

impl PartialEq for ComponentParams {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.covariance == other.covariance
    }
}

impl ComponentParams {
    /// Factorizes `covariance` as given; fails if it is not positive definite.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: covariance.nrows(),
            });
        }
        let chol = cholesky(&covariance).ok_or(Error::NotPositiveDefinite { epsilon: 0.0 })?;
        let l = chol.l();
        let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::NotPositiveDefinite { epsilon: 0.0 });
        }
        Ok(Self {
            mean,
            covariance,
            chol: l,
            log_det,
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Lower-triangular `L` with `L Lᵀ = Σ`.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// `log det Σ`, from the Cholesky diagonal.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Gaussian log density at `x`, via forward substitution on the Cholesky factor.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: x.len(),
            });
        }
        Ok(self.log_density_unchecked(x))
    }

    pub(crate) fn log_density_unchecked(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let l = &self.chol;
        let mut z = vec![0.0; d];
        let mut quad = 0.0;
        for i in 0..d {
            let mut acc = x[i] - self.mean[i];
            for j in 0..i {
                acc -= l[(i, j)] * z[j];
            }
            z[i] = acc / l[(i, i)];
            quad += z[i] * z[i];
        }
        -0.5 * (quad + d as f64 * (2.0 * PI).ln() + self.log_det)
    }
}

fn cholesky(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone())
}

/// Adds `ε·t` to the diagonal, `t = tr(Σ)/d`, escalating `ε` tenfold up to
/// [`MAX_REGULARIZATION`] until the Cholesky factorization succeeds.
///
/// A zero-trace estimate uses `t = 1`.
pub fn regularize(covariance: &DMatrix<f64>, epsilon: f64) -> Result<DMatrix<f64>> {
    let d = covariance.nrows();
    let mut t = covariance.trace() / d as f64;
    if !t.is_finite() || t <= 0.0 {
        t = 1.0;
    }
    // symmetrize against accumulated round-off
    let sym = (covariance + covariance.transpose()) * 0.5;
    let mut eps = epsilon;
    loop {
        let mut candidate = sym.clone();
        for i in 0..d {
            candidate[(i, i)] += eps * t;
        }
        if let Some(chol) = cholesky(&candidate) {
            if chol
                .l()
                .diagonal()
                .iter()
                .all(|&v| v > 0.0 && v.is_finite())
            {
                return Ok(candidate);
            }
        }
        if eps >= MAX_REGULARIZATION {
            return Err(Error::NotPositiveDefinite { epsilon: eps });
        }
        eps = (eps * 10.0).min(MAX_REGULARIZATION);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Direct formula with an explicit inverse and determinant.
    fn naive_log_density(mean: &[f64], cov: &DMatrix<f64>, x: &[f64]) -> f64 {
        let d = mean.len();
        let diff = DVector::from_iterator(d, x.iter().zip(mean).map(|(a, b)| a - b));
        let inv = cov.clone().try_inverse().unwrap();
        let quad = (diff.transpose() * inv * &diff)[(0, 0)];
        let det = (cov * (2.0 * PI)).determinant();
        (-0.5 * quad).exp().ln() - 0.5 * det.ln()
    }

    #[test]
    fn standard_normal_at_mode() {
        let c =
            ComponentParams::new(DVector::from_element(1, 0.0), DMatrix::identity(1, 1)).unwrap();
        assert_relative_eq!(
            c.log_density(&[0.0]).unwrap(),
            -0.918_938_533_204_672_8,
            epsilon = 1e-15
        );
        assert_relative_eq!(c.log_density(&[0.0]).unwrap(), -0.9189385, epsilon = 1e-7);
    }

    #[test]
    fn isotropic_two_d() {
        let c = ComponentParams::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        let expected = -(2.0 * PI).ln() - 1.0;
        assert_relative_eq!(
            c.log_density(&[1.0, 1.0]).unwrap(),
            expected,
            epsilon = 1e-14
        );
        assert_relative_eq!(expected, -2.8378771, epsilon = 1e-7);
    }

    #[test]
    fn diagonal_case_matches_explicit_inverse() {
        let mean = [1.0, 2.0];
        let cov = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0]);
        let c = ComponentParams::new(DVector::from_row_slice(&mean), cov.clone()).unwrap();
        let oracle = naive_log_density(&mean, &cov, &[3.0, 5.0]);
        assert_relative_eq!(c.log_density(&[3.0, 5.0]).unwrap(), oracle, epsilon = 1e-12);
        // quadratic form 1 + 1 = 2, det(2πΣ) = (2π)²·36
        let hand = -1.0 - 0.5 * ((2.0 * PI).powi(2) * 36.0).ln();
        assert_relative_eq!(oracle, hand, epsilon = 1e-12);
    }

    #[test]
    fn cached_log_det_matches_recomputation() {
        let cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 0.8]);
        let c = ComponentParams::new(DVector::zeros(3), cov.clone()).unwrap();
        let direct = cov.determinant().ln();
        assert!(((c.log_det() - direct) / direct).abs() < 1e-10);
    }

    #[test]
    fn dimension_and_pd_errors() {
        let c = ComponentParams::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(
            c.log_density(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        ));
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(ComponentParams::new(DVector::zeros(2), singular).is_err());
    }

    #[test]
    fn regularize_rescues_rank_deficient_scatter() {
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let r = regularize(&singular, 1e-6).unwrap();
        assert_relative_eq!(r[(0, 0)], 1.0 + 1e-6, epsilon = 1e-15);
        assert!(ComponentParams::new(DVector::zeros(2), r).is_ok());

        let zero = DMatrix::zeros(3, 3);
        let r = regularize(&zero, 1e-6).unwrap();
        assert_eq!(r, DMatrix::identity(3, 3) * 1e-6);
    }

    #[test]
    fn regularize_gives_up_on_indefinite_input() {
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        // trace 0 -> t = 1; largest loading 1e-2 cannot fix an eigenvalue of -1
        assert!(matches!(
            regularize(&indefinite, 1e-6),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
