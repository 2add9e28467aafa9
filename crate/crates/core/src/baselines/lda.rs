use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::gmm::regularize;
use crate::math::argmax;

/// Linear discriminant analysis with a pooled within-class covariance.
///
/// The pooled covariance is the maximum-likelihood estimate `W / n`, loaded
/// with the same `ε·tr/d` diagonal term as the mixture estimators, so the
/// decision rule coincides with a shared-full-covariance mixture fitted to
/// the labeled rows.
#[derive(Debug, Clone)]
pub struct LdaModel {
    means: Vec<DVector<f64>>,
    covariance: DMatrix<f64>,
    log_priors: Vec<f64>,
    // Σ⁻¹ μ_k and -½ μ_kᵀ Σ⁻¹ μ_k + log π_k
    coef: Vec<DVector<f64>>,
    offset: Vec<f64>,
}

pub fn lda_fit(
    features: &DMatrix<f64>,
    labels: &[usize],
    n_classes: usize,
    epsilon: f64,
) -> Result<LdaModel> {
    let (n, d) = features.shape();
    if labels.len() != n {
        return Err(Error::InvalidArgument("one label per row required".into()));
    }
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        if l >= n_classes {
            return Err(Error::InvalidLabel {
                label: l,
                n_classes,
            });
        }
        counts[l] += 1;
    }
    for (class, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(Error::ClassTooSmall {
                class,
                count,
                required: 2,
            });
        }
    }

    let mut means = vec![DVector::zeros(d); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        means[l] += features.row(i).transpose();
    }
    for (m, &c) in means.iter_mut().zip(&counts) {
        *m /= c as f64;
    }
    let mut within = DMatrix::zeros(d, d);
    for (i, &l) in labels.iter().enumerate() {
        let diff = features.row(i).transpose() - &means[l];
        within += &diff * diff.transpose();
    }
    let covariance = regularize(&(within / n as f64), epsilon)?;
    let chol: Cholesky<f64, Dyn> =
        Cholesky::new(covariance.clone()).ok_or(Error::NotPositiveDefinite { epsilon })?;

    let log_priors: Vec<f64> = counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect();
    let coef: Vec<DVector<f64>> = means.iter().map(|m| chol.solve(m)).collect();
    let offset = means
        .iter()
        .zip(&coef)
        .zip(&log_priors)
        .map(|((m, a), lp)| -0.5 * m.dot(a) + lp)
        .collect();
    Ok(LdaModel {
        means,
        covariance,
        log_priors,
        coef,
        offset,
    })
}

impl LdaModel {
    pub fn n_classes(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn log_priors(&self) -> &[f64] {
        &self.log_priors
    }

    /// Linear discriminant scores `xᵀΣ⁻¹μ_k − ½μ_kᵀΣ⁻¹μ_k + log π_k`.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(self
            .coef
            .iter()
            .zip(&self.offset)
            .map(|(a, b)| a.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + b)
            .collect())
    }

    /// Highest-scoring class (lowest index on ties) and the scores.
    pub fn predict(&self, x: &[f64]) -> Result<(usize, Vec<f64>)> {
        let s = self.scores(x)?;
        Ok((argmax(&s), s))
    }

    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Result<Vec<(usize, Vec<f64>)>> {
        let rows = x.transpose();
        (0..x.nrows())
            .map(|j| self.predict(rows.column(j).as_slice()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perpendicular_bisector() {
        // class means (0,0) and (2,0); scatter chosen so W/n = I before loading
        let x = DMatrix::from_row_slice(4, 2, &[-1.0, -1.0, 1.0, 1.0, 1.0, -1.0, 3.0, 1.0]);
        let m = lda_fit(&x, &[0, 0, 1, 1], 2, 1e-6).unwrap();
        assert_eq!(m.means()[1].as_slice(), &[2.0, 0.0]);
        assert_eq!(m.predict(&[0.9, 5.0]).unwrap().0, 0);
        assert_eq!(m.predict(&[1.1, -5.0]).unwrap().0, 1);
    }

    #[test]
    fn equal_means_follow_prior() {
        let x = DMatrix::from_row_slice(
            12,
            1,
            &[
                -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -2.0, 2.0,
            ],
        );
        let labels = [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1];
        let m = lda_fit(&x, &labels, 2, 1e-6).unwrap();
        for q in [-10.0, -1.0, 0.0, 3.0, 50.0] {
            assert_eq!(m.predict(&[q]).unwrap().0, 0);
        }
    }

    #[test]
    fn too_few_rows_per_class() {
        let x = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        assert!(matches!(
            lda_fit(&x, &[0, 0, 1], 2, 1e-6),
            Err(Error::ClassTooSmall { class: 1, .. })
        ));
    }

    /// Plug-in Bayes rule with explicit inverse and determinant, evaluated
    /// under the fitted Gaussians.
    fn bayes_label(m: &LdaModel, x: &[f64]) -> usize {
        let inv = m.covariance().clone().try_inverse().unwrap();
        let xv = DVector::from_row_slice(x);
        let post: Vec<f64> = m
            .means()
            .iter()
            .zip(m.log_priors())
            .map(|(mu, lp)| {
                let diff = &xv - mu;
                lp - 0.5 * (diff.transpose() * &inv * &diff)[(0, 0)]
            })
            .collect();
        argmax(&post)
    }

    #[test]
    fn agrees_with_plug_in_bayes_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 200;
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i % 3 == 0)).collect();
        let x = DMatrix::from_fn(n, 4, |r, c| {
            let shift = if labels[r] == 1 && c < 2 { 1.5 } else { 0.0 };
            shift + rng.random::<f64>() * 2.0 - 1.0
        });
        let m = lda_fit(&x, &labels, 2, 1e-6).unwrap();
        for _ in 0..500 {
            let q: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 4.0 - 1.5).collect();
            assert_eq!(m.predict(&q).unwrap().0, bayes_label(&m, &q));
        }
    }

    #[test]
    fn shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let labels: Vec<usize> = (0..60).map(|i| i % 2).collect();
        let x = DMatrix::from_fn(60, 3, |r, _| rng.random::<f64>() + labels[r] as f64 * 0.7);
        let shift = DVector::from_row_slice(&[3.0, -7.0, 0.25]);
        let xs = DMatrix::from_fn(60, 3, |r, c| x[(r, c)] + shift[c]);
        let a = lda_fit(&x, &labels, 2, 1e-6).unwrap();
        let b = lda_fit(&xs, &labels, 2, 1e-6).unwrap();
        for _ in 0..200 {
            let q: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 0.5).collect();
            let qs: Vec<f64> = q.iter().zip(shift.iter()).map(|(u, s)| u + s).collect();
            assert_eq!(a.predict(&q).unwrap().0, b.predict(&qs).unwrap().0);
        }
    }
}
