use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cohort {
    BenignIn,
    MaliciousIn,
    Oos,
}

impl Cohort {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BenignIn => "benign-in",
            Self::MaliciousIn => "malicious-in",
            Self::Oos => "oos",
        }
    }
}

/// Principal axes of a fitted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    mean: DVector<f64>,
    /// One unit direction per column, by decreasing variance. The
    /// largest-magnitude coordinate of each column is positive.
    directions: DMatrix<f64>,
    variances: Vec<f64>,
}

/// Eigen-decomposition of the sample covariance (n − 1 denominator).
pub fn fit_pca(x: &DMatrix<f64>, n_components: usize) -> Result<Pca> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::InvalidArgument("PCA needs at least two rows".into()));
    }
    if n_components == 0 || n_components > d {
        return Err(Error::InvalidArgument(format!(
            "{n_components} components requested for d = {d}"
        )));
    }
    let mean = x.row_mean().transpose();
    let centered = DMatrix::from_fn(n, d, |r, c| x[(r, c)] - mean[c]);
    let cov = (centered.transpose() * &centered) / (n - 1) as f64;
    if cov.trace() <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    order.truncate(n_components);

    let mut directions = DMatrix::zeros(d, n_components);
    for (j, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let lead = crate::math::argmax(&v.iter().map(|c| c.abs()).collect::<Vec<_>>());
        if v[lead] < 0.0 {
            v = -v;
        }
        directions.set_column(j, &v);
    }
    let variances = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    Ok(Pca {
        mean,
        directions,
        variances,
    })
}

impl Pca {
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn directions(&self) -> &DMatrix<f64> {
        &self.directions
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn n_components(&self) -> usize {
        self.directions.ncols()
    }

    /// Scores of each row on the retained directions.
    pub fn project(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: x.ncols(),
            });
        }
        let centered = DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| x[(r, c)] - self.mean[c]);
        Ok(centered * &self.directions)
    }

    pub fn reconstruct(&self, scores: &DMatrix<f64>) -> DMatrix<f64> {
        let back = scores * self.directions.transpose();
        DMatrix::from_fn(back.nrows(), back.ncols(), |r, c| {
            back[(r, c)] + self.mean[c]
        })
    }
}

/// Projected rows tagged by cohort, in-sample rows first.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaScatter {
    pub pca: Pca,
    pub scores: DMatrix<f64>,
    pub cohorts: Vec<Cohort>,
}

impl PcaScatter {
    /// Columns `PC1..PCc,cohort`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.scores.ncols())
            .map(|i| format!("PC{i}"))
            .collect();
        header.push("cohort".into());
        w.write_record(&header)?;
        for (r, cohort) in self.cohorts.iter().enumerate() {
            let mut rec: Vec<String> = self
                .scores
                .row(r)
                .iter()
                .map(|v| format!("{v:?}"))
                .collect();
            rec.push(cohort.as_str().into());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fits on the in-sample block only, then projects both blocks.
pub fn pca_project(
    in_sample: &DMatrix<f64>,
    labels: &[usize],
    positive: usize,
    out_of_sample: &DMatrix<f64>,
    n_components: usize,
) -> Result<PcaScatter> {
    if labels.len() != in_sample.nrows() {
        return Err(Error::InvalidArgument(
            "one label per in-sample row required".into(),
        ));
    }
    let total = in_sample.nrows() + out_of_sample.nrows();
    if n_components > total {
        return Err(Error::InvalidArgument(format!(
            "{n_components} components requested for {total} rows"
        )));
    }
    let pca = fit_pca(in_sample, n_components)?;
    let inner = pca.project(in_sample)?;
    let outer = pca.project(out_of_sample)?;
    let scores = crate::dataset::vstack(&inner, &outer);
    let mut cohorts: Vec<Cohort> = labels
        .iter()
        .map(|&l| {
            if l == positive {
                Cohort::MaliciousIn
            } else {
                Cohort::BenignIn
            }
        })
        .collect();
    cohorts.resize(total, Cohort::Oos);
    Ok(PcaScatter {
        pca,
        scores,
        cohorts,
    })
}
