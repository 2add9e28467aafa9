use nalgebra::DMatrix;

use super::MixtureModel;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::math::log_sum_exp;

fn check_dim(model: &MixtureModel, x: &DMatrix<f64>) -> Result<()> {
    if x.ncols() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: x.ncols(),
        });
    }
    Ok(())
}

/// `log π_k + log f(x_j | θ_k)` for every row `j` and component `k`.
pub fn log_joint(model: &MixtureModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_dim(model, x)?;
    let rows = x.transpose();
    let log_weights: Vec<f64> = model.weights().iter().map(|w| w.ln()).collect();
    let mut out = DMatrix::zeros(x.nrows(), model.k());
    for j in 0..x.nrows() {
        let row = rows.column(j);
        let row = row.as_slice();
        for (k, comp) in model.components().iter().enumerate() {
            out[(j, k)] = log_weights[k] + comp.log_density_unchecked(row);
        }
    }
    Ok(out)
}

/// Log posterior membership `log w_jk`, normalized per row with log-sum-exp.
pub fn log_responsibilities(model: &MixtureModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut joint = log_joint(model, x)?;
    let k = model.k();
    let mut buf = vec![0.0; k];
    for j in 0..joint.nrows() {
        for (c, b) in buf.iter_mut().enumerate() {
            *b = joint[(j, c)];
        }
        let norm = log_sum_exp(&buf);
        for c in 0..k {
            joint[(j, c)] -= norm;
        }
    }
    Ok(joint)
}

fn labeled_term(model: &MixtureModel, dataset: &Dataset) -> Result<f64> {
    if dataset.n_classes() > model.k() {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} classes, model has {} components",
            dataset.n_classes(),
            model.k()
        )));
    }
    let joint = log_joint(model, dataset.labeled())?;
    Ok(dataset
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &l)| joint[(i, l)])
        .sum())
}

/// Complete-data log-likelihood with the unlabeled rows assigned to `hard_labels`.
pub fn complete_log_likelihood(
    model: &MixtureModel,
    dataset: &Dataset,
    hard_labels: &[usize],
) -> Result<f64> {
    if hard_labels.len() != dataset.m() {
        return Err(Error::InvalidArgument(format!(
            "{} hard labels for {} unlabeled rows",
            hard_labels.len(),
            dataset.m()
        )));
    }
    if let Some(&label) = hard_labels.iter().find(|&&l| l >= model.k()) {
        return Err(Error::InvalidLabel {
            label,
            n_classes: model.k(),
        });
    }
    let labeled = labeled_term(model, dataset)?;
    let joint = log_joint(model, dataset.unlabeled())?;
    let unlabeled: f64 = hard_labels
        .iter()
        .enumerate()
        .map(|(j, &l)| joint[(j, l)])
        .sum();
    Ok(labeled + unlabeled)
}

/// Observed-data (training) log-likelihood: unlabeled memberships marginalized.
pub fn observed_log_likelihood(model: &MixtureModel, dataset: &Dataset) -> Result<f64> {
    let labeled = labeled_term(model, dataset)?;
    let joint = log_joint(model, dataset.unlabeled())?;
    let unlabeled: f64 = (0..joint.nrows())
        .map(|j| log_sum_exp(joint.row(j).transpose().as_slice()))
        .sum();
    Ok(labeled + unlabeled)
}
