//! Conditional expectation-maximization over labeled and unlabeled rows.
//!
//! Each iteration computes posterior memberships of the unlabeled rows under
//! the current mixture, hardens them by argmax (lowest class index on ties),
//! and re-estimates weights, means and family-constrained covariances from
//! the labeled rows (true labels) plus the hard-labeled unlabeled rows.
//! Labeled rows never change class.

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gmm::{
    complete_log_likelihood, log_responsibilities, observed_log_likelihood, regularize,
    ComponentParams, CovarianceFamily, Geometry, MixtureModel, DEFAULT_REGULARIZATION,
};
use crate::math::argmax;

/// How convergence is judged on the complete-data log-likelihood trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoppingRule {
    /// Aitken-accelerated estimate of the limiting log-likelihood; falls back to
    /// the plain difference until three values exist or when the rate is `>= 1`.
    Aitken,
    /// Absolute change between successive iterations.
    Delta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CemConfig {
    pub family: CovarianceFamily,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub regularization: f64,
    /// Recorded for reproducibility manifests. The fit itself draws no random numbers.
    pub seed: u64,
    pub stopping: StoppingRule,
}

impl Default for CemConfig {
    fn default() -> Self {
        Self {
            family: CovarianceFamily::VVV,
            tolerance: 1e-5,
            max_iterations: 1000,
            regularization: DEFAULT_REGULARIZATION,
            seed: 0,
            stopping: StoppingRule::Aitken,
        }
    }
}

impl CemConfig {
    pub fn with_family(family: CovarianceFamily) -> Self {
        Self {
            family,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !self.regularization.is_finite() || self.regularization <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "regularization must be positive, got {}",
                self.regularization
            )));
        }
        Ok(())
    }
}

/// Diagnostics for one E/CM pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub complete_loglik: f64,
    pub observed_loglik: f64,
    /// Unlabeled rows whose hard label differs from the previous pass
    /// (all `m` rows on the first pass).
    pub changed_labels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: MixtureModel,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
    /// Posterior memberships of the unlabeled rows under `model`, `m × K`.
    pub posteriors: DMatrix<f64>,
    /// Row argmax of `posteriors`.
    pub hard_labels: Vec<usize>,
    /// Complete-data log-likelihood of `model` with `hard_labels`.
    pub complete_loglik: f64,
    pub observed_loglik: f64,
}

impl FitResult {
    pub fn loglik_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.complete_loglik).collect()
    }

    /// Writes `iteration,complete_loglik,observed_loglik,n_changed_labels`.
    pub fn write_trace_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "iteration",
            "complete_loglik",
            "observed_loglik",
            "n_changed_labels",
        ])?;
        for r in &self.trace {
            w.write_record([
                r.iteration.to_string(),
                format!("{:?}", r.complete_loglik),
                format!("{:?}", r.observed_loglik),
                r.changed_labels.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Argmax per row; the lowest class index wins ties.
pub fn hard_assign(posteriors: &DMatrix<f64>) -> Vec<usize> {
    (0..posteriors.nrows())
        .map(|j| argmax(posteriors.row(j).transpose().as_slice()))
        .collect()
}

/// Discriminant-analysis starting point: estimates from the labeled rows only.
pub fn initialize(dataset: &Dataset, config: &CemConfig) -> Result<MixtureModel> {
    config.validate()?;
    dataset.require_class_support(2)?;
    let empty = DMatrix::zeros(0, dataset.dim());
    estimate(
        dataset.labeled(),
        dataset.labels(),
        &empty,
        &[],
        dataset.n_classes(),
        config.family,
        config.regularization,
        None,
    )
}

/// Posterior membership probabilities of `unlabeled` under `model`.
pub fn e_step(model: &MixtureModel, unlabeled: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(log_responsibilities(model, unlabeled)?.map(f64::exp))
}

/// Output of one conditional maximization step.
#[derive(Debug, Clone, PartialEq)]
pub struct CmStep {
    pub model: MixtureModel,
    pub hard_labels: Vec<usize>,
}

/// Hardens `posteriors` and re-estimates the mixture.
///
/// A component left with no rows keeps its weight floored at `1/(n+m)`
/// (then renormalized) and, for non-shared families, its previous mean and
/// covariance from `previous`.
pub fn cm_step(
    dataset: &Dataset,
    posteriors: &DMatrix<f64>,
    previous: &MixtureModel,
    config: &CemConfig,
) -> Result<CmStep> {
    if posteriors.nrows() != dataset.m() || posteriors.ncols() != dataset.n_classes() {
        return Err(Error::InvalidArgument(format!(
            "posterior matrix is {}x{}, expected {}x{}",
            posteriors.nrows(),
            posteriors.ncols(),
            dataset.m(),
            dataset.n_classes()
        )));
    }
    let hard_labels = hard_assign(posteriors);
    let model = estimate(
        dataset.labeled(),
        dataset.labels(),
        dataset.unlabeled(),
        &hard_labels,
        dataset.n_classes(),
        config.family,
        config.regularization,
        Some(previous),
    )?;
    Ok(CmStep { model, hard_labels })
}

/// Closed-form estimates from hard assignments. Rows are accumulated in
/// index order, labeled block first, so results are bit-reproducible.
#[allow(clippy::too_many_arguments)]
fn estimate(
    labeled: &DMatrix<f64>,
    labels: &[usize],
    unlabeled: &DMatrix<f64>,
    hard_labels: &[usize],
    k: usize,
    family: CovarianceFamily,
    epsilon: f64,
    previous: Option<&MixtureModel>,
) -> Result<MixtureModel> {
    let d = labeled.ncols();
    let total = labels.len() + hard_labels.len();
    let labeled_rows = labeled.transpose();
    let unlabeled_rows = unlabeled.transpose();
    let rows = || {
        labels
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, labeled_rows.column(i)))
            .chain(
                hard_labels
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| (c, unlabeled_rows.column(j))),
            )
    };

    let mut counts = vec![0usize; k];
    let mut sums = vec![DVector::<f64>::zeros(d); k];
    for (c, x) in rows() {
        counts[c] += 1;
        sums[c] += x;
    }

    let mut weights = vec![0.0; k];
    let mut means = Vec::with_capacity(k);
    for c in 0..k {
        if counts[c] == 0 {
            let prev = previous.ok_or(Error::ClassTooSmall {
                class: c,
                count: 0,
                required: 1,
            })?;
            weights[c] = 1.0 / total as f64;
            means.push(prev.components()[c].mean().clone());
        } else {
            weights[c] = counts[c] as f64 / total as f64;
            means.push(&sums[c] / counts[c] as f64);
        }
    }
    crate::gmm::normalize(&mut weights);

    let full = family.geometry() == Geometry::Full;
    let mut scatters = vec![DMatrix::<f64>::zeros(d, d); k];
    let mut diff = vec![0.0; d];
    for (c, x) in rows() {
        for (t, v) in diff.iter_mut().enumerate() {
            *v = x[t] - means[c][t];
        }
        let w = &mut scatters[c];
        if full {
            for a in 0..d {
                for b in a..d {
                    w[(a, b)] += diff[a] * diff[b];
                }
            }
        } else {
            for a in 0..d {
                w[(a, a)] += diff[a] * diff[a];
            }
        }
    }
    if full {
        for w in &mut scatters {
            w.fill_lower_triangle_with_upper_triangle();
        }
    }

    let covariances: Vec<DMatrix<f64>> = if family.is_shared() {
        let mut pooled = DMatrix::zeros(d, d);
        for (c, w) in scatters.iter().enumerate() {
            if counts[c] > 0 {
                pooled += w;
            }
        }
        let shared = regularize(&family.constrain(&pooled, total as f64), epsilon)?;
        vec![shared; k]
    } else {
        let mut out = Vec::with_capacity(k);
        for c in 0..k {
            if counts[c] == 0 {
                // previous is present: checked above
                out.push(previous.unwrap().components()[c].covariance().clone());
            } else {
                out.push(regularize(
                    &family.constrain(&scatters[c], counts[c] as f64),
                    epsilon,
                )?);
            }
        }
        out
    };

    let components = means
        .into_iter()
        .zip(covariances)
        .map(|(m, s)| ComponentParams::new(m, s))
        .collect::<Result<Vec<_>>>()?;
    MixtureModel::new(weights, components, family)
}

fn has_converged(trace: &[f64], tolerance: f64, rule: StoppingRule) -> bool {
    let g = trace.len();
    if g < 2 {
        return false;
    }
    let step = trace[g - 1] - trace[g - 2];
    if rule == StoppingRule::Delta || g < 3 {
        return step.abs() < tolerance;
    }
    let prev_step = trace[g - 2] - trace[g - 3];
    if prev_step == 0.0 {
        return step.abs() < tolerance;
    }
    let rate = step / prev_step;
    if !rate.is_finite() || rate >= 1.0 {
        return step.abs() < tolerance;
    }
    let asymptote = trace[g - 2] + step / (1.0 - rate);
    (asymptote - trace[g - 2]).abs() < tolerance
}

/// Runs CEM from the discriminant-analysis initialization.
pub fn fit(dataset: &Dataset, config: &CemConfig) -> Result<FitResult> {
    let mut model = initialize(dataset, config)?;
    let mut trace = Vec::new();
    let mut logliks = Vec::new();
    let mut previous_labels: Option<Vec<usize>> = None;
    let mut converged = false;

    for iteration in 1..=config.max_iterations {
        let posteriors = e_step(&model, dataset.unlabeled())?;
        let step = cm_step(dataset, &posteriors, &model, config)?;
        let complete = complete_log_likelihood(&step.model, dataset, &step.hard_labels)?;
        let observed = observed_log_likelihood(&step.model, dataset)?;
        let changed = match &previous_labels {
            Some(prev) => prev
                .iter()
                .zip(&step.hard_labels)
                .filter(|(a, b)| a != b)
                .count(),
            None => step.hard_labels.len(),
        };
        trace.push(IterationRecord {
            iteration,
            complete_loglik: complete,
            observed_loglik: observed,
            changed_labels: changed,
        });
        logliks.push(complete);
        model = step.model;
        previous_labels = Some(step.hard_labels);
        if has_converged(&logliks, config.tolerance, config.stopping) {
            converged = true;
            break;
        }
    }

    let posteriors = e_step(&model, dataset.unlabeled())?;
    let hard_labels = hard_assign(&posteriors);
    let complete_loglik = complete_log_likelihood(&model, dataset, &hard_labels)?;
    let observed_loglik = observed_log_likelihood(&model, dataset)?;
    Ok(FitResult {
        iterations: trace.len(),
        model,
        trace,
        converged,
        posteriors,
        hard_labels,
        complete_loglik,
        observed_loglik,
    })
}

/// Maximum-posterior labels and the posterior matrix for `x`.
pub fn predict(model: &MixtureModel, x: &DMatrix<f64>) -> Result<(Vec<usize>, DMatrix<f64>)> {
    let posteriors = e_step(model, x)?;
    Ok((hard_assign(&posteriors), posteriors))
}
