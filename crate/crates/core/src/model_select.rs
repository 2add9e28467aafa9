//! Covariance-family selection by BIC.
//!
//! `BIC = 2·log L − ln(N)·p`, larger is better. The score uses the
//! complete-data log-likelihood at convergence; the observed-data variant is
//! carried alongside for diagnostics.

use std::io::Write;

use crate::cem::{fit, CemConfig, FitResult};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gmm::{parameter_count, CovarianceFamily};

pub fn bic(loglik: f64, n_obs: usize, n_params: usize) -> f64 {
    2.0 * loglik - (n_obs as f64).ln() * n_params as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelScore {
    pub family: CovarianceFamily,
    pub bic: f64,
    pub loglik: f64,
    pub param_count: usize,
    pub observed_bic: f64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyFailure {
    pub family: CovarianceFamily,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    best: usize,
    pub scores: Vec<ModelScore>,
    pub failures: Vec<FamilyFailure>,
}

impl Selection {
    pub fn best(&self) -> &ModelScore {
        &self.scores[self.best]
    }

    pub fn best_index(&self) -> usize {
        self.best
    }

    pub fn into_best(mut self) -> ModelScore {
        self.scores.swap_remove(self.best)
    }

    /// `family,converged,iterations,loglik,params,bic,selected,observed_loglik,observed_bic`
    pub fn write_report_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "family",
            "converged",
            "iterations",
            "loglik",
            "params",
            "bic",
            "selected",
            "observed_loglik",
            "observed_bic",
        ])?;
        for (i, s) in self.scores.iter().enumerate() {
            w.write_record([
                s.family.to_string(),
                s.fit.converged.to_string(),
                s.fit.iterations.to_string(),
                format!("{:?}", s.loglik),
                s.param_count.to_string(),
                format!("{:?}", s.bic),
                (i == self.best).to_string(),
                format!("{:?}", s.fit.observed_loglik),
                format!("{:?}", s.observed_bic),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scores one finished fit.
pub fn score(family: CovarianceFamily, dataset: &Dataset, fit: FitResult) -> ModelScore {
    let n_obs = dataset.n() + dataset.m();
    let p = parameter_count(family, fit.model.k(), fit.model.dim());
    ModelScore {
        family,
        bic: bic(fit.complete_loglik, n_obs, p),
        loglik: fit.complete_loglik,
        param_count: p,
        observed_bic: bic(fit.observed_loglik, n_obs, p),
        fit,
    }
}

/// Fits every family and keeps the largest BIC. Ties go to fewer parameters,
/// then to the earlier family in `families`. Families whose fit fails are
/// reported in `failures`.
pub fn select_model(
    dataset: &Dataset,
    families: &[CovarianceFamily],
    config: &CemConfig,
) -> Result<Selection> {
    if families.is_empty() {
        return Err(Error::InvalidArgument("no candidate families".into()));
    }
    config.validate()?;
    let mut scores: Vec<ModelScore> = Vec::new();
    let mut failures = Vec::new();
    for &family in families {
        let cfg = CemConfig {
            family,
            ..config.clone()
        };
        match fit(dataset, &cfg) {
            Ok(result) => scores.push(score(family, dataset, result)),
            // precondition failures hit every family alike
            Err(e @ (Error::ClassTooSmall { .. } | Error::DimensionMismatch { .. })) => {
                return Err(e)
            }
            Err(e) => {
                log::warn!("family {family} failed: {e}");
                failures.push(FamilyFailure {
                    family,
                    reason: e.to_string(),
                });
            }
        }
    }
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if !s.bic.is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let cur = &scores[b];
                s.bic > cur.bic || (s.bic == cur.bic && s.param_count < cur.param_count)
            }
        };
        if better {
            best = Some(i);
        }
    }
    let best = best.ok_or(Error::AllFamiliesFailed)?;
    Ok(Selection {
        best,
        scores,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{sample_mixture, SynthSpec};
    use approx::assert_relative_eq;

    #[test]
    fn bic_examples() {
        assert_eq!(bic(0.0, 1, 5), 0.0);
        assert_relative_eq!(bic(-100.0, 7, 3), -200.0 - 3.0 * 7f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(bic(-100.0, 7, 3), -205.8377, epsilon = 1e-4);
        assert!(bic(-50.0, 100, 5) > bic(-50.0, 100, 10));
    }

    #[test]
    fn single_family_selects_itself() {
        let s = sample_mixture(&SynthSpec::two_spherical(2, 4.0, 200, 0.3, 1)).unwrap();
        let sel =
            select_model(&s.dataset, &[CovarianceFamily::EII], &CemConfig::default()).unwrap();
        assert_eq!(sel.scores.len(), 1);
        assert_eq!(sel.best().family, CovarianceFamily::EII);
        let mut buf = Vec::new();
        sel.write_report_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("EII,"));
    }

    #[test]
    fn reported_bic_is_recomputable() {
        let s = sample_mixture(&SynthSpec::two_correlated(3, 3.0, 0.5, 300, 0.2, 2)).unwrap();
        let sel = select_model(&s.dataset, &CovarianceFamily::ALL, &CemConfig::default()).unwrap();
        for sc in &sel.scores {
            let again = bic(sc.loglik, 300, sc.param_count);
            assert!((sc.bic - again).abs() < 1e-9);
        }
        let top = sel
            .scores
            .iter()
            .map(|s| s.bic)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(sel.best().bic, top);
    }

    #[test]
    fn adding_a_worse_family_keeps_the_choice() {
        let s = sample_mixture(&SynthSpec::two_spherical(3, 5.0, 400, 0.3, 4)).unwrap();
        let cfg = CemConfig::default();
        let all = select_model(&s.dataset, &CovarianceFamily::ALL, &cfg).unwrap();
        let best = all.best().family;
        let worst = all
            .scores
            .iter()
            .min_by(|a, b| a.bic.partial_cmp(&b.bic).unwrap())
            .unwrap()
            .family;
        let without: Vec<_> = CovarianceFamily::ALL
            .iter()
            .copied()
            .filter(|&f| f != worst)
            .collect();
        let sub = select_model(&s.dataset, &without, &cfg).unwrap();
        assert_eq!(sub.best().family, best);
    }

    #[test]
    fn empty_family_list_rejected() {
        let s = sample_mixture(&SynthSpec::two_spherical(2, 4.0, 50, 0.5, 1)).unwrap();
        assert!(select_model(&s.dataset, &[], &CemConfig::default()).is_err());
    }
}
