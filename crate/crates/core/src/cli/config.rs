use std::path::Path;

use serde::Deserialize;

use super::args::{FitFlags, StoppingArg};
use super::{CliError, CliResult};
use crate::cem::{CemConfig, StoppingRule};
use crate::eval::DrSchedule;
use crate::gmm::{parse_family_list, CovarianceFamily};

/// Keys accepted in a `--config` TOML file. All optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub families: Option<String>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub regularization: Option<f64>,
    pub stopping: Option<StoppingArg>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub fractions: Option<Vec<f64>>,
    pub replicates: Option<Vec<usize>>,
    pub positive_class: Option<usize>,
    pub knn_k: Option<usize>,
    pub classes: Option<usize>,
    pub classifiers: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }
}

/// Settings after merging flags over the config file over defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub families: Vec<CovarianceFamily>,
    pub cem: CemConfig,
    pub seed: Option<u64>,
    pub folds: usize,
    pub schedule: DrSchedule,
    pub positive_class: usize,
    pub knn_k: usize,
    pub classes: Option<usize>,
    pub classifiers: Vec<String>,
}

pub(crate) struct Overrides<'a> {
    pub fit: Option<&'a FitFlags>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub fractions: Option<Vec<f64>>,
    pub replicates: Option<Vec<usize>>,
    pub positive_class: Option<usize>,
    pub knn_k: Option<usize>,
    pub classes: Option<usize>,
    pub classifiers: Option<String>,
}

impl RunConfig {
    pub(crate) fn resolve(o: Overrides<'_>, file: &FileConfig) -> CliResult<Self> {
        let flags = o.fit.cloned().unwrap_or_default();
        let families_text = flags
            .families
            .or_else(|| file.families.clone())
            .unwrap_or_else(|| "all".into());
        let families =
            parse_family_list(&families_text).map_err(|e| CliError::usage(e.to_string()))?;
        let defaults = CemConfig::default();
        let stopping = match flags.stopping.or(file.stopping) {
            Some(StoppingArg::Delta) => StoppingRule::Delta,
            Some(StoppingArg::Aitken) => StoppingRule::Aitken,
            None => defaults.stopping,
        };
        let seed = o.seed.or(file.seed);
        let cem = CemConfig {
            family: families[0],
            tolerance: flags
                .tolerance
                .or(file.tolerance)
                .unwrap_or(defaults.tolerance),
            max_iterations: flags
                .max_iterations
                .or(file.max_iterations)
                .unwrap_or(defaults.max_iterations),
            regularization: flags
                .regularization
                .or(file.regularization)
                .unwrap_or(defaults.regularization),
            seed: seed.unwrap_or(defaults.seed),
            stopping,
        };
        cem.validate().map_err(|e| CliError::usage(e.to_string()))?;

        let standard = DrSchedule::standard();
        let fractions = o
            .fractions
            .or_else(|| file.fractions.clone())
            .unwrap_or_else(|| standard.fractions().to_vec());
        let replicates = o
            .replicates
            .or_else(|| file.replicates.clone())
            .unwrap_or_else(|| standard.replicates().to_vec());
        let schedule =
            DrSchedule::new(fractions, replicates).map_err(|e| CliError::usage(e.to_string()))?;

        let folds = o.folds.or(file.folds).unwrap_or(10);
        if folds < 2 {
            return Err(CliError::usage("--folds must be at least 2"));
        }
        let knn_k = o.knn_k.or(file.knn_k).unwrap_or(3);
        if knn_k == 0 {
            return Err(CliError::usage("--knn-k must be positive"));
        }
        let classifiers_text = o
            .classifiers
            .or_else(|| file.classifiers.clone())
            .unwrap_or_else(|| "mbss,lda,knn".into());
        let mut classifiers = Vec::new();
        for c in classifiers_text
            .split(',')
            .map(|c| c.trim().to_ascii_lowercase())
        {
            if c.is_empty() {
                continue;
            }
            if !matches!(c.as_str(), "mbss" | "lda" | "knn") {
                return Err(CliError::usage(format!("unknown classifier '{c}'")));
            }
            if !classifiers.contains(&c) {
                classifiers.push(c);
            }
        }
        let classes = o.classes.or(file.classes);
        if classes.is_some_and(|k| k < 2) {
            return Err(CliError::usage("--classes must be at least 2"));
        }
        Ok(Self {
            families,
            cem,
            seed,
            folds,
            schedule,
            positive_class: o.positive_class.or(file.positive_class).unwrap_or(1),
            knn_k,
            classes,
            classifiers,
        })
    }

    /// The seed, or a usage error naming the command that needs it.
    pub fn require_seed(&self, command: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| {
            CliError::usage(format!(
                "`{command}` needs --seed (or `seed` in the config file)"
            ))
        })
    }
}
