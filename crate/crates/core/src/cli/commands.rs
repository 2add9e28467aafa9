use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use super::args::{
    ClassifyArgs, Cli, Command, EvaluateArgs, ExtractArgs, FitArgs, Protocol, RowSelection, Shape,
    SynthArgs,
};
use super::config::{FileConfig, Overrides, RunConfig};
use super::manifest::{manifest_path, Manifest};
use super::{CliError, CliResult, EXIT_OK, EXIT_PARTIAL};
use crate::baselines::{lda_fit, KnnModel};
use crate::dataset::{parse_log, vstack, ApiVocabulary, Dataset};
use crate::error::Error;
use crate::eval::{
    cross_validate, detection_rate_from_predictions, merge_external, pca_project,
    read_external_predictions, write_dr_csv, write_dr_replicates_csv, write_folds_csv,
    write_predictions_csv, write_roc_csv, Classifier, ClassifierSpec, ComparisonRow, DrPoint,
    Prediction,
};
use crate::gmm::MixtureModel;
use crate::model_select::select_model;
use crate::synth::{binarize, sample_mixture, sample_shifted, SynthSpec};

const BUNDLED_VOCABULARY: &str = include_str!("../../data/api_vocabulary.txt");

pub(crate) fn dispatch(cli: &Cli) -> CliResult<i32> {
    if let Some(path) = &cli.config {
        require_file(path)?;
    }
    let file = FileConfig::load(cli.config.as_deref())?;
    let none = Overrides {
        fit: None,
        seed: None,
        folds: None,
        fractions: None,
        replicates: None,
        positive_class: None,
        knn_k: None,
        classes: None,
        classifiers: None,
    };
    match &cli.command {
        Command::Extract(a) => {
            let rc = RunConfig::resolve(
                Overrides {
                    classes: a.classes,
                    ..none
                },
                &file,
            )?;
            extract(a, &rc)
        }
        Command::Fit(a) => {
            let rc = RunConfig::resolve(
                Overrides {
                    fit: Some(&a.fit),
                    seed: a.seed,
                    classes: a.classes,
                    positive_class: a.positive_class,
                    ..none
                },
                &file,
            )?;
            fit(a, &rc)
        }
        Command::Classify(a) => {
            let rc = RunConfig::resolve(
                Overrides {
                    positive_class: a.positive_class,
                    ..none
                },
                &file,
            )?;
            classify(a, &rc)
        }
        Command::Evaluate(a) => {
            let rc = RunConfig::resolve(
                Overrides {
                    fit: Some(&a.fit),
                    seed: a.seed,
                    folds: a.folds,
                    fractions: a.fractions.clone(),
                    replicates: a.replicates.clone(),
                    positive_class: a.positive_class,
                    knn_k: a.knn_k,
                    classes: a.classes,
                    classifiers: a.classifiers.clone(),
                },
                &file,
            )?;
            evaluate(a, &rc)
        }
        Command::Synth(a) => {
            let rc = RunConfig::resolve(
                Overrides {
                    seed: a.seed,
                    ..none
                },
                &file,
            )?;
            synth(a, &rc)
        }
    }
}

fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::usage(format!("no such file: {}", path.display())))
    }
}

fn require_dir(path: &Path) -> CliResult<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "no such directory: {}",
            path.display()
        )))
    }
}

/// Parent directory of an output path must exist.
fn require_output(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => Err(CliError::usage(format!(
            "output directory does not exist: {}",
            p.display()
        ))),
        _ => Ok(()),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn check_positive(positive: usize, k: usize) -> CliResult<()> {
    if positive >= k {
        return Err(CliError::usage(format!(
            "positive class {positive} does not exist among {k} classes"
        )));
    }
    Ok(())
}

fn record_fit_params(m: &mut Manifest, rc: &RunConfig) {
    let families: Vec<String> = rc.families.iter().map(|f| f.to_string()).collect();
    m.param("families", families.join(","));
    m.param("tolerance", format!("{:?}", rc.cem.tolerance));
    m.param("max_iterations", rc.cem.max_iterations);
    m.param("regularization", format!("{:?}", rc.cem.regularization));
    m.param("stopping", format!("{:?}", rc.cem.stopping).to_lowercase());
}

fn read_labels(path: &Path) -> CliResult<BTreeMap<String, usize>> {
    let mut r = csv::Reader::from_path(path).map_err(Error::from)?;
    let header = r.headers().map_err(Error::from)?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::data(format!("{}: missing `{name}` column", path.display())))
    };
    let (id_col, label_col) = (col("sample_id")?, col("label")?);
    let mut out = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(Error::from)?;
        let id = rec.get(id_col).unwrap_or("").trim().to_string();
        let text = rec.get(label_col).unwrap_or("").trim();
        let label: usize = text.parse().map_err(|_| {
            CliError::data(format!(
                "{}: line {}: bad label `{text}`",
                path.display(),
                i + 2
            ))
        })?;
        if out.insert(id.clone(), label).is_some() {
            return Err(CliError::data(format!(
                "{}: duplicate sample_id `{id}`",
                path.display()
            )));
        }
    }
    Ok(out)
}

fn extract(a: &ExtractArgs, rc: &RunConfig) -> CliResult<i32> {
    require_dir(&a.logs)?;
    if let Some(v) = &a.vocabulary {
        require_file(v)?;
    }
    if let Some(l) = &a.labels {
        require_file(l)?;
    }
    require_output(&a.output)?;
    let k = rc.classes.unwrap_or(2);

    let mut manifest = Manifest::new("extract", None);
    manifest.param("classes", k);
    let vocabulary = match &a.vocabulary {
        Some(path) => {
            manifest.input(path)?;
            ApiVocabulary::from_path(path)?
        }
        None => {
            manifest.input_bytes(
                "<bundled api_vocabulary.txt>",
                BUNDLED_VOCABULARY.as_bytes(),
            );
            ApiVocabulary::from_reader(BUNDLED_VOCABULARY.as_bytes())?
        }
    };
    let labels = match &a.labels {
        Some(path) => {
            manifest.input(path)?;
            read_labels(path)?
        }
        None => BTreeMap::new(),
    };
    if let Some((id, &label)) = labels.iter().find(|(_, &l)| l >= k) {
        return Err(CliError::data(format!(
            "label {label} of `{id}` is out of range for {k} classes"
        )));
    }

    let mut files: Vec<PathBuf> = std::fs::read_dir(&a.logs)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            !p.file_name()
                .and_then(|n| n.to_str())
                .unwrap_or(".")
                .starts_with('.')
        })
        .collect();
    files.sort();

    let d = vocabulary.len();
    let mut seen = BTreeMap::new();
    let (mut lab_rows, mut lab_y, mut lab_ids) = (Vec::new(), Vec::new(), Vec::new());
    let (mut unl_rows, mut unl_ids) = (Vec::new(), Vec::new());
    let mut failed = 0usize;
    for path in &files {
        let name = path
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .to_string();
        let stem = path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .to_string();
        if let Some(other) = seen.insert(stem.clone(), name.clone()) {
            return Err(CliError::data(format!(
                "`{other}` and `{name}` share the sample id `{stem}`"
            )));
        }
        manifest.input(path)?;
        let parsed = File::open(path)
            .map_err(Error::from)
            .and_then(|f| parse_log(BufReader::new(f), &vocabulary));
        match parsed {
            Ok((vector, stats)) => {
                log::info!(
                    "{name}: {} events, {} malformed, {} outside the vocabulary",
                    stats.parsed,
                    stats.malformed,
                    stats.unknown
                );
                match labels.get(&stem) {
                    Some(&l) => {
                        lab_rows.extend(vector.to_f64());
                        lab_y.push(l);
                        lab_ids.push(stem);
                    }
                    None => {
                        unl_rows.extend(vector.to_f64());
                        unl_ids.push(stem);
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {name}: {e}");
                manifest.failure(&name, &e.to_string());
                failed += 1;
            }
        }
    }
    for id in labels.keys().filter(|id| !seen.contains_key(*id)) {
        log::warn!("labels file names `{id}` but no such log exists");
    }
    let dataset = Dataset::with_ids(
        DMatrix::from_row_slice(lab_y.len(), d, &lab_rows),
        lab_y,
        DMatrix::from_row_slice(unl_ids.len(), d, &unl_rows),
        vocabulary,
        k,
        lab_ids,
        unl_ids,
    )?;
    dataset.write_csv_path(&a.output)?;
    manifest.output(&a.output)?;
    manifest.write(&manifest_path(&a.output))?;
    eprintln!(
        "extracted {} of {} logs ({} labeled, {} unlabeled, d = {d})",
        dataset.n() + dataset.m(),
        files.len(),
        dataset.n(),
        dataset.m()
    );
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

fn fit(a: &FitArgs, rc: &RunConfig) -> CliResult<i32> {
    require_file(&a.data)?;
    for out in [
        Some(&a.model),
        a.report.as_ref(),
        a.trace.as_ref(),
        a.predictions.as_ref(),
    ]
    .into_iter()
    .flatten()
    {
        require_output(out)?;
    }
    let report_path = a.report.clone().unwrap_or_else(|| {
        let stem = a.model.file_stem().unwrap_or_default().to_string_lossy();
        a.model.with_file_name(format!("{stem}.selection.csv"))
    });

    let dataset = Dataset::read_csv_path(&a.data, rc.classes)?;
    check_positive(rc.positive_class, dataset.n_classes())?;
    let mut manifest = Manifest::new("fit", rc.seed);
    manifest.input(&a.data)?;
    record_fit_params(&mut manifest, rc);
    manifest.param("classes", dataset.n_classes());

    let selection = select_model(&dataset, &rc.families, &rc.cem)?;
    let best = selection.best();
    best.fit.model.save(&a.model)?;
    manifest.output(&a.model)?;
    selection.write_report_csv(create(&report_path)?)?;
    manifest.output(&report_path)?;
    if let Some(path) = &a.trace {
        best.fit.write_trace_csv(create(path)?)?;
        manifest.output(path)?;
    }
    if let Some(path) = &a.predictions {
        let preds: Vec<Prediction> = best
            .fit
            .hard_labels
            .iter()
            .enumerate()
            .map(|(j, &l)| Prediction {
                label: Some(l),
                score: best.fit.posteriors[(j, rc.positive_class)],
            })
            .collect();
        write_predictions_csv(dataset.unlabeled_ids(), &preds, create(path)?)?;
        manifest.output(path)?;
    }
    for f in &selection.failures {
        manifest.failure(f.family.as_str(), &f.reason);
    }
    manifest.param("selected", best.family);
    manifest.write(&manifest_path(&a.model))?;
    println!(
        "selected {} (BIC {:.4}, {} iterations, converged: {})",
        best.family, best.bic, best.fit.iterations, best.fit.converged
    );
    Ok(EXIT_OK)
}

fn classify(a: &ClassifyArgs, rc: &RunConfig) -> CliResult<i32> {
    require_file(&a.model)?;
    require_file(&a.data)?;
    require_output(&a.output)?;
    let model = MixtureModel::load(&a.model)?;
    check_positive(rc.positive_class, model.k())?;
    let dataset = Dataset::read_csv_path(&a.data, Some(model.k()))?;
    if dataset.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: dataset.dim(),
        }
        .into());
    }
    let (x, ids) = match a.rows {
        RowSelection::Unlabeled => (
            dataset.unlabeled().clone(),
            dataset.unlabeled_ids().to_vec(),
        ),
        RowSelection::All => {
            let mut ids = dataset.labeled_ids().to_vec();
            ids.extend_from_slice(dataset.unlabeled_ids());
            (vstack(dataset.labeled(), dataset.unlabeled()), ids)
        }
    };
    let preds = if x.nrows() == 0 {
        Vec::new()
    } else {
        model.classify(&x, rc.positive_class)?
    };
    write_predictions_csv(&ids, &preds, create(&a.output)?)?;

    let mut manifest = Manifest::new("classify", None);
    manifest.input(&a.model)?;
    manifest.input(&a.data)?;
    manifest.param("rows", format!("{:?}", a.rows).to_lowercase());
    manifest.param("positive_class", rc.positive_class);
    manifest.output(&a.output)?;
    manifest.write(&manifest_path(&a.output))?;
    eprintln!("classified {} rows", preds.len());
    Ok(EXIT_OK)
}

fn parse_external(spec: &str) -> CliResult<(String, PathBuf)> {
    let (name, path) = spec
        .split_once('=')
        .filter(|(n, p)| !n.is_empty() && !p.is_empty())
        .ok_or_else(|| {
            CliError::usage(format!(
                "--external-predictions expects NAME=FILE, got `{spec}`"
            ))
        })?;
    Ok((name.to_string(), PathBuf::from(path)))
}

fn spec_for(name: &str, rc: &RunConfig) -> ClassifierSpec {
    match name {
        "mbss" => ClassifierSpec::Mbss {
            families: rc.families.clone(),
            config: rc.cem.clone(),
        },
        "lda" => ClassifierSpec::Lda {
            regularization: rc.cem.regularization,
        },
        _ => ClassifierSpec::Knn { k: rc.knn_k },
    }
}

fn evaluate(a: &EvaluateArgs, rc: &RunConfig) -> CliResult<i32> {
    require_file(&a.data)?;
    let seed = rc.require_seed("evaluate")?;
    let externals: Vec<(String, PathBuf)> = a
        .external
        .iter()
        .map(|s| parse_external(s))
        .collect::<CliResult<_>>()?;
    for (_, p) in &externals {
        require_file(p)?;
    }
    let oos_path = match (a.protocol, &a.oos_data) {
        (Protocol::Oos, None) => return Err(CliError::usage("--protocol oos needs --oos-data")),
        (_, Some(p)) => {
            require_file(p)?;
            Some(p.clone())
        }
        (Protocol::Cv, None) => None,
    };
    std::fs::create_dir_all(&a.out_dir)?;

    let dataset = Dataset::read_csv_path(&a.data, rc.classes)?;
    check_positive(rc.positive_class, dataset.n_classes())?;
    let mut manifest = Manifest::new("evaluate", Some(seed));
    manifest.input(&a.data)?;
    record_fit_params(&mut manifest, rc);
    manifest.param("protocol", format!("{:?}", a.protocol).to_lowercase());
    manifest.param("classifiers", rc.classifiers.join(","));
    manifest.param("knn_k", rc.knn_k);
    manifest.param("positive_class", rc.positive_class);

    let oos = match &oos_path {
        Some(p) => {
            manifest.input(p)?;
            let o = Dataset::read_csv_path(p, Some(dataset.n_classes()))?;
            if o.dim() != dataset.dim() {
                return Err(Error::DimensionMismatch {
                    expected: dataset.dim(),
                    actual: o.dim(),
                }
                .into());
            }
            if o.vocabulary() != dataset.vocabulary() {
                return Err(CliError::data(
                    "out-of-sample feature columns differ from the in-sample ones",
                ));
            }
            Some(o)
        }
        None => None,
    };

    let mut written = Vec::new();
    match a.protocol {
        Protocol::Cv => {
            manifest.param("folds", rc.folds);
            let mut rows = Vec::new();
            for name in &rc.classifiers {
                let report = cross_validate(
                    &dataset,
                    &spec_for(name, rc),
                    rc.folds,
                    seed,
                    rc.positive_class,
                )?;
                let folds = a.out_dir.join(format!("folds_{name}.csv"));
                write_folds_csv(&report, create(&folds)?)?;
                let roc = a.out_dir.join(format!("roc_{name}.csv"));
                write_roc_csv(&report.roc, create(&roc)?)?;
                written.extend([folds, roc]);
                rows.push(ComparisonRow::from_cv(&report));
            }
            let truth: Vec<usize> = dataset.labels().to_vec();
            for (name, path) in &externals {
                manifest.input(path)?;
                let ext = read_external_predictions(File::open(path)?)?;
                rows.push(merge_external(
                    name,
                    dataset.labeled_ids(),
                    &truth,
                    rc.positive_class,
                    &ext,
                )?);
            }
            let csv_path = a.out_dir.join("comparison.csv");
            ComparisonRow::write_csv(&rows, create(&csv_path)?)?;
            let txt_path = a.out_dir.join("comparison.txt");
            let mut txt = create(&txt_path)?;
            ComparisonRow::write_table(&rows, &mut txt)?;
            txt.flush()?;
            drop(txt);
            ComparisonRow::write_table(&rows, std::io::stdout().lock())?;
            written.extend([csv_path, txt_path]);
        }
        Protocol::Oos => {
            let oos = oos.as_ref().expect("checked above");
            let oos_x = vstack(oos.labeled(), oos.unlabeled());
            let mut oos_ids = oos.labeled_ids().to_vec();
            oos_ids.extend_from_slice(oos.unlabeled_ids());
            if oos_x.nrows() == 0 {
                return Err(CliError::data("out-of-sample set is empty"));
            }
            let fr: Vec<String> = rc
                .schedule
                .fractions()
                .iter()
                .map(|f| format!("{f:?}"))
                .collect();
            let re: Vec<String> = rc
                .schedule
                .replicates()
                .iter()
                .map(|r| r.to_string())
                .collect();
            manifest.param("fractions", fr.join(","));
            manifest.param("replicates", re.join(","));

            let mut sweeps: Vec<(String, Vec<DrPoint>)> = Vec::new();
            for name in &rc.classifiers {
                let preds = oos_predictions(name, &dataset, &oos_x, rc)?;
                sweeps.push((
                    spec_for(name, rc).name(),
                    detection_rate_from_predictions(&preds, rc.positive_class, &rc.schedule, seed)?,
                ));
            }
            for (name, path) in &externals {
                manifest.input(path)?;
                let ext = read_external_predictions(File::open(path)?)?;
                let by_id: BTreeMap<&str, Option<usize>> = ext
                    .iter()
                    .map(|e| (e.sample_id.as_str(), e.label))
                    .collect();
                let preds = oos_ids
                    .iter()
                    .map(|id| {
                        by_id
                            .get(id.as_str())
                            .map(|&label| Prediction {
                                label,
                                score: f64::NAN,
                            })
                            .ok_or_else(|| {
                                CliError::data(format!("{name}: no prediction for `{id}`"))
                            })
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                sweeps.push((
                    name.clone(),
                    detection_rate_from_predictions(&preds, rc.positive_class, &rc.schedule, seed)?,
                ));
            }
            let dr = a.out_dir.join("dr.csv");
            write_dr_csv(&sweeps, create(&dr)?)?;
            let reps = a.out_dir.join("dr_replicates.csv");
            write_dr_replicates_csv(&sweeps, create(&reps)?)?;
            let txt_path = a.out_dir.join("dr.txt");
            let mut txt = create(&txt_path)?;
            write_dr_table(&sweeps, &mut txt)?;
            txt.flush()?;
            drop(txt);
            write_dr_table(&sweeps, std::io::stdout().lock())?;
            written.extend([dr, reps, txt_path]);
        }
    }

    if let Some(c) = a.pca {
        let empty = DMatrix::zeros(0, dataset.dim());
        let oos_x = oos
            .as_ref()
            .map_or(empty, |o| vstack(o.labeled(), o.unlabeled()));
        let scatter = pca_project(
            dataset.labeled(),
            dataset.labels(),
            rc.positive_class,
            &oos_x,
            c,
        )?;
        let path = a.out_dir.join("pca.csv");
        scatter.write_csv(create(&path)?)?;
        written.push(path);
        manifest.param("pca_components", c);
    }
    for p in &written {
        manifest.output(p)?;
    }
    manifest.write(&a.out_dir.join("manifest.json"))?;
    Ok(EXIT_OK)
}

/// MBSS fits with the out-of-sample rows (then any in-sample unlabeled rows)
/// as its unlabeled block; the baselines train on the labeled rows only.
fn oos_predictions(
    name: &str,
    dataset: &Dataset,
    oos_x: &DMatrix<f64>,
    rc: &RunConfig,
) -> CliResult<Vec<Prediction>> {
    let k = dataset.n_classes();
    let p = rc.positive_class;
    Ok(match name {
        "mbss" => {
            let joint = dataset.with_blocks(
                dataset.labeled().clone(),
                dataset.labels().to_vec(),
                vstack(oos_x, dataset.unlabeled()),
            )?;
            let best = select_model(&joint, &rc.families, &rc.cem)?.into_best();
            (0..oos_x.nrows())
                .map(|j| Prediction {
                    label: Some(best.fit.hard_labels[j]),
                    score: best.fit.posteriors[(j, p)],
                })
                .collect()
        }
        "lda" => lda_fit(
            dataset.labeled(),
            dataset.labels(),
            k,
            rc.cem.regularization,
        )?
        .classify(oos_x, p)?,
        _ => KnnModel::new(dataset.labeled(), dataset.labels(), k, rc.knn_k)?.classify(oos_x, p)?,
    })
}

fn write_dr_table<W: Write>(sweeps: &[(String, Vec<DrPoint>)], mut w: W) -> CliResult<()> {
    writeln!(
        w,
        "{:<12} {:>9} {:>7} {:>5} {:>8} {:>8}",
        "classifier", "fraction", "size", "reps", "mean DR", "sd DR"
    )?;
    for (name, points) in sweeps {
        for p in points {
            writeln!(
                w,
                "{:<12} {:>9} {:>7} {:>5} {:>8.4} {:>8.4}",
                name,
                format!("{}%", p.fraction * 100.0),
                p.sample_size,
                p.rates.len(),
                p.mean,
                p.sd
            )?;
        }
    }
    Ok(())
}

fn synth(a: &SynthArgs, rc: &RunConfig) -> CliResult<i32> {
    let seed = rc.require_seed("synth")?;
    require_output(&a.output)?;
    for p in [&a.truth, &a.oos_output].into_iter().flatten() {
        require_output(p)?;
    }
    if a.oos_output.is_some() && a.oos_shift != 0.0 && a.dim < 2 {
        return Err(CliError::usage("--oos-shift needs --dim of at least 2"));
    }
    let spec = match a.shape {
        Shape::Spherical => {
            SynthSpec::two_spherical(a.dim, a.separation, a.n, a.label_fraction, seed)
        }
        Shape::Correlated => {
            SynthSpec::two_correlated(a.dim, a.separation, a.rho, a.n, a.label_fraction, seed)
        }
    };
    let sample = sample_mixture(&spec)?;
    let bits = |x: &DMatrix<f64>| a.binarize.map_or_else(|| x.clone(), |t| binarize(x, t));
    let ds = &sample.dataset;
    let dataset = Dataset::with_ids(
        bits(ds.labeled()),
        ds.labels().to_vec(),
        bits(ds.unlabeled()),
        ds.vocabulary().clone(),
        2,
        ds.labeled_ids().to_vec(),
        ds.unlabeled_ids().to_vec(),
    )?;
    dataset.write_csv_path(&a.output)?;

    let mut manifest = Manifest::new("synth", Some(seed));
    manifest.param("dim", a.dim);
    manifest.param("separation", format!("{:?}", a.separation));
    manifest.param("shape", format!("{:?}", a.shape).to_lowercase());
    if a.shape == Shape::Correlated {
        manifest.param("rho", format!("{:?}", a.rho));
    }
    manifest.param("n", a.n);
    manifest.param("label_fraction", format!("{:?}", a.label_fraction));
    if let Some(t) = a.binarize {
        manifest.param("binarize", format!("{t:?}"));
    }
    manifest.output(&a.output)?;

    if let Some(path) = &a.truth {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(["sample_id", "label"])
            .map_err(Error::from)?;
        for (id, l) in dataset.unlabeled_ids().iter().zip(&sample.unlabeled_truth) {
            w.write_record([id.as_str(), &l.to_string()])
                .map_err(Error::from)?;
        }
        w.flush()?;
        drop(w);
        manifest.output(path)?;
    }
    if let Some(path) = &a.oos_output {
        let mut shift = DVector::zeros(a.dim);
        if a.dim >= 2 {
            shift[1] = a.oos_shift;
        }
        // distinct stream from the in-sample draw
        let x = bits(&sample_shifted(
            &spec,
            1,
            &shift,
            a.oos_n,
            seed ^ 0x5eed_0005,
        )?);
        let ids: Vec<String> = (0..a.oos_n).map(|i| format!("O{i}")).collect();
        let oos = Dataset::with_ids(
            x,
            vec![1; a.oos_n],
            DMatrix::zeros(0, a.dim),
            ds.vocabulary().clone(),
            2,
            ids,
            Vec::new(),
        )?;
        oos.write_csv_path(path)?;
        manifest.param("oos_n", a.oos_n);
        manifest.param("oos_shift", format!("{:?}", a.oos_shift));
        manifest.output(path)?;
    }
    manifest.write(&manifest_path(&a.output))?;
    Ok(EXIT_OK)
}
