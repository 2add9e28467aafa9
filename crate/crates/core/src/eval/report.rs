use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::{roc_auc, ConfusionCounts, CvReport, DrPoint, Prediction, RocCurve};

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// `sample_id,predicted_label,score`; a tie is written as `NA`.
pub fn write_predictions_csv<W: Write>(
    ids: &[String],
    predictions: &[Prediction],
    writer: W,
) -> Result<()> {
    if ids.len() != predictions.len() {
        return Err(Error::InvalidArgument(
            "one id per prediction required".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["sample_id", "predicted_label", "score"])?;
    for (id, p) in ids.iter().zip(predictions) {
        let label = p.label.map_or_else(|| "NA".to_string(), |l| l.to_string());
        w.write_record([id.as_str(), &label, &fmt(p.score)])?;
    }
    w.flush()?;
    Ok(())
}

/// A row of a predictions file produced elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalPrediction {
    pub sample_id: String,
    /// `None` for `NA`.
    pub label: Option<usize>,
    pub score: Option<f64>,
}

/// Reads `sample_id,predicted_label[,score]` with a header row. The score
/// column and individual score cells may be absent.
pub fn read_external_predictions<R: Read>(reader: R) -> Result<Vec<ExternalPrediction>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let id_col =
        col("sample_id").ok_or_else(|| Error::Format("missing sample_id column".into()))?;
    let label_col = col("predicted_label")
        .ok_or_else(|| Error::Format("missing predicted_label column".into()))?;
    let score_col = col("score");
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let label_text = rec.get(label_col).unwrap_or("").trim();
        let label = if label_text.eq_ignore_ascii_case("NA") {
            None
        } else {
            Some(label_text.parse().map_err(|_| {
                Error::Format(format!("line {line}: bad predicted_label '{label_text}'"))
            })?)
        };
        let score = match score_col.and_then(|c| rec.get(c)).map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Format(format!("line {line}: bad score '{s}'")))?,
            ),
        };
        out.push(ExternalPrediction {
            sample_id: rec.get(id_col).unwrap_or("").to_string(),
            label,
            score,
        });
    }
    Ok(out)
}

/// Reads a file written by [`write_predictions_csv`].
pub fn read_predictions_csv<R: Read>(reader: R) -> Result<Vec<ExternalPrediction>> {
    read_external_predictions(reader)
}

/// One line of a classifier comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub classifier: String,
    pub samples: usize,
    pub mean_accuracy: f64,
    /// `None` for a single evaluation without folds.
    pub sd_accuracy: Option<f64>,
    pub mean_fpr: f64,
    pub sd_fpr: Option<f64>,
    pub ties: usize,
    pub auc: Option<f64>,
}

impl ComparisonRow {
    pub fn from_cv(report: &CvReport) -> Self {
        Self {
            classifier: report.classifier.clone(),
            samples: report.predictions.len(),
            mean_accuracy: report.mean_accuracy,
            sd_accuracy: Some(report.sd_accuracy),
            mean_fpr: report.mean_fpr,
            sd_fpr: Some(report.sd_fpr),
            ties: report.ties,
            auc: report.roc.auc,
        }
    }

    pub fn write_csv<W: Write>(rows: &[Self], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "classifier",
            "samples",
            "mean_acc",
            "sd_acc",
            "mean_fpr",
            "sd_fpr",
            "ties",
            "auc",
        ])?;
        for r in rows {
            w.write_record([
                r.classifier.clone(),
                r.samples.to_string(),
                fmt(r.mean_accuracy),
                fmt_opt(r.sd_accuracy),
                fmt(r.mean_fpr),
                fmt_opt(r.sd_fpr),
                r.ties.to_string(),
                fmt_opt(r.auc),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fixed-width text table.
    pub fn write_table<W: Write>(rows: &[Self], mut w: W) -> Result<()> {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        writeln!(
            w,
            "{:<12} {:>7} {:>8} {:>8} {:>8} {:>8} {:>5} {:>7}",
            "classifier", "samples", "mean ACC", "sd ACC", "mean FP", "sd FP", "ties", "AUC"
        )?;
        for r in rows {
            writeln!(
                w,
                "{:<12} {:>7} {:>8.4} {:>8} {:>8.4} {:>8} {:>5} {:>7}",
                r.classifier,
                r.samples,
                r.mean_accuracy,
                opt(r.sd_accuracy),
                r.mean_fpr,
                opt(r.sd_fpr),
                r.ties,
                opt(r.auc)
            )?;
        }
        Ok(())
    }
}

/// Scores externally produced predictions against known labels. Every id in
/// `ids` must appear exactly once in `external`; extra rows are ignored. AUC
/// is computed only when every matched row carries a score.
pub fn merge_external(
    name: &str,
    ids: &[String],
    truth: &[usize],
    positive: usize,
    external: &[ExternalPrediction],
) -> Result<ComparisonRow> {
    let mut by_id: HashMap<&str, &ExternalPrediction> = HashMap::new();
    for e in external {
        if by_id.insert(e.sample_id.as_str(), e).is_some() {
            return Err(Error::Format(format!(
                "duplicate sample_id '{}'",
                e.sample_id
            )));
        }
    }
    let mut preds = Vec::with_capacity(ids.len());
    let mut scores = Vec::with_capacity(ids.len());
    for id in ids {
        let e = by_id
            .get(id.as_str())
            .ok_or_else(|| Error::Format(format!("no external prediction for '{id}'")))?;
        preds.push(Prediction {
            label: e.label,
            score: e.score.unwrap_or(f64::NAN),
        });
        scores.push(e.score);
    }
    let c = ConfusionCounts::tally(truth, &preds, positive)?;
    let auc = match scores.into_iter().collect::<Option<Vec<f64>>>() {
        Some(s) => {
            let t: Vec<bool> = truth.iter().map(|&l| l == positive).collect();
            roc_auc(&s, &t)?.auc
        }
        None => None,
    };
    Ok(ComparisonRow {
        classifier: name.to_string(),
        samples: c.total(),
        mean_accuracy: c.accuracy(),
        sd_accuracy: None,
        mean_fpr: c.false_positive_rate(),
        sd_fpr: None,
        ties: c.ties,
        auc,
    })
}

/// Per-fold rows: `fold,accuracy,fpr,tp,fp,tn,fn,ties,auc,family`.
pub fn write_folds_csv<W: Write>(report: &CvReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "fold", "accuracy", "fpr", "tp", "fp", "tn", "fn", "ties", "auc", "family",
    ])?;
    for f in &report.folds {
        let c = f.confusion;
        w.write_record([
            f.fold.to_string(),
            fmt(f.accuracy),
            fmt(f.fpr),
            c.tp.to_string(),
            c.fp.to_string(),
            c.tn.to_string(),
            c.fn_.to_string(),
            c.ties.to_string(),
            fmt_opt(f.auc),
            f.family.map(|x| x.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `threshold,fpr,tpr`; the leading infinite threshold is written as `inf`.
pub fn write_roc_csv<W: Write>(curve: &RocCurve, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["threshold", "fpr", "tpr"])?;
    for p in &curve.points {
        w.write_record([fmt(p.threshold), fmt(p.fpr), fmt(p.tpr)])?;
    }
    w.flush()?;
    Ok(())
}

/// Summary table: `classifier,fraction,sample_size,replicates,mean_dr,sd_dr`.
pub fn write_dr_csv<W: Write>(sweeps: &[(String, Vec<DrPoint>)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "classifier",
        "fraction",
        "sample_size",
        "replicates",
        "mean_dr",
        "sd_dr",
    ])?;
    for (name, points) in sweeps {
        for p in points {
            w.write_record([
                name.clone(),
                fmt(p.fraction),
                p.sample_size.to_string(),
                p.rates.len().to_string(),
                fmt(p.mean),
                fmt(p.sd),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per replicate, for box plots of DR against test size:
/// `classifier,fraction,replicate,dr`.
pub fn write_dr_replicates_csv<W: Write>(
    sweeps: &[(String, Vec<DrPoint>)],
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["classifier", "fraction", "replicate", "dr"])?;
    for (name, points) in sweeps {
        for p in points {
            for (i, r) in p.rates.iter().enumerate() {
                w.write_record([name.clone(), fmt(p.fraction), i.to_string(), fmt(*r)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictions_round_trip() {
        let ids: Vec<String> = vec!["a".into(), "b".into()];
        let preds = [
            Prediction {
                label: Some(1),
                score: 0.25,
            },
            Prediction {
                label: None,
                score: 0.5,
            },
        ];
        let mut buf = Vec::new();
        write_predictions_csv(&ids, &preds, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "sample_id,predicted_label,score\na,1,0.25\nb,NA,0.5\n"
        );
        let back = read_predictions_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0].label, Some(1));
        assert_eq!(back[1].label, None);
        assert_eq!(back[1].score, Some(0.5));
    }

    #[test]
    fn external_merge() {
        let text = "sample_id,predicted_label\nx,1\ny,0\nz,1\nextra,0\n";
        let ext = read_external_predictions(text.as_bytes()).unwrap();
        let ids: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let row = merge_external("SVM", &ids, &[1, 0, 0], 1, &ext).unwrap();
        assert_eq!(row.samples, 3);
        assert!((row.mean_accuracy - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(row.mean_fpr, 0.5);
        assert_eq!(row.auc, None);

        let missing = merge_external("SVM", &["w".to_string()], &[1], 1, &ext);
        assert!(matches!(missing, Err(Error::Format(_))));
        assert!(read_external_predictions("id,label\n1,1\n".as_bytes()).is_err());
        assert!(read_external_predictions("sample_id,predicted_label\n1,x\n".as_bytes()).is_err());
    }

    #[test]
    fn table_renders_every_row() {
        let row = ComparisonRow {
            classifier: "LDA".into(),
            samples: 10,
            mean_accuracy: 0.9,
            sd_accuracy: Some(0.01),
            mean_fpr: 0.1,
            sd_fpr: None,
            ties: 0,
            auc: Some(0.95),
        };
        let mut buf = Vec::new();
        ComparisonRow::write_table(&[row.clone(), row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("0.9000"));
    }
}
