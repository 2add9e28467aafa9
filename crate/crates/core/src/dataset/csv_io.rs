//! Dataset CSV persistence.
//!
//! Header: `sample_id`, one column per vocabulary entry, then `label`.
//! Labeled rows carry a zero-based class index; unlabeled rows leave `label` empty.
//! Binary cells are written as `0`/`1`; any other value uses the shortest
//! representation that parses back to the same `f64`.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::{ApiVocabulary, Dataset};
use crate::error::{Error, Result};

const ID_COLUMN: &str = "sample_id";
const LABEL_COLUMN: &str = "label";

pub(crate) fn format_cell(v: f64) -> String {
    if v.to_bits() == 0f64.to_bits() {
        "0".to_string()
    } else if v.to_bits() == 1f64.to_bits() {
        "1".to_string()
    } else {
        format!("{v:?}")
    }
}

impl Dataset {
    /// Writes the labeled block, then the unlabeled block.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![ID_COLUMN.to_string()];
        header.extend(self.vocabulary().entries().iter().cloned());
        header.push(LABEL_COLUMN.to_string());
        w.write_record(&header)?;

        for (i, id) in self.labeled_ids().iter().enumerate() {
            let mut record = vec![id.clone()];
            record.extend(self.labeled().row(i).iter().map(|&v| format_cell(v)));
            record.push(self.labels()[i].to_string());
            w.write_record(&record)?;
        }
        for (j, id) in self.unlabeled_ids().iter().enumerate() {
            let mut record = vec![id.clone()];
            record.extend(self.unlabeled().row(j).iter().map(|&v| format_cell(v)));
            record.push(String::new());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads a dataset CSV. `n_classes` defaults to one more than the largest label.
    ///
    /// The `sample_id` column is optional on input; missing ids are generated.
    pub fn read_csv<R: Read>(reader: R, n_classes: Option<usize>) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.last().map(String::as_str) != Some(LABEL_COLUMN) {
            return Err(Error::Format(format!(
                "last column must be `{LABEL_COLUMN}`"
            )));
        }
        let has_ids = header.first().map(String::as_str) == Some(ID_COLUMN);
        let first_feature = usize::from(has_ids);
        let feature_names = &header[first_feature..header.len() - 1];
        let vocabulary = ApiVocabulary::new(feature_names.iter().cloned())?;
        if vocabulary.len() != feature_names.len() {
            return Err(Error::Format("duplicate feature column".into()));
        }
        let d = vocabulary.len();

        let mut labeled = Vec::new();
        let mut labels = Vec::new();
        let mut labeled_ids = Vec::new();
        let mut unlabeled = Vec::new();
        let mut unlabeled_ids = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            if record.len() != header.len() {
                return Err(Error::Format(format!(
                    "row {} has {} fields, expected {}",
                    row + 1,
                    record.len(),
                    header.len()
                )));
            }
            let id = if has_ids {
                record[0].to_string()
            } else {
                format!("row{row}")
            };
            let mut values = Vec::with_capacity(d);
            for cell in record.iter().skip(first_feature).take(d) {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    Error::Format(format!("row {}: bad feature cell `{cell}`", row + 1))
                })?;
                if !v.is_finite() {
                    return Err(Error::Format(format!("row {}: non-finite cell", row + 1)));
                }
                values.push(v);
            }
            let label = record[header.len() - 1].trim();
            if label.is_empty() {
                unlabeled.extend(values);
                unlabeled_ids.push(id);
            } else {
                let l: usize = label
                    .parse()
                    .map_err(|_| Error::Format(format!("row {}: bad label `{label}`", row + 1)))?;
                labeled.extend(values);
                labels.push(l);
                labeled_ids.push(id);
            }
        }
        let k = n_classes.unwrap_or_else(|| labels.iter().max().map_or(1, |&l| l + 1));
        Dataset::with_ids(
            DMatrix::from_row_slice(labels.len(), d, &labeled),
            labels,
            DMatrix::from_row_slice(unlabeled_ids.len(), d, &unlabeled),
            vocabulary,
            k,
            labeled_ids,
            unlabeled_ids,
        )
    }

    pub fn read_csv_path(path: impl AsRef<Path>, n_classes: Option<usize>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file), n_classes)
    }
}
