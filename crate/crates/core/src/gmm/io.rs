//! Model file: JSON with the family tag, weights, means and covariances.
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so save/load reproduces every parameter bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ComponentParams, CovarianceFamily, MixtureModel};
use crate::error::{Error, Result};

const FORMAT: &str = "mbss-mixture";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    family: CovarianceFamily,
    dim: usize,
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariances: Vec<Vec<Vec<f64>>>,
}

impl MixtureModel {
    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        let d = self.dim();
        let file = ModelFile {
            format: FORMAT.to_string(),
            version: VERSION,
            family: self.family(),
            dim: d,
            weights: self.weights().to_vec(),
            means: self
                .components()
                .iter()
                .map(|c| c.mean().iter().copied().collect())
                .collect(),
            covariances: self
                .components()
                .iter()
                .map(|c| {
                    (0..d)
                        .map(|i| c.covariance().row(i).iter().copied().collect())
                        .collect()
                })
                .collect(),
        };
        serde_json::to_writer_pretty(&mut writer, &file)?;
        writeln!(writer)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(reader)?;
        if file.format != FORMAT {
            return Err(Error::Format(format!(
                "not a model file: format `{}`",
                file.format
            )));
        }
        if file.version != VERSION {
            return Err(Error::Format(format!(
                "unsupported model version {}",
                file.version
            )));
        }
        let d = file.dim;
        if file.means.len() != file.weights.len() || file.covariances.len() != file.weights.len() {
            return Err(Error::Format("component count mismatch".into()));
        }
        let mut components = Vec::with_capacity(file.weights.len());
        for (mean, cov) in file.means.iter().zip(&file.covariances) {
            if mean.len() != d || cov.len() != d || cov.iter().any(|r| r.len() != d) {
                return Err(Error::Format(format!("component shape is not {d}x{d}")));
            }
            let flat: Vec<f64> = cov.iter().flatten().copied().collect();
            components.push(ComponentParams::new(
                DVector::from_row_slice(mean),
                DMatrix::from_row_slice(d, d, &flat),
            )?);
        }
        MixtureModel::new(file.weights, components, file.family)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_json(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_json(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn json_round_trip_is_lossless(
            w in 0.001f64..0.999,
            m in proptest::collection::vec(-1e3f64..1e3, 6),
            a in proptest::collection::vec(-1.0f64..1.0, 9),
            s in 1e-4f64..1e4,
        ) {
            // full covariance A Aᵀ + s I is SPD
            let a = DMatrix::from_row_slice(3, 3, &a);
            let cov = &a * a.transpose() + DMatrix::identity(3, 3) * s;
            let cov2 = &cov * 0.7 + DMatrix::identity(3, 3) * (s / 3.0);
            let model = MixtureModel::new(
                vec![w, 1.0 - w],
                vec![
                    ComponentParams::new(DVector::from_row_slice(&m[..3]), cov).unwrap(),
                    ComponentParams::new(DVector::from_row_slice(&m[3..]), cov2).unwrap(),
                ],
                CovarianceFamily::VVV,
            ).unwrap();
            let mut buf = Vec::new();
            model.write_json(&mut buf).unwrap();
            let back = MixtureModel::read_json(buf.as_slice()).unwrap();
            prop_assert_eq!(&back, &model);
            for (c1, c2) in back.components().iter().zip(model.components()) {
                prop_assert_eq!(c1.log_det().to_bits(), c2.log_det().to_bits());
            }
        }
    }

    #[test]
    fn rejects_foreign_json() {
        assert!(matches!(
            MixtureModel::read_json(r#"{"format":"other","version":1,"family":"EII","dim":1,"weights":[1.0],"means":[[0.0]],"covariances":[[[1.0]]]}"#.as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(MixtureModel::read_json("not json".as_bytes()).is_err());
    }
}
