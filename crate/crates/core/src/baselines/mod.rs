//! Reference classifiers: k-nearest neighbours and linear discriminant analysis.

mod knn;
mod lda;

pub use self::knn::{KnnModel, KnnOutcome, KnnPrediction};
pub use self::lda::{lda_fit, LdaModel};
