//! Constrained covariance families and their closed-form estimators.
//!
//! With the decomposition `Σ_k = λ_k D_k A_k D_kᵀ`, the families supported are
//!
//! | tag | volume | shape | orientation | form |
//! |-----|--------|-------|-------------|------|
//! | EII | equal | spherical | - | `λ I` |
//! | VII | varying | spherical | - | `λ_k I` |
//! | EEI | equal | equal | axis-aligned | `λ A` |
//! | VVI | varying | varying | axis-aligned | `λ_k A_k` |
//! | EEE | equal | equal | equal | `λ D A Dᵀ` |
//! | VVV | varying | varying | varying | `λ_k D_k A_k D_kᵀ` |

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CovarianceFamily {
    EII,
    VII,
    EEI,
    VVI,
    EEE,
    VVV,
}

/// Structural constraint on each covariance matrix, ignoring sharing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Spherical,
    Diagonal,
    Full,
}

impl CovarianceFamily {
    pub const ALL: [CovarianceFamily; 6] = [
        CovarianceFamily::EII,
        CovarianceFamily::VII,
        CovarianceFamily::EEI,
        CovarianceFamily::VVI,
        CovarianceFamily::EEE,
        CovarianceFamily::VVV,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::EII => "EII",
            Self::VII => "VII",
            Self::EEI => "EEI",
            Self::VVI => "VVI",
            Self::EEE => "EEE",
            Self::VVV => "VVV",
        }
    }

    /// All components share one covariance matrix.
    pub fn is_shared(self) -> bool {
        matches!(self, Self::EII | Self::EEI | Self::EEE)
    }

    pub fn geometry(self) -> Geometry {
        match self {
            Self::EII | Self::VII => Geometry::Spherical,
            Self::EEI | Self::VVI => Geometry::Diagonal,
            Self::EEE | Self::VVV => Geometry::Full,
        }
    }

    /// Free covariance parameters for `k` components in `d` dimensions.
    pub fn covariance_parameters(self, k: usize, d: usize) -> usize {
        let full = d * (d + 1) / 2;
        match self {
            Self::EII => 1,
            Self::VII => k,
            Self::EEI => d,
            Self::VVI => k * d,
            Self::EEE => full,
            Self::VVV => k * full,
        }
    }

    /// Restricts a within-component scatter to this family's shape.
    ///
    /// `scatter` is `Σ (x - μ)(x - μ)ᵀ` over the rows in the group, `count` the
    /// number of rows it covers. The result is the unregularized estimate.
    pub(crate) fn constrain(self, scatter: &DMatrix<f64>, count: f64) -> DMatrix<f64> {
        let d = scatter.nrows();
        match self.geometry() {
            Geometry::Full => scatter / count,
            Geometry::Diagonal => DMatrix::from_diagonal(&(scatter.diagonal() / count)),
            Geometry::Spherical => {
                let lambda = scatter.trace() / (d as f64 * count);
                DMatrix::identity(d, d) * lambda
            }
        }
    }

    /// Checks that `covariances` have this family's structure within `tol`
    /// relative to the largest entry.
    pub fn conforms(self, covariances: &[&DMatrix<f64>], tol: f64) -> bool {
        let Some(first) = covariances.first() else {
            return true;
        };
        for cov in covariances {
            let scale = cov.amax().max(1e-300);
            let d = cov.nrows();
            for i in 0..d {
                for j in 0..d {
                    if (cov[(i, j)] - cov[(j, i)]).abs() > tol * scale {
                        return false;
                    }
                    if i != j
                        && self.geometry() != Geometry::Full
                        && cov[(i, j)].abs() > tol * scale
                    {
                        return false;
                    }
                }
                if self.geometry() == Geometry::Spherical
                    && (cov[(i, i)] - cov[(0, 0)]).abs() > tol * scale
                {
                    return false;
                }
            }
            if self.is_shared() {
                let scale = scale.max(first.amax());
                if (*cov - *first).amax() > tol * scale {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for CovarianceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CovarianceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|f| f.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown covariance family `{s}`")))
    }
}

/// Parses a comma-separated family list; `all` expands to every family.
pub fn parse_family_list(s: &str) -> Result<Vec<CovarianceFamily>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(CovarianceFamily::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let f: CovarianceFamily = part.parse()?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("empty family list".into()));
    }
    Ok(out)
}

/// Free parameters of a `k`-component mixture: weights, means and covariances.
pub fn parameter_count(family: CovarianceFamily, k: usize, d: usize) -> usize {
    (k - 1) + k * d + family.covariance_parameters(k, d)
}
