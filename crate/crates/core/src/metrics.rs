//! Subspace estimation accuracy.

use crate::error::{Error, Result};
use crate::linalg::{projection_matrix, DenseMatrix};

/// Two bases whose spans are compared.
#[derive(Clone, Debug)]
pub struct SubspacePair {
    pub truth: DenseMatrix,
    pub estimate: DenseMatrix,
}

impl SubspacePair {
    pub fn new(truth: DenseMatrix, estimate: DenseMatrix) -> Self {
        Self { truth, estimate }
    }

    pub fn distance(&self) -> Result<f64> {
        subspace_distance(&self.truth, &self.estimate)
    }
}

/// `‖P_a − P_b‖_F / √(2d)` for two full-column-rank `p × d` bases.
///
/// Lies in `[0, 1]` and is zero exactly when the spans coincide.
pub fn subspace_distance(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", a.rows(), a.cols()),
            got: format!("{}x{}", b.rows(), b.cols()),
        });
    }
    let d = a.cols();
    if d == 0 {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let pa = projection_matrix(a)?;
    let pb = projection_matrix(b)?;
    let dist = pa.sub(&pb)?.frobenius_norm() / (2.0 * d as f64).sqrt();
    Ok(dist.min(1.0))
}
