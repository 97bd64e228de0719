use serde::{Deserialize, Serialize};

use super::decomp::{backward_substitute_transposed, fix_signs, forward_substitute, sym_eig, SpdMatrix};
use super::matrix::{norm, DenseMatrix};
use crate::error::{Error, Result};

/// How the columns of a [`GevBasis`] are scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `vⱼᵀ N vₗ = δⱼₗ`.
    NOrthonormal,
    /// Unit Euclidean length; for display only.
    Euclidean,
}

/// All `p` eigenpairs of `M v = λ N v`, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct GevBasis {
    vectors: DenseMatrix,
    values: Vec<f64>,
    normalization: Normalization,
}

impl GevBasis {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvectors as columns.
    pub fn vectors(&self) -> &DenseMatrix {
        &self.vectors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }

    /// Builds a basis from explicit columns and values, e.g. a known
    /// population basis. Values must already be descending.
    pub fn from_parts(vectors: DenseMatrix, values: Vec<f64>, normalization: Normalization) -> Result<Self> {
        if vectors.cols() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} eigenvalues", vectors.cols()),
                got: format!("{}", values.len()),
            });
        }
        Ok(Self {
            vectors,
            values,
            normalization,
        })
    }

    /// A copy with unit-length columns.
    pub fn euclidean_normalized(&self) -> Self {
        let mut vectors = self.vectors.clone();
        for j in 0..vectors.cols() {
            let col = vectors.column(j);
            let n = norm(&col);
            if n > 0.0 {
                let scaled: Vec<f64> = col.iter().map(|x| x / n).collect();
                vectors.set_column(j, &scaled);
            }
        }
        Self {
            vectors,
            values: self.values.clone(),
            normalization: Normalization::Euclidean,
        }
    }

    /// `‖M vⱼ − λⱼ N vⱼ‖₂`.
    pub fn residual(&self, j: usize, m: &DenseMatrix, n: &SpdMatrix) -> Result<f64> {
        let v = self.vector(j);
        let mv = m.mul_vec(&v)?;
        let nv = n.matrix().mul_vec(&v)?;
        let r: Vec<f64> = mv.iter().zip(&nv).map(|(a, b)| a - self.values[j] * b).collect();
        Ok(norm(&r))
    }
}

/// Solves the symmetric-definite generalized eigenproblem `M v = λ N v`.
///
/// Reduces to the standard problem on `L⁻¹ M L⁻ᵀ` with `N = L Lᵀ`, then maps
/// eigenvectors back through `v = L⁻ᵀ u`.
pub fn gev_solve(m: &DenseMatrix, n: &SpdMatrix) -> Result<GevBasis> {
    let p = n.dim();
    if m.shape() != (p, p) {
        return Err(Error::DimensionMismatch {
            expected: format!("{p}x{p}"),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    if !m.is_symmetric(1e-10) {
        return Err(Error::NotSymmetric {
            asymmetry: m.max_abs_asymmetry(),
        });
    }
    let l = n.cholesky();

    // W = L⁻¹ M, then C = L⁻¹ Wᵀ = L⁻¹ M L⁻ᵀ (M symmetric).
    let mut w = DenseMatrix::zeros(p, p);
    for j in 0..p {
        w.set_column(j, &forward_substitute(l, &m.column(j)));
    }
    let mut c = DenseMatrix::zeros(p, p);
    for j in 0..p {
        c.set_column(j, &forward_substitute(l, w.row(j)));
    }
    let eig = sym_eig(&c.symmetrized())?;

    let mut vectors = DenseMatrix::zeros(p, p);
    for j in 0..p {
        vectors.set_column(j, &backward_substitute_transposed(l, &eig.vectors.column(j)));
    }
    fix_signs(&mut vectors);
    Ok(GevBasis {
        vectors,
        values: eig.values,
        normalization: Normalization::NOrthonormal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::decomp::projection_matrix;

    fn lcg_matrix(n: usize, m: usize, seed: u64) -> DenseMatrix {
        let mut s = seed;
        DenseMatrix::from_fn(n, m, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn diagonal_against_identity() {
        let b = gev_solve(&DenseMatrix::diag(&[3.0, 2.0, 1.0]), &SpdMatrix::identity(3)).unwrap();
        assert_eq!(b.values(), &[3.0, 2.0, 1.0]);
        assert_eq!(b.vectors(), &DenseMatrix::identity(3));
    }

    #[test]
    fn m_equal_n_gives_unit_eigenvalues() {
        let a = lcg_matrix(4, 4, 2);
        let n = SpdMatrix::new(a.matmul(&a.transpose()).unwrap().add_identity(1.0)).unwrap();
        let b = gev_solve(n.matrix(), &n).unwrap();
        for &l in b.values() {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_residuals_and_orthonormality() {
        let m = lcg_matrix(6, 6, 5).symmetrized();
        let a = lcg_matrix(6, 6, 9);
        let n = SpdMatrix::new(a.matmul(&a.transpose()).unwrap().add_identity(0.3)).unwrap();
        let b = gev_solve(&m, &n).unwrap();
        for j in 0..6 {
            assert!(b.residual(j, &m, &n).unwrap() <= 1e-8 * m.frobenius_norm());
        }
        let gram = b.vectors().t_matmul(&n.matrix().matmul(b.vectors()).unwrap()).unwrap();
        assert!(gram.sub(&DenseMatrix::identity(6)).unwrap().max_abs() < 1e-10);
        assert!(b.values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn identity_metric_matches_sym_eig_subspaces() {
        let m = lcg_matrix(5, 5, 13).symmetrized();
        let b = gev_solve(&m, &SpdMatrix::identity(5)).unwrap();
        let e = sym_eig(&m).unwrap();
        for j in 0..5 {
            assert!((b.values()[j] - e.values[j]).abs() < 1e-9);
            let p1 = projection_matrix(&DenseMatrix::column_vector(&b.vector(j))).unwrap();
            let p2 = projection_matrix(&DenseMatrix::column_vector(&e.vectors.column(j))).unwrap();
            assert!(p1.sub(&p2).unwrap().max_abs() < 1e-9);
        }
    }

    #[test]
    fn euclidean_copy_has_unit_columns() {
        let n = SpdMatrix::new(DenseMatrix::diag(&[4.0, 9.0])).unwrap();
        let b = gev_solve(&DenseMatrix::diag(&[1.0, 1.0]), &n).unwrap();
        let e = b.euclidean_normalized();
        assert_eq!(e.normalization(), Normalization::Euclidean);
        for j in 0..2 {
            assert!((norm(&e.vector(j)) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_shape_mismatch() {
        let err = gev_solve(&DenseMatrix::identity(2), &SpdMatrix::identity(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }
}
