use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

/// A symmetric positive-definite matrix together with its Cholesky factor.
///
/// Construction is the only place positive-definiteness is checked, so any
/// `SpdMatrix` in hand is known to factor.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix {
    matrix: DenseMatrix,
    chol: DenseMatrix,
}

impl SpdMatrix {
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        if !matrix.is_symmetric(SYMMETRY_TOL) {
            return Err(Error::NotSymmetric {
                asymmetry: matrix.max_abs_asymmetry(),
            });
        }
        // Mirror the upper triangle so later products see an exactly symmetric matrix.
        let matrix = DenseMatrix::from_fn(matrix.rows(), matrix.cols(), |i, j| {
            if i <= j {
                matrix[(i, j)]
            } else {
                matrix[(j, i)]
            }
        });
        let chol = cholesky_factor(&matrix)?;
        Ok(Self { matrix, chol })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DenseMatrix::identity(n),
            chol: DenseMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }

    /// Lower-triangular `L` with `L Lᵀ = self`.
    pub fn cholesky(&self) -> &DenseMatrix {
        &self.chol
    }

    /// `log |A|` from the Cholesky diagonal.
    pub fn log_det(&self) -> f64 {
        2.0 * self.chol.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Solves `L y = b`.
    pub fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        forward_substitute(&self.chol, b)
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let y = forward_substitute(&self.chol, b);
        backward_substitute_transposed(&self.chol, &y)
    }

    /// `(x)ᵀ A⁻¹ (x)`, computed as `‖L⁻¹x‖²`.
    pub fn inv_quadratic_form(&self, x: &[f64]) -> f64 {
        self.forward_solve(x).iter().map(|v| v * v).sum()
    }
}

impl AsRef<DenseMatrix> for SpdMatrix {
    fn as_ref(&self) -> &DenseMatrix {
        &self.matrix
    }
}

/// Cholesky factor of an SPD matrix.
pub fn cholesky(a: &SpdMatrix) -> DenseMatrix {
    a.cholesky().clone()
}

/// Raw Cholesky factorization of a symmetric matrix (only the lower
/// triangle is read). Fails on the first pivot that is not strictly positive.
pub fn cholesky_factor(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot: diag,
            });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub(crate) fn forward_substitute(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let row = l.row(i);
        let mut s = b[i];
        for k in 0..i {
            s -= row[k] * y[k];
        }
        y[i] = s / row[i];
    }
    y
}

/// Solves `Lᵀ x = y` for lower-triangular `L`.
pub(crate) fn backward_substitute_transposed(l: &DenseMatrix, y: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut x = y.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Eigen-decomposition of a symmetric matrix. `vectors` holds the
/// eigenvectors as columns, matched to `values` (sorted descending).
#[derive(Clone, Debug)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi eigen-decomposition.
///
/// Eigenvalues are sorted descending with a stable sort, and each
/// eigenvector is signed so that its largest-magnitude entry is positive.
pub fn sym_eig(a: &DenseMatrix) -> Result<SymEig> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    if !a.is_symmetric(1e-10) {
        return Err(Error::NotSymmetric {
            asymmetry: a.max_abs_asymmetry(),
        });
    }
    let n = a.rows();
    let mut m = a.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let target = JACOBI_TOL * a.frobenius_norm();

    let off_norm = |m: &DenseMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[(i, j)] * m[(i, j)];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                m[(p, p)] -= t * apq;
                m[(q, q)] += t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    let nkp = c * akp - s * akq;
                    let nkq = s * akp + c * akq;
                    m[(k, p)] = nkp;
                    m[(p, k)] = nkp;
                    m[(k, q)] = nkq;
                    m[(q, k)] = nkq;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&m);
        if off > target {
            return Err(Error::NoConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
                off_norm: off,
            });
        }
    }

    let diag = m.diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = v.select_columns(&order);
    fix_signs(&mut vectors);
    Ok(SymEig { values, vectors })
}

/// Flips each column so that its largest-magnitude entry is positive
/// (first such entry on exact ties).
pub(crate) fn fix_signs(vectors: &mut DenseMatrix) {
    for j in 0..vectors.cols() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for i in 0..vectors.rows() {
            let a = vectors[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if vectors.rows() > 0 && vectors[(best, j)] < 0.0 {
            for i in 0..vectors.rows() {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
}

/// Inverse of an SPD matrix via its Cholesky factor.
pub fn spd_inverse(a: &SpdMatrix) -> Result<SpdMatrix> {
    let n = a.dim();
    let mut inv = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        inv.set_column(j, &a.solve(&e));
    }
    SpdMatrix::new(inv.symmetrized())
}

/// `(A^{1/2}, A^{-1/2})` from the eigen-decomposition.
pub fn spd_sqrt_and_invsqrt(a: &SpdMatrix) -> Result<(SpdMatrix, SpdMatrix)> {
    let eig = sym_eig(a.matrix())?;
    if let Some((idx, &lam)) = eig
        .values
        .iter()
        .enumerate()
        .find(|(_, &l)| !(l > 0.0))
    {
        return Err(Error::NotPositiveDefinite {
            index: idx,
            pivot: lam,
        });
    }
    let sq: Vec<f64> = eig.values.iter().map(|l| l.sqrt()).collect();
    let isq: Vec<f64> = sq.iter().map(|s| 1.0 / s).collect();
    let build = |w: &[f64]| {
        let q = &eig.vectors;
        let n = q.rows();
        DenseMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| q[(i, k)] * w[k] * q[(j, k)]).sum()
        })
        .symmetrized()
    };
    Ok((SpdMatrix::new(build(&sq))?, SpdMatrix::new(build(&isq))?))
}

/// `a + gamma·I`, failing with [`Error::StillSingular`] if that is not SPD.
pub fn regularize(a: &DenseMatrix, gamma: f64) -> Result<SpdMatrix> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::config("gamma", format!("must be finite and >= 0, got {gamma}")));
    }
    match SpdMatrix::new(a.add_identity(gamma)) {
        Ok(s) => Ok(s),
        Err(Error::NotPositiveDefinite { .. }) => Err(Error::StillSingular { gamma }),
        Err(e) => Err(e),
    }
}

/// Uses `a` as is when it factors; otherwise falls back to `a + gamma·I`.
/// With `force`, the ridge is always added.
pub fn spd_or_regularize(a: &DenseMatrix, gamma: f64, force: bool) -> Result<SpdMatrix> {
    if force {
        return regularize(a, gamma);
    }
    match SpdMatrix::new(a.clone()) {
        Ok(s) => Ok(s),
        Err(Error::NotPositiveDefinite { .. }) => regularize(a, gamma),
        Err(e) => Err(e),
    }
}

/// Orthogonal projection onto the column span of `b`: `b (bᵀb)⁻¹ bᵀ`.
pub fn projection_matrix(b: &DenseMatrix) -> Result<DenseMatrix> {
    let gram = b.t_matmul(b)?;
    let eig = sym_eig(&gram)?;
    let largest = eig.values.first().copied().unwrap_or(0.0);
    let smallest = eig.values.last().copied().unwrap_or(0.0);
    if !(largest > 0.0) || smallest < RANK_TOL * largest {
        let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
        return Err(Error::RankDeficient { ratio });
    }
    // P = (b Q Λ^{-1/2})(b Q Λ^{-1/2})ᵀ: an orthonormal basis of the span.
    let d = b.cols();
    let w: Vec<f64> = eig.values.iter().map(|l| 1.0 / l.sqrt()).collect();
    let qw = DenseMatrix::from_fn(d, d, |i, j| eig.vectors[(i, j)] * w[j]);
    let u = b.matmul(&qw)?;
    let p = u.matmul(&u.transpose())?;
    Ok(p.symmetrized())
}

/// Orthonormal basis for the column span of `b` (modified Gram-Schmidt,
/// dropping columns whose residual norm falls below `tol` times the
/// original norm).
pub fn orthonormalize(b: &DenseMatrix, tol: f64) -> DenseMatrix {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..b.cols() {
        let mut v = b.column(j);
        let n0 = super::matrix::norm(&v);
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for u in &cols {
                let proj = super::matrix::dot(u, &v);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let n1 = super::matrix::norm(&v);
        if n1 > tol * n0 {
            v.iter_mut().for_each(|x| *x /= n1);
            cols.push(v);
        }
    }
    if cols.is_empty() {
        DenseMatrix::zeros(b.rows(), 0)
    } else {
        DenseMatrix::from_columns(&cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(n: usize, m: usize, seed: u64) -> DenseMatrix {
        let mut s = seed;
        DenseMatrix::from_fn(n, m, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    fn random_spd(n: usize, seed: u64) -> SpdMatrix {
        let a = lcg_matrix(n, n, seed);
        SpdMatrix::new(a.matmul(&a.transpose()).unwrap().add_identity(0.5)).unwrap()
    }

    fn max_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn cholesky_of_identity() {
        assert_eq!(cholesky(&SpdMatrix::identity(3)), DenseMatrix::identity(3));
    }

    #[test]
    fn cholesky_two_by_two() {
        let a = SpdMatrix::new(DenseMatrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]])).unwrap();
        let l = cholesky(&a);
        let expected = DenseMatrix::from_rows(&[[2.0, 0.0], [1.0, 2f64.sqrt()]]);
        assert!(max_diff(&l, &expected) < 1e-15);
        let back = l.matmul(&l.transpose()).unwrap();
        assert!(max_diff(&back, a.matrix()) <= 1e-12 * a.matrix().frobenius_norm());
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let err = SpdMatrix::new(DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { index: 1, .. }));
    }

    #[test]
    fn spd_rejects_asymmetric() {
        let err = SpdMatrix::new(DenseMatrix::from_rows(&[[1.0, 0.1], [0.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
    }

    #[test]
    fn sym_eig_diagonal() {
        let e = sym_eig(&DenseMatrix::diag(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors, DenseMatrix::identity(3));
    }

    #[test]
    fn sym_eig_sorts_unordered_diagonal() {
        let e = sym_eig(&DenseMatrix::diag(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors.column(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn sym_eig_identity() {
        let e = sym_eig(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
    }

    #[test]
    fn sym_eig_reconstructs_random() {
        let a = lcg_matrix(5, 5, 7).symmetrized();
        let e = sym_eig(&a).unwrap();
        let q = &e.vectors;
        let back = q
            .matmul(&DenseMatrix::diag(&e.values))
            .unwrap()
            .matmul(&q.transpose())
            .unwrap();
        assert!(max_diff(&back, &a) <= 1e-10 * a.frobenius_norm());
        assert!(max_diff(&q.t_matmul(q).unwrap(), &DenseMatrix::identity(5)) <= 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn sym_eig_sign_convention() {
        let a = DenseMatrix::from_rows(&[[2.0, -1.0], [-1.0, 2.0]]);
        let e = sym_eig(&a).unwrap();
        for j in 0..2 {
            let col = e.vectors.column(j);
            let big = col.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn inverse_examples() {
        let inv = spd_inverse(&SpdMatrix::identity(3)).unwrap();
        assert_eq!(inv.matrix(), &DenseMatrix::identity(3));
        let inv = spd_inverse(&SpdMatrix::new(DenseMatrix::diag(&[2.0, 2.0, 1.0])).unwrap()).unwrap();
        assert!(max_diff(inv.matrix(), &DenseMatrix::diag(&[0.5, 0.5, 1.0])) < 1e-15);
    }

    #[test]
    fn inverse_random_product_is_identity() {
        let a = random_spd(5, 3);
        let inv = spd_inverse(&a).unwrap();
        let prod = a.matrix().matmul(inv.matrix()).unwrap();
        assert!(max_diff(&prod, &DenseMatrix::identity(5)) < 1e-10);
        let back = spd_inverse(&inv).unwrap();
        assert!(max_diff(back.matrix(), a.matrix()) < 1e-8);
    }

    #[test]
    fn sqrt_examples() {
        let (s, is) = spd_sqrt_and_invsqrt(&SpdMatrix::new(DenseMatrix::diag(&[4.0, 9.0])).unwrap()).unwrap();
        assert!(max_diff(s.matrix(), &DenseMatrix::diag(&[2.0, 3.0])) < 1e-14);
        assert!(max_diff(is.matrix(), &DenseMatrix::diag(&[0.5, 1.0 / 3.0])) < 1e-14);
        let (s, is) = spd_sqrt_and_invsqrt(&SpdMatrix::identity(4)).unwrap();
        assert_eq!(s.matrix(), &DenseMatrix::identity(4));
        assert_eq!(is.matrix(), &DenseMatrix::identity(4));
    }

    #[test]
    fn sqrt_random_reconstructs() {
        let a = random_spd(6, 11);
        let (s, is) = spd_sqrt_and_invsqrt(&a).unwrap();
        assert!(max_diff(&s.matrix().matmul(s.matrix()).unwrap(), a.matrix()) < 1e-10);
        assert!(max_diff(&s.matrix().matmul(is.matrix()).unwrap(), &DenseMatrix::identity(6)) < 1e-10);
    }

    #[test]
    fn regularize_examples() {
        let r = regularize(&DenseMatrix::zeros(3, 3), 1e-6).unwrap();
        assert_eq!(r.matrix(), &DenseMatrix::identity(3).scale(1e-6));
        let a = random_spd(3, 5);
        assert_eq!(regularize(a.matrix(), 0.0).unwrap().matrix(), a.matrix());
        let u = [1.0, -2.0, 0.5];
        let rank1 = DenseMatrix::outer(&u, &u);
        assert!(SpdMatrix::new(rank1.clone()).is_err());
        assert!(regularize(&rank1, 1e-6).is_ok());
        assert!(matches!(
            regularize(&DenseMatrix::diag(&[1.0, -1.0]), 1e-6),
            Err(Error::StillSingular { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let e1 = DenseMatrix::column_vector(&[1.0, 0.0, 0.0]);
        assert_eq!(projection_matrix(&e1).unwrap(), DenseMatrix::diag(&[1.0, 0.0, 0.0]));
        let e12 = DenseMatrix::from_columns(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert!(max_diff(&projection_matrix(&e12).unwrap(), &DenseMatrix::diag(&[1.0, 1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn projection_invariant_under_column_mixing() {
        let b = lcg_matrix(7, 2, 19);
        let r = DenseMatrix::from_rows(&[[2.0, 1.0], [-0.5, 3.0]]);
        let p1 = projection_matrix(&b).unwrap();
        let p2 = projection_matrix(&b.matmul(&r).unwrap()).unwrap();
        assert!(max_diff(&p1, &p2) < 1e-10);
        assert!(max_diff(&p1.matmul(&p1).unwrap(), &p1) < 1e-10);
        assert!((p1.trace() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn projection_rejects_rank_deficient() {
        let b = DenseMatrix::from_columns(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]);
        assert!(matches!(projection_matrix(&b), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn orthonormalize_drops_dependent_columns() {
        let b = DenseMatrix::from_columns(&[[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 1.0]]);
        let q = orthonormalize(&b, 1e-10);
        assert_eq!(q.cols(), 2);
        assert!(max_diff(&q.t_matmul(&q).unwrap(), &DenseMatrix::identity(2)) < 1e-14);
    }
}
