//! Dense symmetric linear algebra and the generalized eigenvalue solver.

mod decomp;
mod gev;
mod matrix;

pub use decomp::{
    cholesky, cholesky_factor, orthonormalize, projection_matrix, regularize, spd_inverse,
    spd_or_regularize, spd_sqrt_and_invsqrt, sym_eig, SpdMatrix, SymEig,
};
pub use gev::{gev_solve, GevBasis, Normalization};
pub use matrix::{dot, format_f64, norm, DenseMatrix};
