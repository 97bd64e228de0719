//! Solving `M v = λ N v` directly and checking the returned basis.
//!
//!     cargo run --example gev_basis

use sdr_order::linalg::{gev_solve, DenseMatrix, SpdMatrix};

fn main() -> sdr_order::Result<()> {
    let m = DenseMatrix::from_rows(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 0.5], vec![0.0, 0.5, 1.0]]);
    let n = SpdMatrix::new(DenseMatrix::from_rows(&[
        vec![2.0, 0.3, 0.0],
        vec![0.3, 1.0, 0.1],
        vec![0.0, 0.1, 0.5],
    ]))?;
    let basis = gev_solve(&m, &n)?;
    println!("eigenvalues: {:?}", basis.values());
    for j in 0..3 {
        println!("direction {} residual {:.2e}", j + 1, basis.residual(j, &m, &n)?);
    }
    let gram = basis.vectors().t_matmul(&n.matrix().matmul(basis.vectors())?)?;
    println!("max |VᵀNV - I| = {:.2e}", gram.sub(&DenseMatrix::identity(3))?.max_abs());
    Ok(())
}
