//! Three-dimensional two-class problem where variance and discriminative
//! power point in opposite directions. PCA on the pooled covariance orders
//! the axes by spread; T reverses that order.
//!
//!     cargo run --example illustrative_example

use sdr_order::data::group_moments;
use sdr_order::discriminant::{oer_1d, OerInputs1D};
use sdr_order::kernels::{build_kernel, KernelSpec, Method};
use sdr_order::linalg::DenseMatrix;
use sdr_order::ordering::{population_delta, score_eigenvalue, score_t_matrix};
use sdr_order::simgen::{illustrative_spec, RngStream};

fn main() -> sdr_order::Result<()> {
    let spec = illustrative_spec(5.0, 2.0)?;
    let data = spec.sample_classes(&[1000, 1000], &mut RngStream::new(7, 0))?;
    let groups = data.groups().expect("class labels");
    let moments = group_moments(&data, &groups)?;
    let basis = build_kernel(&KernelSpec::new(Method::Pca), &moments)?.solve()?;

    let by_eigen = score_eigenvalue(&basis);
    let by_t = score_t_matrix(basis.vectors(), data.x(), &groups)?;
    let delta = population_delta(&spec, basis.vectors())?;

    println!("{:>3} {:>10} {:>5} {:>8} {:>5} {:>8} {:>8}", "dir", "eigenvalue", "rank", "T", "rank", "Delta", "1D error");
    let proj = data.x().matmul(basis.vectors())?;
    for j in 0..3 {
        let z = DenseMatrix::column_vector(&proj.column(j));
        let m = sdr_order::data::moments_from_matrix(&z, &groups)?;
        let err = oer_1d(&OerInputs1D {
            mu1: m.means[0][0],
            mu2: m.means[1][0],
            sigma1: m.covariances[0][(0, 0)].sqrt(),
            sigma2: m.covariances[1][(0, 0)].sqrt(),
        })?;
        println!(
            "{:>3} {:>10.4} {:>5} {:>8.3} {:>5} {:>8.3} {:>8.4}",
            j + 1,
            basis.values()[j],
            by_eigen.ranks[j],
            by_t.scores[j],
            by_t.ranks[j],
            delta.scores[j],
            err
        );
    }
    Ok(())
}
