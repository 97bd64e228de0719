//! Closed-form Bayes error of two univariate normals against a Monte Carlo
//! estimate.
//!
//!     cargo run --release --example oer_validation

use sdr_order::discriminant::{mc_oer_oracle, oer_1d, OerInputs1D};

fn main() -> sdr_order::Result<()> {
    let cases = [(0.0, 1.0, 1.0, 1.0), (0.0, 0.0, 0.2, 1.0), (0.5, 2.0, 1.0, 3.0), (-1.0, 1.0, 0.5, 0.7)];
    for (mu1, mu2, sigma1, sigma2) in cases {
        let input = OerInputs1D { mu1, mu2, sigma1, sigma2 };
        let exact = oer_1d(&input)?;
        let mc = mc_oer_oracle(&input, 2_000_000, 11)?;
        println!(
            "mu=({mu1}, {mu2}) sigma=({sigma1}, {sigma2}): exact {exact:.6}  mc {:.6} ± {:.6}",
            mc.estimate, mc.standard_error
        );
    }
    Ok(())
}
