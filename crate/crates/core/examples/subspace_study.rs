//! Recovery of the true central subspace in a regression model, measured
//! by the subspace distance.
//!
//!     cargo run --release --example subspace_study

use sdr_order::experiment::{run_experiment, summarize, ExperimentConfig};
use sdr_order::kernels::Method;
use sdr_order::ordering::Criterion;

fn main() -> sdr_order::Result<()> {
    let mut cfg = ExperimentConfig::for_tag("D1".parse()?);
    cfg.sizes = vec![255, 500];
    cfg.replicates = 20;
    cfg.p = 10;
    cfg.methods = vec![Method::Pca, Method::Sir, Method::Save];
    cfg.criteria = vec![Criterion::Eigenvalue, Criterion::F];
    cfg.validate()?;
    for s in summarize(&run_experiment(&cfg)?.rows)? {
        println!("{:>4} {:<14} median distance {:.4}", s.n, s.label, s.median);
    }
    Ok(())
}
