//! How often the sample T ranking reproduces the population Δ ranking as
//! the sample grows.
//!
//!     cargo run --release --example rank_consistency

use sdr_order::data::group_moments;
use sdr_order::kernels::{build_kernel, KernelSpec, Method};
use sdr_order::ordering::{population_delta, rank_order, score_t_matrix};
use sdr_order::simgen::{illustrative_spec, RngStream};

fn main() -> sdr_order::Result<()> {
    let spec = illustrative_spec(1.2, 1.0)?;
    for n in [25, 100, 400, 1600] {
        let reps = 200;
        let mut hits = 0;
        for seed in 0..reps {
            let data = spec.sample_classes(&[n, n], &mut RngStream::new(seed, n as u64))?;
            let groups = data.groups().expect("class labels");
            let basis = build_kernel(&KernelSpec::new(Method::Pca), &group_moments(&data, &groups)?)?.solve()?;
            let sample = score_t_matrix(basis.vectors(), data.x(), &groups)?;
            let truth = rank_order(&population_delta(&spec, basis.vectors())?.scores);
            if sample.ranks[..] == truth[..] {
                hits += 1;
            }
        }
        println!("n = {n:>4} per class: ranks agree in {:.1}% of samples", 100.0 * hits as f64 / reps as f64);
    }
    Ok(())
}
