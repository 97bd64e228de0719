//! A small replicated study on one of the simulated configurations.
//! Pass a tag and optionally an output directory:
//!
//!     cargo run --release --example classification_study -- Q3 /tmp/q3

use sdr_order::experiment::{emit_outputs, run_experiment, summarize, ExperimentConfig};
use sdr_order::kernels::Method;

fn main() -> sdr_order::Result<()> {
    let mut args = std::env::args().skip(1);
    let tag = args.next().unwrap_or_else(|| "Q3".into());
    let mut cfg = ExperimentConfig::for_tag(tag.parse()?);
    cfg.sizes = vec![100, 250];
    cfg.replicates = 20;
    cfg.test_per_class = 500;
    cfg.methods = vec![Method::Pca, Method::Sir, Method::Save, Method::Sir2];
    cfg.validate()?;

    let out = run_experiment(&cfg)?;
    for s in summarize(&out.rows)? {
        println!("{:>4} {:<12} median {:.4}  [{:.4}, {:.4}]", s.n, s.label, s.median, s.q25, s.q75);
    }
    if let Some(dir) = args.next() {
        let files = emit_outputs(&cfg, &out, &dir)?;
        println!("wrote {}", files.replicates.display());
    }
    Ok(())
}
