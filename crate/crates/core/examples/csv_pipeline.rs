//! Full file-based workflow: write a training and test CSV, reduce with
//! SAVE, reorder by T, classify, and sweep the dimension.
//!
//!     cargo run --example csv_pipeline

use sdr_order::data::{save_csv, ResponseKind};
use sdr_order::experiment::{run_csv_pipeline, PipelineConfig, TestSource};
use sdr_order::kernels::Method;
use sdr_order::ordering::Criterion;
use sdr_order::simgen::{make_config, ConfigTag, RngStream};

fn main() -> sdr_order::Result<()> {
    let dir = std::env::temp_dir().join("sdr-order-csv-example");
    std::fs::create_dir_all(&dir).map_err(|e| sdr_order::Error::io(&dir, e))?;
    let mut rng = RngStream::new(3, 0);
    let inst = make_config(ConfigTag::Q3, 10, &mut rng)?;
    save_csv(dir.join("train.csv"), &inst.spec.sample_classes(&[200, 200], &mut rng)?)?;
    save_csv(dir.join("test.csv"), &inst.spec.sample_classes(&[1000, 1000], &mut rng)?)?;

    let mut cfg = PipelineConfig::new(dir.join("train.csv"), ResponseKind::Binary, Method::Save, Criterion::T, 2);
    cfg.test = TestSource::File(dir.join("test.csv"));
    cfg.sweep_max = Some(5);
    cfg.reduced_output = Some(dir.join("reduced.csv"));
    let report = run_csv_pipeline(&cfg)?;

    println!("T scores: {:.3?}", report.scores);
    println!("ranks:    {:?}", report.ranks);
    println!("selected: {:?}", report.selected);
    println!("test CER {:.4} vs all features {:.4}", report.test_cer.unwrap_or(f64::NAN), report.baseline_test_cer.unwrap_or(f64::NAN));
    for s in &report.sweep {
        println!("d={} test CER {:.4}", s.d, s.test_cer.unwrap_or(f64::NAN));
    }
    Ok(())
}
