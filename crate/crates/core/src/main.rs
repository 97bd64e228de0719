use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdr_order::data::{ColumnRef, CsvSchema, ResponseKind};
use sdr_order::discriminant::{mc_oer_oracle, oer_1d, ClassifierKind, OerInputs1D};
use sdr_order::experiment::csv_pipeline::write_scores;
use sdr_order::experiment::{
    emit_outputs, run_csv_pipeline, run_experiment, summarize, ClassifierChoice, ExperimentConfig, ExperimentMode,
    PipelineConfig, PipelineReport, SimulationTag, TestSource,
};
use sdr_order::kernels::{Method, PcaCovariance, Sir2Scale, DEFAULT_GAMMA};
use sdr_order::linalg::DenseMatrix;
use sdr_order::metrics::subspace_distance;
use sdr_order::ordering::Criterion;
use sdr_order::{Error, Result};

#[derive(Parser)]
#[command(name = "sdr-order", version, about = "Dimension-reduction subspaces ordered by predictive criteria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated simulation study and write result files.
    Simulate(SimulateArgs),
    /// Estimate and reorder a basis on one CSV file, writing reduced coordinates.
    Reduce(ReduceArgs),
    /// Reduce, fit a Gaussian classifier, and report test error.
    Classify(ClassifyArgs),
    /// Subspace distance between two basis matrices (headerless CSV).
    Distance { a: PathBuf, b: PathBuf },
    /// Bayes error of two univariate normal classes.
    Oer(OerArgs),
}

fn list<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<Vec<T>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse()).collect()
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML configuration file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Q1, Q2, Q3, L1, L2, L3, D1, D2 or D3.
    #[arg(long)]
    tag: Option<String>,
    /// Comma-separated training sizes.
    #[arg(long)]
    sizes: Option<String>,
    /// Comma-separated methods (PCA, SIR, SAVE, SIR2, DR, SSDR).
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated criteria (EIGENVALUE, T, F).
    #[arg(long)]
    criteria: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// auto, lda, qda or none.
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    slices: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    test_per_class: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Record subspace distance instead of CER.
    #[arg(long)]
    subspace: bool,
    /// Extra `key=value` overrides using config-file field names.
    #[arg(long = "set")]
    overrides: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, default_value = "SIR2")]
    method: String,
    #[arg(long, default_value = "T")]
    criterion: String,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Slices for a continuous response.
    #[arg(long = "slices", short = 'H', default_value_t = 5)]
    slices: usize,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    /// Regularize even when the covariance factors.
    #[arg(long)]
    force_gamma: bool,
    /// Decompose the marginal covariance in PCA instead of the pooled one.
    #[arg(long)]
    pca_marginal: bool,
    /// Use the whitened SIR-II kernel with the identity metric.
    #[arg(long)]
    sir2_conjugated: bool,
    /// binary, categorical or continuous.
    #[arg(long, default_value = "binary")]
    response_kind: String,
    /// Response column name or 0-based index; last column by default.
    #[arg(long)]
    response_column: Option<String>,
    #[arg(long)]
    no_header: bool,
    /// Per-direction scores and ranks as CSV.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    input: PathBuf,
    /// Reduced coordinates.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    train: PathBuf,
    /// Test CSV; alternatively use --split.
    #[arg(long, conflicts_with = "split")]
    test: Option<PathBuf>,
    /// Training share of a stratified random split of --train.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "qda")]
    classifier: String,
    /// Also report CER for d = 1..=SWEEP.
    #[arg(long)]
    sweep: Option<usize>,
    /// Reduced test coordinates.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args)]
struct OerArgs {
    #[arg(long, allow_negative_numbers = true)]
    mu1: f64,
    #[arg(long, allow_negative_numbers = true)]
    mu2: f64,
    #[arg(long)]
    sigma1: f64,
    #[arg(long)]
    sigma2: f64,
    /// Also estimate by simulation with this many draws.
    #[arg(long)]
    mc: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn build_experiment(a: &SimulateArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&a.config, &a.tag) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(tag)) => ExperimentConfig::for_tag(tag.parse()?),
        (None, None) => return Err(Error::config("tag", "give --tag or --config")),
    };
    if let (Some(_), Some(tag)) = (&a.config, &a.tag) {
        cfg.tag = Some(tag.parse::<SimulationTag>()?);
    }
    if let Some(s) = &a.sizes {
        cfg.sizes = s
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| Error::config("sizes", format!("not a size: {t:?}"))))
            .collect::<Result<_>>()?;
    }
    if let Some(s) = &a.methods {
        cfg.methods = list(s)?;
    }
    if let Some(s) = &a.criteria {
        cfg.criteria = list(s)?;
    }
    if let Some(s) = &a.classifier {
        cfg.classifier = s.parse::<ClassifierChoice>()?;
    }
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { cfg.$f = v; } )* };
    }
    set!(replicates, seed, slices, gamma, test_per_class, p);
    if a.d.is_some() {
        cfg.d = a.d;
    }
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    if a.subspace {
        cfg.mode = ExperimentMode::Subspace;
    }
    if a.out.is_some() {
        cfg.output = a.out.clone();
    }
    for o in &a.overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = build_experiment(a)?;
    let out = run_experiment(&cfg)?;
    let summary = summarize(&out.rows)?;
    println!("{:<6} {:>6} {:<12} {:>6} {:>8} {:>8} {:>8}", "tag", "n", "label", "metric", "median", "q25", "q75");
    for s in &summary {
        println!(
            "{:<6} {:>6} {:<12} {:>6} {:>8.4} {:>8.4} {:>8.4}",
            s.tag,
            s.n,
            s.label,
            s.metric.name(),
            s.median,
            s.q25,
            s.q75
        );
    }
    if let Some(dir) = &cfg.output {
        let files = emit_outputs(&cfg, &out, dir)?;
        println!("wrote {}", files.replicates.display());
    }
    Ok(())
}

fn pipeline_config(train: &PathBuf, f: &FitArgs) -> Result<PipelineConfig> {
    let kind: ResponseKind = f.response_kind.parse()?;
    let mut cfg = PipelineConfig::new(train, kind, f.method.parse::<Method>()?, f.criterion.parse::<Criterion>()?, f.d);
    cfg.slices = f.slices;
    cfg.gamma = f.gamma;
    cfg.force_gamma = f.force_gamma;
    if f.pca_marginal {
        cfg.pca_covariance = PcaCovariance::Marginal;
    }
    if f.sir2_conjugated {
        cfg.sir2_scale = Sir2Scale::Conjugated;
    }
    cfg.schema = CsvSchema {
        response_column: match &f.response_column {
            None => ColumnRef::Name(String::new()),
            Some(c) => c.parse::<usize>().map_or_else(|_| ColumnRef::Name(c.clone()), ColumnRef::Index),
        },
        response_kind: kind,
        has_header: !f.no_header,
    };
    Ok(cfg)
}

fn print_report(r: &PipelineReport) {
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    println!("{:>9} {:>14} {:>14} {:>5}", "direction", "eigenvalue", r.label.as_str(), "rank");
    for j in 0..r.scores.len() {
        println!("{:>9} {:>14.6e} {:>14.6e} {:>5}", j + 1, r.eigenvalues[j], r.scores[j], r.ranks[j]);
    }
    let sel: Vec<String> = r.selected.iter().map(ToString::to_string).collect();
    println!("selected directions: {}", sel.join(","));
    if let Some(c) = r.train_cer {
        println!("train CER: {c:.4}");
    }
    if let Some(c) = r.test_cer {
        println!("test CER: {c:.4}");
    }
    if let Some(c) = r.baseline_test_cer {
        println!("full-feature test CER: {c:.4}");
    }
    if let Some(f) = &r.test_f {
        let v: Vec<String> = f.iter().map(|x| format!("{x:.4}")).collect();
        println!("test F of selected directions: {}", v.join(","));
    }
    for s in &r.sweep {
        match s.test_cer {
            Some(t) => println!("d={} train CER {:.4} test CER {:.4}", s.d, s.train_cer, t),
            None => println!("d={} train CER {:.4}", s.d, s.train_cer),
        }
    }
}

fn finish(report: &PipelineReport, f: &FitArgs) -> Result<()> {
    print_report(report);
    if let Some(path) = &f.scores {
        write_scores(report, path)?;
    }
    if let Some(path) = &f.report {
        let text = serde_json::to_string_pretty(report)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn reduce(a: &ReduceArgs) -> Result<()> {
    let mut cfg = pipeline_config(&a.input, &a.fit)?;
    cfg.reduced_output = Some(a.output.clone());
    finish(&run_csv_pipeline(&cfg)?, &a.fit)
}

fn classify(a: &ClassifyArgs) -> Result<()> {
    let mut cfg = pipeline_config(&a.train, &a.fit)?;
    if cfg.schema.response_kind == ResponseKind::Continuous {
        return Err(Error::config("response_kind", "classify needs a class response"));
    }
    cfg.test = match (&a.test, a.split) {
        (Some(t), _) => TestSource::File(t.clone()),
        (None, Some(f)) => TestSource::Split {
            train_fraction: f,
            seed: a.seed,
        },
        (None, None) => return Err(Error::config("test", "give --test or --split")),
    };
    cfg.classifier = a.classifier.parse::<ClassifierKind>()?;
    cfg.sweep_max = a.sweep;
    cfg.reduced_output = a.output.clone();
    finish(&run_csv_pipeline(&cfg)?, &a.fit)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Reduce(a) => reduce(&a),
        Command::Classify(a) => classify(&a),
        Command::Distance { a, b } => {
            let d = subspace_distance(&DenseMatrix::read_csv(&a)?, &DenseMatrix::read_csv(&b)?)?;
            println!("{d:.12}");
            Ok(())
        }
        Command::Oer(a) => {
            let input = OerInputs1D {
                mu1: a.mu1,
                mu2: a.mu2,
                sigma1: a.sigma1,
                sigma2: a.sigma2,
            };
            println!("{:.12}", oer_1d(&input)?);
            if let Some(n) = a.mc {
                let mc = mc_oer_oracle(&input, n, a.seed)?;
                println!("monte carlo: {:.6} (se {:.6}, {} draws)", mc.estimate, mc.standard_error, mc.samples);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
