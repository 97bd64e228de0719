//! Replicated simulation runs.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{group_moments, slice_continuous, Groups, LabeledDataset, Response};
use crate::discriminant::{ClassifierKind, GaussianClassifier};
use crate::error::{Error, Result};
use crate::kernels::{build_kernel, Method};
use crate::linalg::{DenseMatrix, GevBasis};
use crate::metrics::subspace_distance;
use crate::ordering::{project, reorder_and_truncate, score, Criterion};
use crate::simgen::{make_config, make_regression, RngStream};

use super::config::{ExperimentConfig, ExperimentMode, SimulationTag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "CER")]
    Cer,
    #[serde(rename = "D")]
    Distance,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Cer => "CER",
            Self::Distance => "D",
        }
    }
}

/// One recorded value.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub tag: String,
    /// Training size: per class for classification, total for regression.
    pub n: usize,
    /// `None` on the full-feature baseline row.
    pub method: Option<Method>,
    pub criterion: Option<Criterion>,
    /// `PCA_T`, `SIR2`, or the classifier name for the baseline.
    pub label: String,
    pub metric: MetricKind,
    pub value: f64,
    /// Full-feature CER of the same replicate.
    pub baseline: Option<f64>,
}

/// Wall time for one row, kept apart from the results so that those stay
/// byte-reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct Timing {
    pub replicate: usize,
    pub n: usize,
    pub label: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ReplicateResult>,
    pub timings: Vec<Timing>,
}

/// Stream index for replicate `rep` of the `size_index`-th sample size.
pub fn stream_index(size_index: usize, rep: usize) -> u64 {
    ((size_index as u64) << 32) | rep as u64
}

fn check_unit(value: f64, context: &str) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            context: context.to_string(),
            value,
        })
    }
}

struct Acc {
    out: ExperimentOutput,
    replicate: usize,
    tag: String,
    n: usize,
}

impl Acc {
    fn push(&mut self, method: Option<Method>, criterion: Option<Criterion>, label: String, metric: MetricKind, value: f64, baseline: Option<f64>, started: Instant) -> Result<()> {
        let value = check_unit(value, &format!("{} of {label}, replicate {}", metric.name(), self.replicate))?;
        self.out.timings.push(Timing {
            replicate: self.replicate,
            n: self.n,
            label: label.clone(),
            seconds: started.elapsed().as_secs_f64(),
        });
        self.out.rows.push(ReplicateResult {
            replicate: self.replicate,
            tag: self.tag.clone(),
            n: self.n,
            method,
            criterion,
            label,
            metric,
            value,
            baseline,
        });
        Ok(())
    }
}

fn labels_of(d: &LabeledDataset) -> &[usize] {
    d.response().labels().expect("class response")
}

/// Reduced-space CER of `basis` under `criterion`.
#[allow(clippy::too_many_arguments)]
pub fn reduced_cer(basis: &GevBasis, criterion: Criterion, d: usize, train: &LabeledDataset, groups: &Groups, test: &LabeledDataset, kind: ClassifierKind, gamma: f64) -> Result<f64> {
    let scores = score(criterion, basis, train.x(), groups)?;
    let reduced = reorder_and_truncate(basis, &scores, d)?;
    let clf = GaussianClassifier::fit(kind, &project(&reduced, train.x())?, groups, gamma)?;
    clf.cer(&project(&reduced, test.x())?, labels_of(test))
}

fn classification_replicate(cfg: &ExperimentConfig, tag: SimulationTag, size_index: usize, n: usize, rep: usize) -> Result<ExperimentOutput> {
    let SimulationTag::Classification(ctag) = tag else {
        return Err(Error::config("mode", "regression configurations have no classes"));
    };
    let kind = cfg.classifier_kind().ok_or_else(|| Error::config("classifier", "none selected"))?;
    let mut rng = RngStream::new(cfg.seed, stream_index(size_index, rep));
    let inst = make_config(ctag, cfg.p, &mut rng)?;
    let d = cfg.d.unwrap_or(inst.d);
    let train = inst.spec.sample_classes(&[n, n], &mut rng)?;
    let test = inst.spec.sample_classes(&[cfg.test_per_class, cfg.test_per_class], &mut rng)?;
    let groups = train.groups().expect("class response");
    let mut acc = Acc {
        out: ExperimentOutput::default(),
        replicate: rep,
        tag: tag.to_string(),
        n,
    };

    let started = Instant::now();
    let baseline = GaussianClassifier::fit(kind, train.x(), &groups, cfg.gamma)?.cer(test.x(), labels_of(&test))?;
    acc.push(None, None, kind.to_string(), MetricKind::Cer, baseline, Some(baseline), started)?;

    let moments = group_moments(&train, &groups)?;
    for &method in &cfg.methods {
        let started = Instant::now();
        // Every criterion reorders this one solve.
        let basis = build_kernel(&cfg.kernel_spec(method), &moments)?.solve()?;
        for &criterion in &cfg.criteria {
            let value = reduced_cer(&basis, criterion, d, &train, &groups, &test, kind, cfg.gamma)?;
            acc.push(Some(method), Some(criterion), criterion.label(method), MetricKind::Cer, value, Some(baseline), started)?;
        }
    }
    Ok(acc.out)
}

fn subspace_replicate(cfg: &ExperimentConfig, tag: SimulationTag, size_index: usize, n: usize, rep: usize) -> Result<ExperimentOutput> {
    let mut rng = RngStream::new(cfg.seed, stream_index(size_index, rep));
    let (data, groups, truth): (LabeledDataset, Groups, DenseMatrix) = match tag {
        SimulationTag::Regression(rtag) => {
            let spec = make_regression(rtag, cfg.p, &mut rng)?;
            let data = spec.sample(n, &mut rng)?;
            let Response::Continuous(y) = data.response() else {
                unreachable!("regression samples are continuous")
            };
            let groups = slice_continuous(y, cfg.slices)?.groups();
            (data, groups, spec.truth())
        }
        SimulationTag::Classification(ctag) => {
            let inst = make_config(ctag, cfg.p, &mut rng)?;
            let data = inst.spec.sample_classes(&[n, n], &mut rng)?;
            let groups = data.groups().expect("class response");
            (data, groups, inst.truth)
        }
    };
    let d = truth.cols();
    if let Some(requested) = cfg.d {
        if requested != d {
            return Err(Error::config("d", format!("subspace runs use the true dimension {d}, got {requested}")));
        }
    }
    let mut acc = Acc {
        out: ExperimentOutput::default(),
        replicate: rep,
        tag: tag.to_string(),
        n,
    };
    let moments = group_moments(&data, &groups)?;
    for &method in &cfg.methods {
        let started = Instant::now();
        let basis = build_kernel(&cfg.kernel_spec(method), &moments)?.solve()?;
        for &criterion in &cfg.criteria {
            let scores = score(criterion, &basis, data.x(), &groups)?;
            let reduced = reorder_and_truncate(&basis, &scores, d)?;
            let value = subspace_distance(&truth, &reduced.columns)?;
            acc.push(Some(method), Some(criterion), criterion.label(method), MetricKind::Distance, value, None, started)?;
        }
    }
    Ok(acc.out)
}

fn run_replicates<F>(cfg: &ExperimentConfig, f: F) -> Result<ExperimentOutput>
where
    F: Fn(&ExperimentConfig, SimulationTag, usize, usize, usize) -> Result<ExperimentOutput> + Sync,
{
    cfg.validate()?;
    let tag = cfg.tag.expect("validated");
    let tasks: Vec<(usize, usize, usize)> = cfg
        .sizes
        .iter()
        .enumerate()
        .flat_map(|(si, &n)| (0..cfg.replicates).map(move |rep| (si, n, rep)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::config("threads", e.to_string()))?;
    let parts: Vec<ExperimentOutput> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(si, n, rep)| f(cfg, tag, si, n, rep))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut out = ExperimentOutput::default();
    for part in parts {
        out.rows.extend(part.rows);
        out.timings.extend(part.timings);
    }
    Ok(out)
}

/// Per replicate: draw training and test sets, solve each method once,
/// reduce by every criterion, and record the reduced and full-feature CER.
pub fn run_classification_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.resolved_mode() != ExperimentMode::Classification {
        return Err(Error::config("mode", "not a classification configuration"));
    }
    run_replicates(cfg, classification_replicate)
}

/// Per replicate: distance between the true subspace and each
/// method/criterion estimate at the true dimension.
pub fn run_subspace_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut cfg = cfg.clone();
    cfg.mode = ExperimentMode::Subspace;
    run_replicates(&cfg, subspace_replicate)
}

/// Dispatches on the configuration's mode.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.resolved_mode() {
        ExperimentMode::Subspace => run_subspace_experiment(cfg),
        _ => run_classification_experiment(cfg),
    }
}
