//! Reduce and classify user-supplied CSV data.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{group_moments, load_csv, save_csv, slice_continuous, CsvSchema, Groups, LabeledDataset, Response, ResponseKind};
use crate::discriminant::{ClassifierKind, GaussianClassifier};
use crate::error::{Error, Result};
use crate::kernels::{build_kernel, KernelSpec, Method, PcaCovariance, Sir2Scale, DEFAULT_GAMMA};
use crate::linalg::GevBasis;
use crate::ordering::{project, reorder_and_truncate, score, score_f_matrix, Criterion, CriterionScores};

/// Where the test data comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSource {
    /// Fit and report on the training file only.
    None,
    File(PathBuf),
    /// Stratified random split of the training file.
    Split { train_fraction: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub train: PathBuf,
    pub test: TestSource,
    pub schema: CsvSchema,
    pub method: Method,
    pub criterion: Criterion,
    pub d: usize,
    /// Also report CER for every `d` in `1..=d_max`.
    pub sweep_max: Option<usize>,
    pub slices: usize,
    pub gamma: f64,
    pub force_gamma: bool,
    pub pca_covariance: PcaCovariance,
    pub sir2_scale: Sir2Scale,
    /// Classifier for class responses; ignored for continuous ones.
    pub classifier: ClassifierKind,
    /// Reduced coordinates (test rows when available) go here.
    pub reduced_output: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(train: impl Into<PathBuf>, kind: ResponseKind, method: Method, criterion: Criterion, d: usize) -> Self {
        Self {
            train: train.into(),
            test: TestSource::None,
            schema: CsvSchema::last_column(kind),
            method,
            criterion,
            d,
            sweep_max: None,
            slices: 5,
            gamma: DEFAULT_GAMMA,
            force_gamma: false,
            pca_covariance: PcaCovariance::default(),
            sir2_scale: Sir2Scale::default(),
            classifier: ClassifierKind::Qda,
            reduced_output: None,
        }
    }

    fn kernel_spec(&self) -> KernelSpec {
        KernelSpec {
            method: self.method,
            gamma: self.gamma,
            force_gamma: self.force_gamma,
            pca_covariance: self.pca_covariance,
            sir2_scale: self.sir2_scale,
        }
    }
}

/// One point of the optional dimension sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub d: usize,
    pub train_cer: f64,
    pub test_cer: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub label: String,
    pub eigenvalues: Vec<f64>,
    pub scores: Vec<f64>,
    pub ranks: Vec<usize>,
    /// 1-based directions kept, best first.
    pub selected: Vec<usize>,
    /// Directions whose score had a zero denominator.
    pub degenerate: Vec<usize>,
    pub train_cer: Option<f64>,
    pub test_cer: Option<f64>,
    pub baseline_test_cer: Option<f64>,
    /// F scores of the kept directions on the test slices (continuous response).
    pub test_f: Option<Vec<f64>>,
    pub sweep: Vec<SweepPoint>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub criterion_scores: Option<CriterionScores>,
}

fn groups_for(d: &LabeledDataset, slices: usize) -> Result<Groups> {
    match d.response() {
        Response::Continuous(y) => Ok(slice_continuous(y, slices)?.groups()),
        _ => Ok(d.groups().expect("class response")),
    }
}

/// Re-expresses `test` labels in the training label numbering.
pub fn align_labels(train: &LabeledDataset, test: LabeledDataset) -> Result<LabeledDataset> {
    let Some(labels) = test.response().labels() else {
        return Ok(test);
    };
    if test.p() != train.p() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} predictors", train.p()),
            got: format!("{}", test.p()),
        });
    }
    let map: Vec<usize> = test
        .class_names()
        .iter()
        .map(|name| {
            train
                .class_names()
                .iter()
                .position(|t| t == name)
                .ok_or_else(|| Error::config("test", format!("class {name:?} does not occur in the training data")))
        })
        .collect::<Result<_>>()?;
    let mapped: Vec<usize> = labels.iter().map(|&l| map[l]).collect();
    let response = match test.response() {
        Response::Binary(_) => Response::Binary(mapped),
        _ => Response::Categorical(mapped),
    };
    LabeledDataset::with_names(
        test.x().clone(),
        response,
        train.class_names().to_vec(),
        Some(test.feature_names().to_vec()),
    )
}

fn load_sets(cfg: &PipelineConfig) -> Result<(LabeledDataset, Option<LabeledDataset>)> {
    let full = load_csv(&cfg.train, &cfg.schema)?;
    match &cfg.test {
        TestSource::None => Ok((full, None)),
        TestSource::File(path) => {
            let test = load_csv(path, &cfg.schema)?;
            let test = align_labels(&full, test)?;
            Ok((full, Some(test)))
        }
        TestSource::Split { train_fraction, seed } => {
            let (a, b) = full.split(*train_fraction, *seed)?;
            Ok((a, Some(b)))
        }
    }
}

fn cer_at(basis: &GevBasis, scores: &CriterionScores, d: usize, kind: ClassifierKind, gamma: f64, train: &LabeledDataset, groups: &Groups, test: Option<&LabeledDataset>) -> Result<(f64, Option<f64>)> {
    let reduced = reorder_and_truncate(basis, scores, d)?;
    let clf = GaussianClassifier::fit(kind, &project(&reduced, train.x())?, groups, gamma)?;
    let train_cer = clf.cer(&project(&reduced, train.x())?, &groups.membership)?;
    let test_cer = match test {
        Some(t) => Some(clf.cer(&project(&reduced, t.x())?, t.response().labels().expect("class response"))?),
        None => None,
    };
    Ok((train_cer, test_cer))
}

/// Fits the chosen method on the training data, scores and ranks every
/// direction, reduces to `d`, and evaluates on the test data.
pub fn run_csv_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport> {
    if cfg.d == 0 {
        return Err(Error::config("d", "must be at least 1"));
    }
    cfg.kernel_spec().validate()?;
    let (train, test) = load_sets(cfg)?;
    if cfg.d > train.p() {
        return Err(Error::DimensionTooLarge { d: cfg.d, p: train.p() });
    }
    let mut warnings = Vec::new();
    if let Some(t) = &test {
        if t.x() == train.x() && t.response() == train.response() {
            warnings.push("training and test data are identical; test error is a resubstitution estimate".into());
        }
    }
    let classes = train.response().kind() != ResponseKind::Continuous;
    let groups = groups_for(&train, cfg.slices)?;
    let moments = group_moments(&train, &groups)?;
    let basis = build_kernel(&cfg.kernel_spec(), &moments)?.solve()?;
    let scores = score(cfg.criterion, &basis, train.x(), &groups)?;
    let reduced = reorder_and_truncate(&basis, &scores, cfg.d)?;
    if !scores.degenerate.is_empty() {
        warnings.push(format!("{} direction(s) had a zero score denominator", scores.degenerate.len()));
    }

    let mut report = PipelineReport {
        label: cfg.criterion.label(cfg.method),
        eigenvalues: basis.values().to_vec(),
        scores: scores.scores.clone(),
        ranks: scores.ranks.clone(),
        selected: reduced.indices.iter().map(|i| i + 1).collect(),
        degenerate: scores.degenerate.iter().map(|i| i + 1).collect(),
        train_cer: None,
        test_cer: None,
        baseline_test_cer: None,
        test_f: None,
        sweep: Vec::new(),
        warnings,
        criterion_scores: None,
    };

    if classes {
        let (train_cer, test_cer) = cer_at(&basis, &scores, cfg.d, cfg.classifier, cfg.gamma, &train, &groups, test.as_ref())?;
        report.train_cer = Some(train_cer);
        report.test_cer = test_cer;
        if let Some(t) = &test {
            let full = GaussianClassifier::fit(cfg.classifier, train.x(), &groups, cfg.gamma)?;
            report.baseline_test_cer = Some(full.cer(t.x(), t.response().labels().expect("class response"))?);
        }
        if let Some(d_max) = cfg.sweep_max {
            for d in 1..=d_max.min(train.p()) {
                let (train_cer, test_cer) = cer_at(&basis, &scores, d, cfg.classifier, cfg.gamma, &train, &groups, test.as_ref())?;
                report.sweep.push(SweepPoint { d, train_cer, test_cer });
            }
        }
    } else if let Some(t) = &test {
        match groups_for(t, cfg.slices) {
            Ok(tg) => report.test_f = Some(score_f_matrix(&reduced.columns, t.x(), &tg)?.scores),
            Err(e) => report.warnings.push(format!("test-set F scores skipped: {e}")),
        }
    }

    if let Some(path) = &cfg.reduced_output {
        let source = test.as_ref().unwrap_or(&train);
        let reduced_set = reduced_dataset(source, &project(&reduced, source.x())?)?;
        save_csv(path, &reduced_set)?;
    }
    report.criterion_scores = Some(scores);
    Ok(report)
}

fn reduced_dataset(source: &LabeledDataset, z: &crate::linalg::DenseMatrix) -> Result<LabeledDataset> {
    let names = (1..=z.cols()).map(|j| format!("dir{j}")).collect();
    LabeledDataset::with_names(z.clone(), source.response().clone(), source.class_names().to_vec(), Some(names))
}

/// Writes the per-direction table of a report.
pub fn write_scores(report: &PipelineReport, path: impl AsRef<Path>) -> Result<()> {
    match &report.criterion_scores {
        Some(s) => s.write_csv(path, &report.eigenvalues),
        None => Err(Error::EmptyInput),
    }
}
