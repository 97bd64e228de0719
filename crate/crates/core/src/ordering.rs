//! Direction scoring, rank-order vectors and reduced bases.
//!
//! A [`GevBasis`] comes out of the solver ordered by eigenvalue. The
//! functions here score every direction by a predictive criterion and pick
//! the top `d` by that score instead.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Groups, LabeledDataset};
use crate::error::{Error, Result};
use crate::kernels::Method;
use crate::linalg::{format_f64, DenseMatrix, GevBasis};
use crate::simgen::GaussianMixtureSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "EIGENVALUE")]
    Eigenvalue,
    T,
    F,
    #[serde(rename = "DELTA")]
    Delta,
    #[serde(rename = "PSI")]
    Psi,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Self::Eigenvalue => "EIGENVALUE",
            Self::T => "T",
            Self::F => "F",
            Self::Delta => "DELTA",
            Self::Psi => "PSI",
        }
    }

    /// Label for a method scored by this criterion, e.g. `PCA_T`; the
    /// eigenvalue criterion keeps the bare method name.
    pub fn label(self, method: Method) -> String {
        match self {
            Self::Eigenvalue => method.name().to_string(),
            c => format!("{}_{}", method.name(), c.name()),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EIGENVALUE" | "EIG" | "LAMBDA" => Ok(Self::Eigenvalue),
            "T" => Ok(Self::T),
            "F" => Ok(Self::F),
            "DELTA" => Ok(Self::Delta),
            "PSI" => Ok(Self::Psi),
            _ => Err(Error::config("criterion", format!("unknown criterion {s:?}"))),
        }
    }
}

/// Per-direction scores with their ranks and the induced ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionScores {
    pub criterion: Criterion,
    pub scores: Vec<f64>,
    /// `r_j = Σ_i 1{θ_i > θ_j} + 1`.
    pub ranks: Vec<usize>,
    /// Direction indices (0-based) by ascending rank, ties by index.
    pub permutation: Vec<usize>,
    /// Directions with zero within-group variance (score 0 or `+∞`).
    pub degenerate: Vec<usize>,
}

impl CriterionScores {
    pub fn new(criterion: Criterion, scores: Vec<f64>) -> Self {
        let ranks = rank_order(&scores);
        let mut permutation: Vec<usize> = (0..scores.len()).collect();
        permutation.sort_by_key(|&j| (ranks[j], j));
        Self {
            criterion,
            scores,
            ranks,
            permutation,
            degenerate: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Writes `direction_index,eigenvalue,score,rank` rows (1-based index).
    pub fn write_csv(&self, path: impl AsRef<Path>, eigenvalues: &[f64]) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file, eigenvalues)
    }

    pub fn write_csv_to<W: std::io::Write>(&self, writer: W, eigenvalues: &[f64]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["direction_index", "eigenvalue", "score", "rank"])?;
        for j in 0..self.len() {
            w.write_record([
                (j + 1).to_string(),
                eigenvalues.get(j).map_or_else(String::new, |&l| format_f64(l)),
                format_f64(self.scores[j]),
                self.ranks[j].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// `r_j = Σ_i 1{θ_i > θ_j} + 1`; ties share a rank.
pub fn rank_order(theta: &[f64]) -> Vec<usize> {
    theta
        .iter()
        .map(|&tj| theta.iter().filter(|&&ti| ti > tj).count() + 1)
        .collect()
}

pub fn score_eigenvalue(basis: &GevBasis) -> CriterionScores {
    CriterionScores::new(Criterion::Eigenvalue, basis.values().iter().map(|l| l.abs()).collect())
}

/// Per-group priors, projected means and unbiased projected variances.
struct ProjectedStats {
    priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    vars: Vec<Vec<f64>>,
}

fn projected_stats(vectors: &DenseMatrix, x: &DenseMatrix, groups: &Groups) -> Result<ProjectedStats> {
    if x.cols() != vectors.rows() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} predictor columns", vectors.rows()),
            got: format!("{}", x.cols()),
        });
    }
    if groups.membership.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} group labels", x.rows()),
            got: format!("{}", groups.membership.len()),
        });
    }
    let sizes = groups.sizes();
    if let Some((g, &s)) = sizes.iter().enumerate().find(|(_, &s)| s < 2) {
        return Err(Error::GroupTooSmall { group: g, size: s });
    }
    let proj = x.matmul(vectors)?;
    let k = vectors.cols();
    let h = groups.count;
    let mut means = vec![vec![0.0; k]; h];
    for (i, &g) in groups.membership.iter().enumerate() {
        for (m, v) in means[g].iter_mut().zip(proj.row(i)) {
            *m += v;
        }
    }
    for (m, &s) in means.iter_mut().zip(&sizes) {
        m.iter_mut().for_each(|v| *v /= s as f64);
    }
    let mut vars = vec![vec![0.0; k]; h];
    for (i, &g) in groups.membership.iter().enumerate() {
        for ((acc, v), m) in vars[g].iter_mut().zip(proj.row(i)).zip(&means[g]) {
            *acc += (v - m) * (v - m);
        }
    }
    for (v, &s) in vars.iter_mut().zip(&sizes) {
        v.iter_mut().for_each(|a| *a /= (s - 1) as f64);
    }
    let n = x.rows() as f64;
    Ok(ProjectedStats {
        priors: sizes.iter().map(|&s| s as f64 / n).collect(),
        means,
        vars,
    })
}

/// Ratio with the degenerate-denominator convention: `0/0 → 0`, `x/0 → +∞`.
fn guarded_ratio(num: f64, den: f64, j: usize, degenerate: &mut Vec<usize>) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        degenerate.push(j);
        if num > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// `T_j = |x̄*₂ⱼ − x̄*₁ⱼ| / √(π̂₂ s²*₂ⱼ + π̂₁ s²*₁ⱼ)` for every column of `vectors`.
pub fn score_t_matrix(vectors: &DenseMatrix, x: &DenseMatrix, groups: &Groups) -> Result<CriterionScores> {
    if groups.count != 2 {
        return Err(Error::NotBinary { classes: groups.count });
    }
    let st = projected_stats(vectors, x, groups)?;
    let mut degenerate = Vec::new();
    let scores = (0..vectors.cols())
        .map(|j| {
            let gap = (st.means[1][j] - st.means[0][j]).abs();
            let den = (st.priors[1] * st.vars[1][j] + st.priors[0] * st.vars[0][j]).sqrt();
            guarded_ratio(gap, den, j, &mut degenerate)
        })
        .collect();
    let mut out = CriterionScores::new(Criterion::T, scores);
    out.degenerate = degenerate;
    Ok(out)
}

/// `F_j = Σ_h π̂_h (x̄*ₕⱼ − Σ_i π̂_i x̄*ᵢⱼ)² / Σ_h π̂_h s²*ₕⱼ`.
pub fn score_f_matrix(vectors: &DenseMatrix, x: &DenseMatrix, groups: &Groups) -> Result<CriterionScores> {
    if groups.count < 2 {
        return Err(Error::SingleClassResponse);
    }
    let st = projected_stats(vectors, x, groups)?;
    let mut degenerate = Vec::new();
    let scores = (0..vectors.cols())
        .map(|j| {
            let grand: f64 = st.priors.iter().zip(&st.means).map(|(p, m)| p * m[j]).sum();
            let between: f64 = st
                .priors
                .iter()
                .zip(&st.means)
                .map(|(p, m)| p * (m[j] - grand).powi(2))
                .sum();
            let within: f64 = st.priors.iter().zip(&st.vars).map(|(p, v)| p * v[j]).sum();
            guarded_ratio(between, within, j, &mut degenerate)
        })
        .collect();
    let mut out = CriterionScores::new(Criterion::F, scores);
    out.degenerate = degenerate;
    Ok(out)
}

/// T scores of a basis on a binary dataset.
pub fn score_t(basis: &GevBasis, d: &LabeledDataset) -> Result<CriterionScores> {
    let groups = d.groups().ok_or(Error::NotBinary { classes: 0 })?;
    score_t_matrix(basis.vectors(), d.x(), &groups)
}

/// F scores of a basis for the given groups (classes or slices).
pub fn score_f(basis: &GevBasis, d: &LabeledDataset, groups: &Groups) -> Result<CriterionScores> {
    score_f_matrix(basis.vectors(), d.x(), groups)
}

/// Scores `basis` on `(x, groups)` by `criterion`. Only sample criteria apply.
pub fn score(criterion: Criterion, basis: &GevBasis, x: &DenseMatrix, groups: &Groups) -> Result<CriterionScores> {
    match criterion {
        Criterion::Eigenvalue => Ok(score_eigenvalue(basis)),
        Criterion::T => score_t_matrix(basis.vectors(), x, groups),
        Criterion::F => score_f_matrix(basis.vectors(), x, groups),
        Criterion::Delta | Criterion::Psi => Err(Error::config(
            "criterion",
            format!("{criterion} is a population criterion; use population_delta/population_psi"),
        )),
    }
}

/// Projected mean and variance of each component along each column.
fn population_projections(spec: &GaussianMixtureSpec, vectors: &DenseMatrix) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if vectors.rows() != spec.p() {
        return Err(Error::DimensionMismatch {
            expected: format!("vectors of length {}", spec.p()),
            got: format!("{}", vectors.rows()),
        });
    }
    let mut means = Vec::new();
    let mut vars = Vec::new();
    for c in spec.components() {
        let mut m = Vec::with_capacity(vectors.cols());
        let mut v = Vec::with_capacity(vectors.cols());
        for j in 0..vectors.cols() {
            let col = vectors.column(j);
            m.push(crate::linalg::dot(&col, &c.mean));
            v.push(c.cov.matrix().quadratic_form(&col)?);
        }
        means.push(m);
        vars.push(v);
    }
    Ok((means, vars))
}

/// `Δ_j = |v_jᵀ(μ₂ − μ₁)| / √(π₂ v_jᵀΣ₂v_j + π₁ v_jᵀΣ₁v_j)`.
pub fn population_delta(spec: &GaussianMixtureSpec, vectors: &DenseMatrix) -> Result<CriterionScores> {
    if spec.len() != 2 {
        return Err(Error::NotBinary { classes: spec.len() });
    }
    let (means, vars) = population_projections(spec, vectors)?;
    let pi: Vec<f64> = spec.components().iter().map(|c| c.weight).collect();
    let scores = (0..vectors.cols())
        .map(|j| (means[1][j] - means[0][j]).abs() / (pi[1] * vars[1][j] + pi[0] * vars[0][j]).sqrt())
        .collect();
    Ok(CriterionScores::new(Criterion::Delta, scores))
}

/// `Ψ_j = Σ_h π_h (v_jᵀμ_h − Σ_i π_i v_jᵀμ_i)² / Σ_h π_h v_jᵀΣ_h v_j`.
pub fn population_psi(spec: &GaussianMixtureSpec, vectors: &DenseMatrix) -> Result<CriterionScores> {
    let (means, vars) = population_projections(spec, vectors)?;
    let pi: Vec<f64> = spec.components().iter().map(|c| c.weight).collect();
    let scores = (0..vectors.cols())
        .map(|j| {
            let grand: f64 = pi.iter().zip(&means).map(|(p, m)| p * m[j]).sum();
            let between: f64 = pi.iter().zip(&means).map(|(p, m)| p * (m[j] - grand).powi(2)).sum();
            let within: f64 = pi.iter().zip(&vars).map(|(p, v)| p * v[j]).sum();
            between / within
        })
        .collect();
    Ok(CriterionScores::new(Criterion::Psi, scores))
}

/// The top-`d` directions of a basis under some criterion.
#[derive(Clone, Debug)]
pub struct ReducedBasis {
    /// `p × d`, columns in ascending rank.
    pub columns: DenseMatrix,
    /// Source direction indices (0-based).
    pub indices: Vec<usize>,
    pub method: Option<Method>,
    pub criterion: Criterion,
}

impl ReducedBasis {
    pub fn d(&self) -> usize {
        self.columns.cols()
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = Some(method);
        self
    }
}

pub fn reorder_and_truncate(basis: &GevBasis, scores: &CriterionScores, d: usize) -> Result<ReducedBasis> {
    let p = basis.dim();
    if scores.len() != p {
        return Err(Error::DimensionMismatch {
            expected: format!("{p} scores"),
            got: format!("{}", scores.len()),
        });
    }
    if d > p {
        return Err(Error::DimensionTooLarge { d, p });
    }
    if d == 0 {
        return Err(Error::config("d", "must be at least 1"));
    }
    let indices = scores.permutation[..d].to_vec();
    Ok(ReducedBasis {
        columns: basis.vectors().select_columns(&indices),
        indices,
        method: None,
        criterion: scores.criterion,
    })
}

/// `x β` for a reduced basis `β`.
pub fn project(reduced: &ReducedBasis, x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.cols() != reduced.columns.rows() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} columns", reduced.columns.rows()),
            got: format!("{}", x.cols()),
        });
    }
    x.matmul(&reduced.columns)
}
