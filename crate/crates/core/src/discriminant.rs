//! Plug-in Gaussian classifiers and closed-form optimal error rates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Groups;
use crate::error::{Error, Result};
use crate::linalg::{regularize, DenseMatrix, SpdMatrix};
use crate::data::moments_from_matrix;
use crate::simgen::RngStream;

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "LDA")]
    Lda,
    #[serde(rename = "QDA")]
    Qda,
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lda => "LDA",
            Self::Qda => "QDA",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LDA" => Ok(Self::Lda),
            "QDA" => Ok(Self::Qda),
            _ => Err(Error::config("classifier", format!("unknown classifier {s:?}"))),
        }
    }
}

/// Fitted LDA or QDA rule.
#[derive(Clone, Debug)]
pub struct GaussianClassifier {
    kind: ClassifierKind,
    priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    /// One per class for QDA; a single pooled matrix for LDA.
    covariances: Vec<SpdMatrix>,
    log_dets: Vec<f64>,
    gamma: f64,
    regularized: bool,
}

/// Serializable snapshot of a fitted classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierDocument {
    pub kind: ClassifierKind,
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<Vec<Vec<f64>>>,
    pub gamma: f64,
    pub regularized: bool,
}

fn spd_tracking(a: &DenseMatrix, gamma: f64, regularized: &mut bool) -> Result<SpdMatrix> {
    match SpdMatrix::new(a.clone()) {
        Ok(s) => Ok(s),
        Err(Error::NotPositiveDefinite { .. }) => {
            *regularized = true;
            regularize(a, gamma)
        }
        Err(e) => Err(e),
    }
}

impl GaussianClassifier {
    /// Fits plug-in estimates on rows `x` with class membership `groups`.
    /// A covariance that fails Cholesky gets `gamma·I` added.
    pub fn fit(kind: ClassifierKind, x: &DenseMatrix, groups: &Groups, gamma: f64) -> Result<Self> {
        if groups.count < 2 {
            return Err(Error::SingleClassResponse);
        }
        let m = moments_from_matrix(x, groups)?;
        let mut regularized = false;
        let covariances = match kind {
            ClassifierKind::Qda => m
                .covariances
                .iter()
                .map(|c| spd_tracking(c, gamma, &mut regularized))
                .collect::<Result<Vec<_>>>()?,
            ClassifierKind::Lda => vec![spd_tracking(&m.pooled, gamma, &mut regularized)?],
        };
        let log_dets = covariances.iter().map(SpdMatrix::log_det).collect();
        Ok(Self {
            kind,
            priors: m.priors,
            means: m.means,
            covariances,
            log_dets,
            gamma,
            regularized,
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn class_count(&self) -> usize {
        self.priors.len()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn was_regularized(&self) -> bool {
        self.regularized
    }

    fn cov_index(&self, h: usize) -> usize {
        match self.kind {
            ClassifierKind::Qda => h,
            ClassifierKind::Lda => 0,
        }
    }

    /// `log π̂_h − ½ log|Σ̂_h| − ½ (x − μ̂_h)ᵀ Σ̂_h⁻¹ (x − μ̂_h)`. For LDA all
    /// classes share `Σ̂`, so the rule is linear in `x`.
    pub fn discriminant(&self, x: &[f64], h: usize) -> f64 {
        let c = self.cov_index(h);
        let diff: Vec<f64> = x.iter().zip(&self.means[h]).map(|(a, b)| a - b).collect();
        self.priors[h].ln() - 0.5 * self.log_dets[c] - 0.5 * self.covariances[c].inv_quadratic_form(&diff)
    }

    fn predict_row(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_score = self.discriminant(x, 0);
        for h in 1..self.class_count() {
            let s = self.discriminant(x, h);
            if s > best_score {
                best = h;
                best_score = s;
            }
        }
        best
    }

    /// Argmax class per row; ties go to the smallest label.
    pub fn predict(&self, x: &DenseMatrix) -> Result<Vec<usize>> {
        if x.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} columns", self.dim()),
                got: format!("{}", x.cols()),
            });
        }
        Ok((0..x.rows()).map(|i| self.predict_row(x.row(i))).collect())
    }

    /// Misclassification fraction on a labelled test set.
    pub fn cer(&self, x: &DenseMatrix, labels: &[usize]) -> Result<f64> {
        if x.rows() == 0 {
            return Err(Error::EmptyTestSet);
        }
        if labels.len() != x.rows() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} labels", x.rows()),
                got: format!("{}", labels.len()),
            });
        }
        let pred = self.predict(x)?;
        let wrong = pred.iter().zip(labels).filter(|(a, b)| a != b).count();
        Ok(wrong as f64 / x.rows() as f64)
    }

    pub fn to_document(&self) -> ClassifierDocument {
        ClassifierDocument {
            kind: self.kind,
            priors: self.priors.clone(),
            means: self.means.clone(),
            covariances: self
                .covariances
                .iter()
                .map(|c| (0..c.dim()).map(|i| c.matrix().row(i).to_vec()).collect())
                .collect(),
            gamma: self.gamma,
            regularized: self.regularized,
        }
    }

    pub fn from_document(doc: &ClassifierDocument) -> Result<Self> {
        let covariances = doc
            .covariances
            .iter()
            .map(|rows| SpdMatrix::new(DenseMatrix::from_rows(rows)))
            .collect::<Result<Vec<_>>>()?;
        let expected = match doc.kind {
            ClassifierKind::Qda => doc.priors.len(),
            ClassifierKind::Lda => 1,
        };
        if covariances.len() != expected || doc.means.len() != doc.priors.len() {
            return Err(Error::InvalidMatrix("classifier document has inconsistent class counts".into()));
        }
        let log_dets = covariances.iter().map(SpdMatrix::log_det).collect();
        Ok(Self {
            kind: doc.kind,
            priors: doc.priors.clone(),
            means: doc.means.clone(),
            covariances,
            log_dets,
            gamma: doc.gamma,
            regularized: doc.regularized,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

/// Bayes error of the LDA rule with equal priors: `Φ(−½ √(δᵀΣ⁻¹δ))`.
pub fn oer_lda_full(mu1: &[f64], mu2: &[f64], sigma: &SpdMatrix) -> Result<f64> {
    if mu1.len() != sigma.dim() || mu2.len() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("means of length {}", sigma.dim()),
            got: format!("{} and {}", mu1.len(), mu2.len()),
        });
    }
    let delta: Vec<f64> = mu2.iter().zip(mu1).map(|(a, b)| a - b).collect();
    Ok(phi(-0.5 * sigma.inv_quadratic_form(&delta).sqrt()))
}

/// Projected class means and standard deviations along one direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OerInputs1D {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl OerInputs1D {
    fn validate(&self) -> Result<()> {
        for s in [self.sigma1, self.sigma2] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidSigma(s));
            }
        }
        if !(self.mu1.is_finite() && self.mu2.is_finite()) {
            return Err(Error::OutOfRange {
                context: "projected mean".into(),
                value: if self.mu1.is_finite() { self.mu2 } else { self.mu1 },
            });
        }
        Ok(())
    }
}

/// Bayes error for two univariate normal classes with equal priors.
///
/// Equal standard deviations (to `1e-10` relative) use `Φ(−|μ₂−μ₁|/(2σ))`.
/// Otherwise labels are swapped if needed so that `σ₂ > σ₁`, and with
/// `m = μ₂ − μ₁`, `D = σ₂² − σ₁²`, `τ = √(m² + D log(σ₂²/σ₁²))`:
///
/// `½ + ½Φ((σ₁m − σ₂τ)/D) − ½Φ((σ₁m + σ₂τ)/D) + ½Φ((σ₂m + σ₁τ)/D) − ½Φ((σ₂m − σ₁τ)/D)`.
pub fn oer_1d(input: &OerInputs1D) -> Result<f64> {
    input.validate()?;
    let OerInputs1D {
        mut mu1,
        mut mu2,
        mut sigma1,
        mut sigma2,
    } = *input;
    if (sigma1 - sigma2).abs() <= 1e-10 * sigma1.max(sigma2) {
        let sigma = 0.5 * (sigma1 + sigma2);
        return Ok(phi(-(mu2 - mu1).abs() / (2.0 * sigma)));
    }
    if sigma1 > sigma2 {
        std::mem::swap(&mut mu1, &mut mu2);
        std::mem::swap(&mut sigma1, &mut sigma2);
    }
    let m = mu2 - mu1;
    let d = sigma2 * sigma2 - sigma1 * sigma1;
    let tau = (m * m + d * (sigma2 * sigma2 / (sigma1 * sigma1)).ln()).sqrt();
    Ok(0.5 + 0.5 * phi((sigma1 * m - sigma2 * tau) / d) - 0.5 * phi((sigma1 * m + sigma2 * tau) / d)
        + 0.5 * phi((sigma2 * m + sigma1 * tau) / d)
        - 0.5 * phi((sigma2 * m - sigma1 * tau) / d))
}

/// Monte Carlo error estimate with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: u64,
}

/// Draws `samples` points split evenly between the two classes, classifies
/// each by the larger normal density (ties to class 1), and returns the
/// error fraction.
pub fn mc_oer_oracle(input: &OerInputs1D, samples: u64, seed: u64) -> Result<McEstimate> {
    input.validate()?;
    let OerInputs1D { mu1, mu2, sigma1, sigma2 } = *input;
    let log_density = |x: f64, mu: f64, s: f64| {
        let z = (x - mu) / s;
        -s.ln() - 0.5 * z * z
    };
    let mut rng = RngStream::new(seed, 0);
    let half = samples / 2;
    let mut wrong = 0u64;
    for i in 0..2 * half {
        let from_two = i >= half;
        let x = if from_two {
            mu2 + sigma2 * rng.normal()
        } else {
            mu1 + sigma1 * rng.normal()
        };
        let says_two = log_density(x, mu2, sigma2) > log_density(x, mu1, sigma1);
        if says_two != from_two {
            wrong += 1;
        }
    }
    let n = 2 * half;
    let p = wrong as f64 / n as f64;
    Ok(McEstimate {
        estimate: p,
        standard_error: (p * (1.0 - p) / n as f64).sqrt(),
        samples: n,
    })
}
