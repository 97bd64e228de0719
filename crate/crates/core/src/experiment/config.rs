//! Experiment configuration: a TOML file plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discriminant::ClassifierKind;
use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, Method, PcaCovariance, Sir2Scale, DEFAULT_GAMMA};
use crate::ordering::Criterion;
use crate::simgen::{ConfigTag, RegressionTag};

/// A named simulation setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SimulationTag {
    Classification(ConfigTag),
    Regression(RegressionTag),
}

impl SimulationTag {
    pub fn is_regression(self) -> bool {
        matches!(self, Self::Regression(_))
    }
}

impl fmt::Display for SimulationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Classification(t) => t.fmt(f),
            Self::Regression(t) => t.fmt(f),
        }
    }
}

impl FromStr for SimulationTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(t) = s.parse::<RegressionTag>() {
            return Ok(Self::Regression(t));
        }
        s.parse::<ConfigTag>().map(Self::Classification)
    }
}

impl Serialize for SimulationTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SimulationTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which classifier follows the reduction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierChoice {
    /// LDA for the L configurations, QDA otherwise.
    #[default]
    Auto,
    Lda,
    Qda,
    None,
}

impl ClassifierChoice {
    pub fn resolve(self, tag: Option<SimulationTag>) -> Option<ClassifierKind> {
        match self {
            Self::Lda => Some(ClassifierKind::Lda),
            Self::Qda => Some(ClassifierKind::Qda),
            Self::None => None,
            Self::Auto => match tag {
                Some(SimulationTag::Classification(t)) if t.uses_lda() => Some(ClassifierKind::Lda),
                Some(SimulationTag::Regression(_)) => None,
                _ => Some(ClassifierKind::Qda),
            },
        }
    }
}

impl FromStr for ClassifierChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "lda" => Ok(Self::Lda),
            "qda" => Ok(Self::Qda),
            "none" => Ok(Self::None),
            _ => Err(Error::config("classifier", format!("unknown classifier {s:?}"))),
        }
    }
}

/// What each replicate records.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentMode {
    /// Classification configs record CER, regression configs record 𝒟.
    #[default]
    Auto,
    Classification,
    Subspace,
}

/// Fully resolved experiment settings.
///
/// ```toml
/// tag = "Q1"
/// methods = ["SIR2"]
/// criteria = ["EIGENVALUE", "T"]
/// sizes = [51]
/// replicates = 100
/// seed = 2024
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tag: Option<SimulationTag>,
    pub mode: ExperimentMode,
    pub methods: Vec<Method>,
    pub criteria: Vec<Criterion>,
    pub classifier: ClassifierChoice,
    /// Reduced dimension; the configuration's true `d` when absent.
    pub d: Option<usize>,
    /// Slices for continuous responses.
    pub slices: usize,
    /// Training size per class (classification) or total (regression).
    pub sizes: Vec<usize>,
    /// Test observations drawn per class.
    pub test_per_class: usize,
    pub replicates: usize,
    pub seed: u64,
    pub p: usize,
    pub gamma: f64,
    pub force_gamma: bool,
    pub pca_covariance: PcaCovariance,
    pub sir2_scale: Sir2Scale,
    /// Worker threads; all cores when absent.
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tag: None,
            mode: ExperimentMode::Auto,
            methods: Method::ALL.to_vec(),
            criteria: vec![Criterion::Eigenvalue, Criterion::T],
            classifier: ClassifierChoice::Auto,
            d: None,
            slices: 5,
            sizes: vec![51],
            test_per_class: 1000,
            replicates: 100,
            seed: 1,
            p: 50,
            gamma: DEFAULT_GAMMA,
            force_gamma: false,
            pca_covariance: PcaCovariance::default(),
            sir2_scale: Sir2Scale::default(),
            threads: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn for_tag(tag: SimulationTag) -> Self {
        let mut cfg = Self {
            tag: Some(tag),
            ..Self::default()
        };
        if tag.is_regression() {
            cfg.criteria = vec![Criterion::Eigenvalue, Criterion::F];
            cfg.sizes = vec![255, 500, 1250];
        }
        cfg
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn resolved_mode(&self) -> ExperimentMode {
        match (self.mode, self.tag) {
            (ExperimentMode::Auto, Some(SimulationTag::Regression(_))) => ExperimentMode::Subspace,
            (ExperimentMode::Auto, _) => ExperimentMode::Classification,
            (m, _) => m,
        }
    }

    pub fn classifier_kind(&self) -> Option<ClassifierKind> {
        self.classifier.resolve(self.tag)
    }

    pub fn kernel_spec(&self, method: Method) -> KernelSpec {
        KernelSpec {
            method,
            gamma: self.gamma,
            force_gamma: self.force_gamma,
            pca_covariance: self.pca_covariance,
            sir2_scale: self.sir2_scale,
        }
    }

    /// Checks every field, naming the first offender.
    pub fn validate(&self) -> Result<()> {
        let tag = self.tag.ok_or_else(|| Error::config("tag", "a configuration tag is required"))?;
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        if self.d == Some(0) {
            return Err(Error::config("d", "must be at least 1"));
        }
        if let Some(d) = self.d {
            if d > self.p {
                return Err(Error::DimensionTooLarge { d, p: self.p });
            }
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        if self.criteria.is_empty() {
            return Err(Error::config("criteria", "at least one criterion is required"));
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::config("sizes", "need at least one positive sample size"));
        }
        if self.slices < 2 {
            return Err(Error::config("slices", "need at least 2 slices"));
        }
        if self.p < 2 {
            return Err(Error::config("p", "need at least 2 predictors"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        self.kernel_spec(Method::Pca).validate()?;
        for c in &self.criteria {
            match c {
                Criterion::Delta | Criterion::Psi => {
                    return Err(Error::config("criteria", format!("{c} is a population criterion")));
                }
                Criterion::T if tag.is_regression() => {
                    return Err(Error::config("criteria", "T needs a binary response; use F for regression"));
                }
                _ => {}
            }
        }
        match self.resolved_mode() {
            ExperimentMode::Classification => {
                if tag.is_regression() {
                    return Err(Error::config("mode", "regression configurations have no classes"));
                }
                if self.classifier_kind().is_none() {
                    return Err(Error::config("classifier", "classification runs need LDA or QDA"));
                }
                if self.test_per_class == 0 {
                    return Err(Error::config("test_per_class", "must be at least 1"));
                }
            }
            _ => {
                if tag.is_regression() {
                    if let Some(&n) = self.sizes.iter().min() {
                        if n < 2 * self.slices {
                            return Err(Error::config("sizes", format!("n = {n} is too small for {} slices", self.slices)));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies `key=value` overrides using the TOML field names.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config("override", format!("expected key=value, got {assignment:?}")))?;
        let key = key.trim();
        let value = value.trim();
        let mut table = toml::Table::try_from(&*self).map_err(|e| Error::config("config", e.to_string()))?;
        let parsed: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {value}")) {
            Ok(mut t) => t.remove("v").expect("key present"),
            Err(_) => toml::Value::String(value.to_string()),
        };
        table.insert(key.to_string(), parsed);
        *self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(key, e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut cfg = ExperimentConfig::for_tag("Q3".parse().unwrap());
        cfg.methods = vec![Method::Pca];
        cfg.sizes = vec![250];
        cfg.d = Some(1);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn parses_minimal_file() {
        let cfg = ExperimentConfig::from_toml_str(
            "tag = \"D1\"\nmethods = [\"PCA\"]\ncriteria = [\"EIGENVALUE\", \"F\"]\nsizes = [255]\n",
        )
        .unwrap();
        assert_eq!(cfg.tag, Some(SimulationTag::Regression(RegressionTag::D1)));
        assert_eq!(cfg.resolved_mode(), ExperimentMode::Subspace);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(ExperimentConfig::from_toml_str("tag = \"Q1\"\nbogus = 3\n").is_err());
    }

    #[test]
    fn validation_names_fields() {
        let base = ExperimentConfig::for_tag("Q1".parse().unwrap());
        let check = |f: &dyn Fn(&mut ExperimentConfig), field: &str| {
            let mut c = base.clone();
            f(&mut c);
            match c.validate() {
                Err(Error::Config { field: got, .. }) => assert_eq!(got, field),
                other => panic!("expected config error on {field}, got {other:?}"),
            }
        };
        check(&|c| c.replicates = 0, "replicates");
        check(&|c| c.d = Some(0), "d");
        check(&|c| c.methods.clear(), "methods");
        check(&|c| c.sizes = vec![0], "sizes");
        check(&|c| c.gamma = -1.0, "gamma");
        check(&|c| c.tag = None, "tag");
        let mut reg = ExperimentConfig::for_tag("D2".parse().unwrap());
        reg.criteria = vec![Criterion::T];
        assert!(matches!(reg.validate(), Err(Error::Config { field, .. }) if field == "criteria"));
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::for_tag("Q1".parse().unwrap());
        cfg.apply_override("replicates=7").unwrap();
        cfg.apply_override("methods=[\"PCA\", \"SIR2\"]").unwrap();
        cfg.apply_override("tag=L2").unwrap();
        assert_eq!(cfg.replicates, 7);
        assert_eq!(cfg.methods, vec![Method::Pca, Method::Sir2]);
        assert_eq!(cfg.tag, Some(SimulationTag::Classification(ConfigTag::L2)));
        assert_eq!(cfg.classifier_kind(), Some(ClassifierKind::Lda));
        assert!(cfg.apply_override("replicates").is_err());
        assert!(cfg.apply_override("nope=1").is_err());
    }
}
