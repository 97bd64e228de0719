//! Seeded generators for the simulation configurations.
//!
//! Every random draw goes through [`RngStream`], a ChaCha8 generator keyed by
//! a master seed and a stream index (one stream per replicate), so runs are
//! reproducible bit-for-bit regardless of thread count.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::data::{LabeledDataset, Response};
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, spd_inverse, sym_eig, DenseMatrix, SpdMatrix};

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Deterministic random stream for one `(seed, stream)` pair.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            seed,
            stream,
            rng,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    /// Uniform on `(0, 1]`.
    fn uniform_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * TWO_POW_M53
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n` (rejection sampling, no modulo bias).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    /// Standard normal via Box–Muller; the second variate of each pair is
    /// cached for the next call.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open_low();
        let u2 = self.uniform();
        let r = (-2.0 * libm::log(u1)).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }
}

/// `n` rows drawn from `N(mu, sigma)` as `mu + L z`.
pub fn sample_mvn(mu: &[f64], sigma: &SpdMatrix, n: usize, rng: &mut RngStream) -> Result<DenseMatrix> {
    let p = sigma.dim();
    if mu.len() != p {
        return Err(Error::DimensionMismatch {
            expected: format!("mean of length {p}"),
            got: format!("{}", mu.len()),
        });
    }
    let l = sigma.cholesky();
    let mut out = DenseMatrix::zeros(n, p);
    let mut z = vec![0.0; p];
    for i in 0..n {
        z.iter_mut().for_each(|v| *v = rng.normal());
        let row = out.row_mut(i);
        for r in 0..p {
            let lr = l.row(r);
            let mut s = mu[r];
            for k in 0..=r {
                s += lr[k] * z[k];
            }
            row[r] = s;
        }
    }
    Ok(out)
}

/// One Gaussian component.
#[derive(Clone, Debug)]
pub struct Component {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: SpdMatrix,
}

/// Finite Gaussian mixture; for classification each component is a class.
#[derive(Clone, Debug)]
pub struct GaussianMixtureSpec {
    components: Vec<Component>,
}

impl GaussianMixtureSpec {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptyInput)?;
        let p = first.mean.len();
        for c in &components {
            if c.mean.len() != p || c.cov.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: format!("dimension {p}"),
                    got: format!("mean {} / cov {}", c.mean.len(), c.cov.dim()),
                });
            }
            if !(c.weight > 0.0) {
                return Err(Error::OutOfRange {
                    context: "mixture weight".into(),
                    value: c.weight,
                });
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange {
                context: "sum of mixture weights".into(),
                value: total,
            });
        }
        Ok(Self { components })
    }

    /// Equal-weight two-class spec.
    pub fn two_class(mu1: Vec<f64>, sigma1: SpdMatrix, mu2: Vec<f64>, sigma2: SpdMatrix) -> Result<Self> {
        Self::new(vec![
            Component {
                weight: 0.5,
                mean: mu1,
                cov: sigma1,
            },
            Component {
                weight: 0.5,
                mean: mu2,
                cov: sigma2,
            },
        ])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn p(&self) -> usize {
        self.components[0].mean.len()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn mixture_mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.p()];
        for c in &self.components {
            for (a, b) in m.iter_mut().zip(&c.mean) {
                *a += c.weight * b;
            }
        }
        m
    }

    /// Rows drawn from the mixture (component chosen per row).
    pub fn sample_mixture(&self, n: usize, rng: &mut RngStream) -> Result<DenseMatrix> {
        let p = self.p();
        let mut out = DenseMatrix::zeros(n, p);
        for i in 0..n {
            let u = rng.uniform();
            let mut acc = 0.0;
            let mut k = self.components.len() - 1;
            for (j, c) in self.components.iter().enumerate() {
                acc += c.weight;
                if u < acc {
                    k = j;
                    break;
                }
            }
            let c = &self.components[k];
            let row = sample_mvn(&c.mean, &c.cov, 1, rng)?;
            out.row_mut(i).copy_from_slice(row.row(0));
        }
        Ok(out)
    }

    /// Class-labelled sample with exactly `sizes[h]` rows from component `h`,
    /// rows grouped by class in component order.
    pub fn sample_classes(&self, sizes: &[usize], rng: &mut RngStream) -> Result<LabeledDataset> {
        if sizes.len() != self.components.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} class sizes", self.components.len()),
                got: format!("{}", sizes.len()),
            });
        }
        let p = self.p();
        let n: usize = sizes.iter().sum();
        let mut data = Vec::with_capacity(n * p);
        let mut labels = Vec::with_capacity(n);
        for (h, (c, &nh)) in self.components.iter().zip(sizes).enumerate() {
            data.extend(sample_mvn(&c.mean, &c.cov, nh, rng)?.into_vec());
            labels.extend(std::iter::repeat_n(h, nh));
        }
        let x = DenseMatrix::new(n, p, data)?;
        let response = if self.components.len() == 2 {
            Response::Binary(labels)
        } else {
            Response::Categorical(labels)
        };
        LabeledDataset::new(x, response)
    }
}

/// Named classification configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConfigTag {
    Q1,
    Q2,
    Q3,
    L1,
    L2,
    L3,
}

impl ConfigTag {
    pub const ALL: [ConfigTag; 6] = [Self::Q1, Self::Q2, Self::Q3, Self::L1, Self::L2, Self::L3];

    /// True for the configurations evaluated with LDA.
    pub fn uses_lda(self) -> bool {
        matches!(self, Self::L1 | Self::L2 | Self::L3)
    }
}

impl fmt::Display for ConfigTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for ConfigTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "Q1" => Ok(Self::Q1),
            "Q2" => Ok(Self::Q2),
            "Q3" => Ok(Self::Q3),
            "L1" => Ok(Self::L1),
            "L2" => Ok(Self::L2),
            "L3" => Ok(Self::L3),
            _ => Err(Error::InvalidTag(s.to_string())),
        }
    }
}

/// A realized classification configuration with its known answer.
#[derive(Clone, Debug)]
pub struct ConfigInstance {
    pub tag: ConfigTag,
    pub spec: GaussianMixtureSpec,
    pub d: usize,
    /// Orthonormal basis of the true discriminant subspace (`p × d`).
    pub truth: DenseMatrix,
}

/// `ρ^{|i−j|}`.
pub fn ar_matrix(p: usize, rho: f64) -> DenseMatrix {
    DenseMatrix::from_fn(p, p, |i, j| rho.powi((i as i32 - j as i32).abs()))
}

/// `(1 − ρ) I + ρ J`.
pub fn compound_symmetry(p: usize, rho: f64) -> DenseMatrix {
    DenseMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho })
}

/// `a ⊕ b`.
pub fn direct_sum(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = a.rows() + b.rows();
    DenseMatrix::from_fn(n, n, |i, j| {
        let (ra, rb) = (a.rows(), b.rows());
        if i < ra && j < ra {
            a[(i, j)]
        } else if i >= ra && j >= ra && i - ra < rb {
            b[(i - ra, j - ra)]
        } else {
            0.0
        }
    })
}

fn block_sigma(p: usize, b: usize, rho: f64) -> DenseMatrix {
    // ρ I_b + (1 − ρ)(J_b − I_b)
    let block = DenseMatrix::from_fn(b, b, |i, j| if i == j { rho } else { 1.0 - rho });
    direct_sum(&block, &DenseMatrix::identity(p - b))
}

fn spd(m: DenseMatrix) -> Result<SpdMatrix> {
    SpdMatrix::new(m)
}

/// Builds configuration `tag` in dimension `p`. Q1 consumes `p` normal
/// draws from `rng` for its second mean; the others are deterministic.
pub fn make_config(tag: ConfigTag, p: usize, rng: &mut RngStream) -> Result<ConfigInstance> {
    let min_p = match tag {
        ConfigTag::Q1 | ConfigTag::L2 => 3,
        ConfigTag::Q2 => 10,
        ConfigTag::L3 => 20,
        ConfigTag::Q3 | ConfigTag::L1 => 2,
    };
    if p < min_p {
        return Err(Error::config("p", format!("configuration {tag} needs p >= {min_p}")));
    }
    let zeros = vec![0.0; p];
    let (mu1, s1, mu2, s2, d) = match tag {
        ConfigTag::Q1 => {
            let mu2 = rng.normal_vec(p);
            let head = DenseMatrix::from_rows(&[[3.0, -2.0], [-2.0, 3.0]]);
            let s2 = direct_sum(&head, &DenseMatrix::identity(p - 2));
            (zeros, DenseMatrix::identity(p), mu2, s2, 2)
        }
        ConfigTag::Q2 | ConfigTag::L3 => {
            let b = if tag == ConfigTag::Q2 { 5 } else { 20 };
            let mut mu2 = zeros.clone();
            mu2[..5].iter_mut().for_each(|v| *v = 1.0);
            mu2[5..10].iter_mut().for_each(|v| *v = -1.0);
            let d = if tag == ConfigTag::Q2 { 6 } else { 20 };
            (zeros, DenseMatrix::identity(p), mu2, block_sigma(p, b, 0.99), d)
        }
        ConfigTag::Q3 => {
            let mut diag = vec![2.0; p];
            diag[p - 1] = 1.0;
            let mut mu2 = zeros.clone();
            mu2[p - 1] = 1.0;
            let s = DenseMatrix::diag(&diag);
            (zeros, s.clone(), mu2, s, 1)
        }
        ConfigTag::L1 => {
            let s = compound_symmetry(p, 0.25);
            (zeros, s.clone(), vec![1.0; p], s, 1)
        }
        ConfigTag::L2 => {
            let mut mu1 = zeros;
            mu1[0] = 1.0;
            mu1[1] = 1.0;
            let mu2: Vec<f64> = mu1.iter().map(|v| -v).collect();
            let s = direct_sum(&DenseMatrix::identity(2), &compound_symmetry(p - 2, 0.99).scale(10.0));
            (mu1, s.clone(), mu2, s, 1)
        }
    };
    let spec = GaussianMixtureSpec::two_class(mu1, spd(s1)?, mu2, spd(s2)?)?;
    let truth = true_discriminant_basis(&spec)?;
    if truth.cols() != d {
        return Err(Error::InvalidMatrix(format!(
            "configuration {tag}: constructed truth has rank {} but d = {d}",
            truth.cols()
        )));
    }
    Ok(ConfigInstance { tag, spec, d, truth })
}

/// Orthonormal basis of `span{Σ_h⁻¹μ_h − Σ₁⁻¹μ₁}` together with the
/// eigenvectors of `Σ_h⁻¹ − Σ₁⁻¹` whose eigenvalues exceed `1e-10` in
/// magnitude.
pub fn true_discriminant_basis(spec: &GaussianMixtureSpec) -> Result<DenseMatrix> {
    let comps = spec.components();
    let inv: Vec<SpdMatrix> = comps.iter().map(|c| spd_inverse(&c.cov)).collect::<Result<_>>()?;
    let base = inv[0].matrix().mul_vec(&comps[0].mean)?;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for h in 1..comps.len() {
        let v = inv[h].matrix().mul_vec(&comps[h].mean)?;
        cols.push(v.iter().zip(&base).map(|(a, b)| a - b).collect());
    }
    for h in 1..comps.len() {
        let diff = inv[h].matrix().sub(inv[0].matrix())?.symmetrized();
        let eig = sym_eig(&diff)?;
        for (j, &l) in eig.values.iter().enumerate() {
            if l.abs() > 1e-10 {
                cols.push(eig.vectors.column(j));
            }
        }
    }
    if cols.is_empty() {
        return Ok(DenseMatrix::zeros(spec.p(), 0));
    }
    Ok(orthonormalize(&DenseMatrix::from_columns(&cols), 1e-8))
}

/// Named continuous-response configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegressionTag {
    D1,
    D2,
    D3,
}

impl fmt::Display for RegressionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for RegressionTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "D1" => Ok(Self::D1),
            "D2" => Ok(Self::D2),
            "D3" => Ok(Self::D3),
            _ => Err(Error::InvalidTag(s.to_string())),
        }
    }
}

/// A realized regression configuration.
#[derive(Clone, Debug)]
pub struct RegressionSpec {
    pub tag: RegressionTag,
    /// `p × d` index coefficients.
    pub beta: DenseMatrix,
    pub predictors: GaussianMixtureSpec,
    /// Multiplier on the standard-normal error (1 in every named config).
    pub noise_scale: f64,
}

impl RegressionSpec {
    pub fn d(&self) -> usize {
        self.beta.cols()
    }

    /// Orthonormal basis of `span(β)`.
    pub fn truth(&self) -> DenseMatrix {
        orthonormalize(&self.beta, 1e-12)
    }

    fn response(&self, x: &[f64], eps: f64) -> f64 {
        let b1: f64 = (0..x.len()).map(|i| self.beta[(i, 0)] * x[i]).sum();
        match self.tag {
            RegressionTag::D1 => b1 + eps,
            RegressionTag::D2 | RegressionTag::D3 => {
                let b2: f64 = (0..x.len()).map(|i| self.beta[(i, 1)] * x[i]).sum();
                b1 * (b2 + eps).exp()
            }
        }
    }

    /// `n` rows of `(x, y)`.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<LabeledDataset> {
        let x = self.predictors.sample_mixture(n, rng)?;
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let eps = self.noise_scale * rng.normal();
                self.response(x.row(i), eps)
            })
            .collect();
        LabeledDataset::new(x, Response::Continuous(y))
    }
}

/// Builds regression configuration `tag`; coefficients are drawn from `rng`.
pub fn make_regression(tag: RegressionTag, p: usize, rng: &mut RngStream) -> Result<RegressionSpec> {
    let ar5 = SpdMatrix::new(ar_matrix(p, 0.5))?;
    let single = |cov: SpdMatrix| {
        GaussianMixtureSpec::new(vec![Component {
            weight: 1.0,
            mean: vec![0.0; p],
            cov,
        }])
    };
    match tag {
        RegressionTag::D1 => {
            let beta = DenseMatrix::column_vector(&rng.normal_vec(p));
            Ok(RegressionSpec {
                tag,
                beta,
                predictors: single(ar5)?,
                noise_scale: 1.0,
            })
        }
        RegressionTag::D2 | RegressionTag::D3 => {
            if p < 30 {
                return Err(Error::config("p", format!("configuration {tag} needs p >= 30")));
            }
            let mut beta = DenseMatrix::zeros(p, 2);
            for i in 0..30 {
                beta[(i, 0)] = rng.uniform_range(0.3, 0.6);
            }
            for i in 0..30 {
                let u = rng.uniform_range(0.3, 0.6);
                beta[(i, 1)] = if i < 15 { u } else { -u };
            }
            let predictors = if tag == RegressionTag::D2 {
                single(ar5)?
            } else {
                let mut m1 = vec![0.0; p];
                m1[..30].iter_mut().for_each(|v| *v = -1.0);
                let m3: Vec<f64> = m1.iter().map(|v| -v).collect();
                GaussianMixtureSpec::new(vec![
                    Component {
                        weight: 0.4,
                        mean: m1,
                        cov: SpdMatrix::new(ar_matrix(p, 0.1))?,
                    },
                    Component {
                        weight: 0.2,
                        mean: vec![0.0; p],
                        cov: ar5,
                    },
                    Component {
                        weight: 0.4,
                        mean: m3,
                        cov: SpdMatrix::new(ar_matrix(p, 0.9))?,
                    },
                ])?
            };
            Ok(RegressionSpec {
                tag,
                beta,
                predictors,
                noise_scale: 1.0,
            })
        }
    }
}

/// The three-dimensional two-class example: `μ₁ = (0, ε, α)`, `μ₂ = 0`,
/// common covariance `diag(3, 2, 1)`.
pub fn illustrative_spec(alpha: f64, epsilon: f64) -> Result<GaussianMixtureSpec> {
    let s = SpdMatrix::new(DenseMatrix::diag(&[3.0, 2.0, 1.0]))?;
    GaussianMixtureSpec::two_class(vec![0.0, epsilon, alpha], s.clone(), vec![0.0; 3], s)
}
