//! `(M, N)` pairs for each dimension-reduction method.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::GroupMoments;
use crate::error::{Error, Result};
use crate::linalg::{gev_solve, spd_or_regularize, spd_sqrt_and_invsqrt, DenseMatrix, GevBasis, SpdMatrix};

pub const DEFAULT_GAMMA: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "PCA")]
    Pca,
    #[serde(rename = "SIR")]
    Sir,
    #[serde(rename = "SAVE")]
    Save,
    #[serde(rename = "SIR2")]
    Sir2,
    #[serde(rename = "DR")]
    Dr,
    #[serde(rename = "SSDR")]
    Ssdr,
}

impl Method {
    pub const ALL: [Method; 6] = [Self::Pca, Self::Sir, Self::Save, Self::Sir2, Self::Dr, Self::Ssdr];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pca => "PCA",
            Self::Sir => "SIR",
            Self::Save => "SAVE",
            Self::Sir2 => "SIR2",
            Self::Dr => "DR",
            Self::Ssdr => "SSDR",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "PCA" => Ok(Self::Pca),
            "SIR" => Ok(Self::Sir),
            "SAVE" => Ok(Self::Save),
            "SIR2" | "SIRII" => Ok(Self::Sir2),
            "DR" => Ok(Self::Dr),
            "SSDR" => Ok(Self::Ssdr),
            _ => Err(Error::config("method", format!("unknown method {s:?}"))),
        }
    }
}

/// Which covariance PCA decomposes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaCovariance {
    /// `Σ_h π̂_h S_h`: within-class (or within-slice) covariance.
    #[default]
    PooledWithin,
    /// Marginal `S_X`.
    Marginal,
}

/// Scale in which the SIR-II kernel is handed to the solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sir2Scale {
    /// `GEV(M_Z, S_X)`.
    #[default]
    Literal,
    /// `GEV(S_X^{1/2} M_Z S_X^{1/2}, S_X)`, the same convention as SAVE.
    Conjugated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub method: Method,
    pub gamma: f64,
    /// Add `gamma·I` even when the matrix already factors.
    pub force_gamma: bool,
    pub pca_covariance: PcaCovariance,
    pub sir2_scale: Sir2Scale,
}

impl KernelSpec {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            gamma: DEFAULT_GAMMA,
            force_gamma: false,
            pca_covariance: PcaCovariance::default(),
            sir2_scale: Sir2Scale::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::config("gamma", format!("must be finite and >= 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// A method's kernel `M` and metric `N`.
#[derive(Clone, Debug)]
pub struct KernelPair {
    pub method: Method,
    pub m: DenseMatrix,
    pub n: SpdMatrix,
}

impl KernelPair {
    pub fn solve(&self) -> Result<GevBasis> {
        gev_solve(&self.m, &self.n)
    }
}

/// The marginal covariance as an SPD metric, plus the Z-scale group moments
/// `S_{Z,h} = N^{-1/2} S_h N^{-1/2}` and `z̄_h = N^{-1/2}(x̄_h − x̄)`.
#[derive(Clone, Debug)]
pub struct Whitening {
    pub n: SpdMatrix,
    pub sqrt: SpdMatrix,
    pub inv_sqrt: SpdMatrix,
    pub z_covariances: Vec<DenseMatrix>,
    pub z_means: Vec<Vec<f64>>,
}

impl Whitening {
    pub fn new(moments: &GroupMoments, gamma: f64, force: bool) -> Result<Self> {
        let n = spd_or_regularize(&moments.marginal, gamma, force)?;
        let (sqrt, inv_sqrt) = spd_sqrt_and_invsqrt(&n)?;
        let w = inv_sqrt.matrix();
        let z_covariances = moments
            .covariances
            .iter()
            .map(|c| Ok(w.matmul(&c.matmul(w)?)?.symmetrized()))
            .collect::<Result<Vec<_>>>()?;
        let z_means = moments
            .means
            .iter()
            .map(|m| {
                let centered: Vec<f64> = m.iter().zip(&moments.grand_mean).map(|(a, b)| a - b).collect();
                w.mul_vec(&centered)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            sqrt,
            inv_sqrt,
            z_covariances,
            z_means,
        })
    }

    fn conjugate(&self, mz: &DenseMatrix) -> Result<DenseMatrix> {
        let s = self.sqrt.matrix();
        Ok(s.matmul(&mz.matmul(s)?)?.symmetrized())
    }
}

/// Builds the kernel pair for `spec.method`.
pub fn build_kernel(spec: &KernelSpec, moments: &GroupMoments) -> Result<KernelPair> {
    spec.validate()?;
    if moments.group_count() < 2 && spec.method != Method::Pca {
        return Err(Error::SingleClassResponse);
    }
    match spec.method {
        Method::Pca => Ok(kernel_pca(moments, spec.pca_covariance)),
        Method::Ssdr => kernel_ssdr(moments, spec.gamma),
        method => {
            let w = Whitening::new(moments, spec.gamma, spec.force_gamma)?;
            match method {
                Method::Sir => kernel_sir(moments, &w),
                Method::Save => kernel_save(moments, &w),
                Method::Sir2 => kernel_sir2(moments, &w, spec.sir2_scale),
                Method::Dr => kernel_dr(moments, &w),
                Method::Pca | Method::Ssdr => unreachable!(),
            }
        }
    }
}

pub fn kernel_pca(moments: &GroupMoments, cov: PcaCovariance) -> KernelPair {
    let m = match cov {
        PcaCovariance::PooledWithin => moments.pooled.clone(),
        PcaCovariance::Marginal => moments.marginal.clone(),
    };
    KernelPair {
        method: Method::Pca,
        m,
        n: SpdMatrix::identity(moments.p()),
    }
}

/// `M = Σ_h π̂_h (x̄_h − x̄)(x̄_h − x̄)ᵀ`, `N = S_X`.
pub fn kernel_sir(moments: &GroupMoments, w: &Whitening) -> Result<KernelPair> {
    let p = moments.p();
    let mut m = DenseMatrix::zeros(p, p);
    for (pi, mean) in moments.priors.iter().zip(&moments.means) {
        let c: Vec<f64> = mean.iter().zip(&moments.grand_mean).map(|(a, b)| a - b).collect();
        m.add_scaled(*pi, &DenseMatrix::outer(&c, &c))?;
    }
    Ok(KernelPair {
        method: Method::Sir,
        m: m.symmetrized(),
        n: w.n.clone(),
    })
}

/// `M = S_X^{1/2} [Σ_h π̂_h (I − S_{Z,h})²] S_X^{1/2}`, `N = S_X`.
pub fn kernel_save(moments: &GroupMoments, w: &Whitening) -> Result<KernelPair> {
    let p = moments.p();
    let eye = DenseMatrix::identity(p);
    let mut mz = DenseMatrix::zeros(p, p);
    for (pi, sz) in moments.priors.iter().zip(&w.z_covariances) {
        let d = eye.sub(sz)?;
        mz.add_scaled(*pi, &d.matmul(&d)?)?;
    }
    Ok(KernelPair {
        method: Method::Save,
        m: w.conjugate(&mz)?,
        n: w.n.clone(),
    })
}

/// `M_Z = Σ_h π̂_h (S_{Z,h} − Ā)²` with `Ā = Σ_h π̂_h S_{Z,h}`.
pub fn sir2_kernel_z(moments: &GroupMoments, w: &Whitening) -> Result<DenseMatrix> {
    let p = moments.p();
    let mut abar = DenseMatrix::zeros(p, p);
    for (pi, sz) in moments.priors.iter().zip(&w.z_covariances) {
        abar.add_scaled(*pi, sz)?;
    }
    let mut mz = DenseMatrix::zeros(p, p);
    for (pi, sz) in moments.priors.iter().zip(&w.z_covariances) {
        let d = sz.sub(&abar)?;
        mz.add_scaled(*pi, &d.matmul(&d)?)?;
    }
    Ok(mz.symmetrized())
}

pub fn kernel_sir2(moments: &GroupMoments, w: &Whitening, scale: Sir2Scale) -> Result<KernelPair> {
    let mz = sir2_kernel_z(moments, w)?;
    let m = match scale {
        Sir2Scale::Literal => mz,
        Sir2Scale::Conjugated => w.conjugate(&mz)?,
    };
    Ok(KernelPair {
        method: Method::Sir2,
        m,
        n: w.n.clone(),
    })
}

/// Directional regression in Z scale, conjugated back to X scale:
/// `M_Z = 2Σ π̂_h A_h² + 2B² + 2(Σ π̂_h z̄_hᵀz̄_h) B − 2I` with
/// `A_h = S_{Z,h} + z̄_h z̄_hᵀ` and `B = Σ π̂_h z̄_h z̄_hᵀ`.
pub fn kernel_dr(moments: &GroupMoments, w: &Whitening) -> Result<KernelPair> {
    let p = moments.p();
    let mut b = DenseMatrix::zeros(p, p);
    let mut s = 0.0;
    let mut mz = DenseMatrix::zeros(p, p);
    for ((pi, sz), zm) in moments.priors.iter().zip(&w.z_covariances).zip(&w.z_means) {
        let outer = DenseMatrix::outer(zm, zm);
        b.add_scaled(*pi, &outer)?;
        s += pi * zm.iter().map(|v| v * v).sum::<f64>();
        let a = sz.add(&outer)?;
        mz.add_scaled(2.0 * pi, &a.matmul(&a)?)?;
    }
    mz.add_scaled(2.0, &b.matmul(&b)?)?;
    mz.add_scaled(2.0 * s, &b)?;
    let mz = mz.add_identity(-2.0).symmetrized();
    Ok(KernelPair {
        method: Method::Dr,
        m: w.conjugate(&mz)?,
        n: w.n.clone(),
    })
}

/// `M = C Cᵀ` with `C = [ℓ₂ … ℓ_H | S₂ − S₁ | … | S_H − S₁]`,
/// `ℓ_h = (S_h + γI)⁻¹x̄_h − (S₁ + γI)⁻¹x̄₁`; `N = I`.
pub fn kernel_ssdr(moments: &GroupMoments, gamma: f64) -> Result<KernelPair> {
    let p = moments.p();
    let h = moments.group_count();
    let solved = moments
        .covariances
        .iter()
        .zip(&moments.means)
        .map(|(c, m)| {
            let reg = crate::linalg::regularize(c, gamma)?;
            Ok(reg.solve(m))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut c = DenseMatrix::zeros(p, (h - 1) * (1 + p));
    for k in 1..h {
        let l: Vec<f64> = solved[k].iter().zip(&solved[0]).map(|(a, b)| a - b).collect();
        c.set_column(k - 1, &l);
    }
    for k in 1..h {
        let diff = moments.covariances[k].sub(&moments.covariances[0])?;
        let offset = (h - 1) + (k - 1) * p;
        for j in 0..p {
            c.set_column(offset + j, &diff.column(j));
        }
    }
    let m = c.matmul(&c.transpose())?.symmetrized();
    Ok(KernelPair {
        method: Method::Ssdr,
        m,
        n: SpdMatrix::identity(p),
    })
}
