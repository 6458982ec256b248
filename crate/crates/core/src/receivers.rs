//! Post-SINR of MMSE and widely linear MMSE receivers.
//!
//! The functions are generic over the scalar field so that the complex MMSE
//! receiver (`C64`) and the widely linear receiver on stacked real vectors
//! (`f64`) share one implementation. Noise enters as an explicit variance:
//! `N0` for complex processing, `N0 / 2` for stacked real processing.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::channel::{ChannelSample, WlChannelSample};
use crate::{Error, Result, SystemConfig, C64};

/// Scalar field accepted by the receivers.
pub trait Field: ComplexField<RealField = f64> + Copy {}
impl<T: ComplexField<RealField = f64> + Copy> Field for T {}

/// Cholesky condition estimate above which a covariance is rejected.
pub const MAX_CONDITION: f64 = 1e14;
/// Relative threshold for counting an eigenvalue as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Negative eigenvalues down to this (relative) level are clamped to zero.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinrReport {
    pub user: usize,
    pub stream: usize,
    pub gamma: f64,
    pub gamma_lb: f64,
    pub lambda_min: f64,
}

/// `Σ_j p_j a_j a_j†` over the columns of `cols`.
pub fn weighted_gram<T: Field>(cols: &DMatrix<T>, powers: &[f64]) -> DMatrix<T> {
    assert_eq!(cols.ncols(), powers.len(), "one power per column");
    let mut scaled = cols.clone();
    for (j, &p) in powers.iter().enumerate() {
        scaled.column_mut(j).scale_mut(p.sqrt());
    }
    &scaled * scaled.adjoint()
}

fn add_noise<T: Field>(mut m: DMatrix<T>, noise: f64) -> DMatrix<T> {
    for i in 0..m.nrows() {
        m[(i, i)] += T::from_real(noise);
    }
    m
}

fn interference_columns<T: Field>(g: &[DMatrix<T>], rows: usize) -> DMatrix<T> {
    let cols: usize = g.iter().map(|m| m.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut j = 0;
    for m in g {
        out.columns_mut(j, m.ncols()).copy_from(m);
        j += m.ncols();
    }
    out
}

/// Noise-plus-interference covariance `Σ (I0/Nt) g g† + N0 I` seen by a
/// complex MMSE receiver.
pub fn nicm(sample: &ChannelSample, cfg: &SystemConfig) -> DMatrix<C64> {
    let g = interference_columns(&sample.g, cfg.nr);
    let p = vec![cfg.i0 / cfg.nt as f64; g.ncols()];
    add_noise(weighted_gram(&g, &p), cfg.n0)
}

/// Widely linear counterpart of [`nicm`] on stacked vectors: `Σ (I0/Nt) g̃ g̃ᵀ + (N0/2) I`.
pub fn wl_nicm(sample: &WlChannelSample, cfg: &SystemConfig) -> DMatrix<f64> {
    let g = interference_columns(&sample.g, 2 * cfg.nr);
    let p = vec![cfg.i0 / cfg.nt as f64; g.ncols()];
    add_noise(weighted_gram(&g, &p), cfg.n0 / 2.0)
}

/// `S h† R⁻¹ h` through a Cholesky solve.
pub fn post_sinr_mmse<T: Field>(h: &DVector<T>, r: &DMatrix<T>, s: f64) -> Result<f64> {
    let chol = r.clone().cholesky().ok_or(Error::SingularCovariance {
        condition: f64::INFINITY,
    })?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
        let v = d.modulus();
        (lo.min(v), hi.max(v))
    });
    let condition = (hi / lo).powi(2);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularCovariance { condition });
    }
    let x = chol.solve(h);
    Ok(s * h.dotc(&x).real())
}

/// Widely linear post-SINR `S h̃ᵀ R̄⁻¹ h̃`.
pub fn post_sinr_wl(h: &DVector<f64>, r: &DMatrix<f64>, s: f64) -> Result<f64> {
    post_sinr_mmse(h, r, s)
}

/// Eigen-decomposition of an interference covariance, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct Eigensystem<T: Field> {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<T>,
}

impl<T: Field> Eigensystem<T> {
    pub fn new(m: &DMatrix<T>) -> Result<Self> {
        let eig = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let top = order.first().map(|&i| eig.eigenvalues[i].abs()).unwrap_or(0.0);
        let floor = -CLAMP_TOLERANCE * top.max(1.0);
        // Below the solver's backward error an eigenvalue is indistinguishable from zero.
        let zero = 4.0 * m.nrows() as f64 * f64::EPSILON * top;
        let mut values = Vec::with_capacity(order.len());
        for &i in &order {
            let v = eig.eigenvalues[i];
            if v < floor || !v.is_finite() {
                return Err(Error::InvalidEigensystem(format!(
                    "eigenvalue {v:.3e} is not positive semi-definite"
                )));
            }
            values.push(if v <= zero { 0.0 } else { v });
        }
        let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues above `RANK_TOLERANCE` times the largest.
    pub fn rank(&self) -> usize {
        let top = self.values.first().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&v| v > RANK_TOLERANCE * top).count()
    }

    /// `ω = U† h`: coordinates of `h` in the eigenbasis.
    pub fn project(&self, h: &DVector<T>) -> DVector<T> {
        self.vectors.ad_mul(h)
    }

    fn check(&self) -> Result<()> {
        if self.values.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidEigensystem("negative eigenvalue".into()));
        }
        if self.values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidEigensystem("eigenvalues not sorted descending".into()));
        }
        let gram = self.vectors.ad_mul(&self.vectors);
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - T::from_real(target)).modulus() > 1e-10 {
                    return Err(Error::InvalidEigensystem("eigenbasis is not unitary".into()));
                }
            }
        }
        Ok(())
    }
}

/// `S Σ_p |ω_p|² / (λ_p + noise)`, the MMSE post-SINR in the eigenbasis of
/// the interference covariance.
pub fn post_sinr_eigenform<T: Field>(h: &DVector<T>, eig: &Eigensystem<T>, s: f64, noise: f64) -> Result<f64> {
    eig.check()?;
    let w = eig.project(h);
    Ok(s * w
        .iter()
        .zip(&eig.values)
        .map(|(w, l)| w.modulus_squared() / (l + noise))
        .sum::<f64>())
}

/// Minimum-eigenvalue term of the eigen form, `S |ω_min|² / (λ_min + noise)`.
pub fn sinr_lower_bound<T: Field>(h: &DVector<T>, eig: &Eigensystem<T>, s: f64, noise: f64) -> f64 {
    let Some(&lambda) = eig.values.last() else {
        return 0.0;
    };
    let w = eig.project(h)[eig.values.len() - 1].modulus_squared();
    s * (w / (lambda + noise))
}

/// SINR of stream `i` (zero-based) of a multi-user spatially multiplexed
/// transmission with equal power split over `Nt` complex streams:
/// `γ_i = (S/Nt) h_i† R_i⁻¹ h_i`, `R_i = (S/Nt) Σ_{j≠i} h_j h_j† + (I0/Nt) Σ G G† + N0 I`.
pub fn stream_sinr_mu(sample: &ChannelSample, i: usize, cfg: &SystemConfig) -> Result<f64> {
    let nt = sample.h.ncols();
    if i >= nt {
        return Err(Error::InvalidStreamIndex { index: i, streams: nt });
    }
    let ps = cfg.s / cfg.nt as f64;
    let mut r = nicm(sample, cfg);
    for j in (0..nt).filter(|&j| j != i) {
        let hj = sample.h.column(j);
        r += (&hj * hj.adjoint()).scale(ps);
    }
    post_sinr_mmse(&sample.h.column(i).into_owned(), &r, ps)
}

/// Noise-independent state of one single-stream user: the interference
/// eigenvalues and the squared projections of the desired channel.
#[derive(Clone, Debug)]
pub struct PreparedSst {
    pub s: f64,
    pub lambdas: Vec<f64>,
    pub omega_sq: Vec<f64>,
}

impl PreparedSst {
    pub fn new<T: Field>(h: &DVector<T>, icm: &DMatrix<T>, s: f64) -> Result<Self> {
        let eig = Eigensystem::new(icm)?;
        let omega_sq = eig.project(h).iter().map(|w| w.modulus_squared()).collect();
        Ok(Self {
            s,
            lambdas: eig.values,
            omega_sq,
        })
    }

    pub fn gamma(&self, noise: f64) -> f64 {
        self.s
            * self
                .omega_sq
                .iter()
                .zip(&self.lambdas)
                .map(|(w, l)| w / (l + noise))
                .sum::<f64>()
    }

    pub fn gamma_lb(&self, noise: f64) -> f64 {
        let n = self.lambdas.len();
        self.s * (self.omega_sq[n - 1] / (self.lambdas[n - 1] + noise))
    }

    pub fn lambda_min(&self) -> f64 {
        *self.lambdas.last().expect("non-empty eigensystem")
    }
}

/// Noise-independent state of one user under spatial multiplexing. The
/// eigen-decomposition of the total received covariance (all desired streams
/// plus interference) is computed once; per-stream SINRs then follow from the
/// Sherman–Morrison identity `γ_i = p_i q_i / (1 - p_i q_i)` with
/// `q_i = a_i† (A + noise I)⁻¹ a_i`.
#[derive(Clone, Debug)]
pub struct PreparedStreams {
    lambdas: Vec<f64>,
    proj: Vec<Vec<f64>>,
    powers: Vec<f64>,
}

impl PreparedStreams {
    pub fn new<T: Field>(
        desired: &DMatrix<T>,
        desired_power: &[f64],
        interference: &DMatrix<T>,
        interference_power: &[f64],
    ) -> Result<Self> {
        let mut cov = weighted_gram(desired, desired_power);
        if interference.ncols() > 0 {
            cov += weighted_gram(interference, interference_power);
        }
        let eig = Eigensystem::new(&cov)?;
        let coords = eig.vectors.ad_mul(desired);
        let proj = (0..desired.ncols())
            .map(|i| coords.column(i).iter().map(|w| w.modulus_squared()).collect())
            .collect();
        Ok(Self {
            lambdas: eig.values,
            proj,
            powers: desired_power.to_vec(),
        })
    }

    pub fn streams(&self) -> usize {
        self.powers.len()
    }

    pub fn sinr(&self, i: usize, noise: f64) -> f64 {
        let q: f64 = self.proj[i]
            .iter()
            .zip(&self.lambdas)
            .map(|(w, l)| w / (l + noise))
            .sum();
        let pq = self.powers[i] * q;
        (pq / (1.0 - pq)).max(0.0)
    }

    pub fn sinrs_into(&self, noise: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.sinr(i, noise);
        }
    }
}

/// Builds a [`SinrReport`] for a single-stream user.
pub fn sst_report<T: Field>(user: usize, h: &DVector<T>, icm: &DMatrix<T>, s: f64, noise: f64) -> Result<SinrReport> {
    let p = PreparedSst::new(h, icm, s)?;
    Ok(SinrReport {
        user,
        stream: 0,
        gamma: p.gamma(noise),
        gamma_lb: p.gamma_lb(noise),
        lambda_min: p.lambda_min(),
    })
}
