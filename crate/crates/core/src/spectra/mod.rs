//! Spectra of sampled Hamiltonians, pooled histograms, moment estimates and
//! Kolmogorov-Smirnov distances to limit laws.

pub mod eigen;
pub mod matrix;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::{EnsembleError, HamiltonianSample, DEFAULT_DENSE_CAP};
use crate::limit_laws::{LawError, LimitLaw};
use crate::numeric::pairwise_sum;
pub use eigen::{Backend, EigenError};
pub use matrix::{HermitianMatrix, SymmetricMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("histogram binnings differ")]
    BinMismatch,
    #[error("invalid binning: {0}")]
    InvalidBinning(String),
    #[error("eigenvalue count {got} does not match {expected} per sample")]
    EigenCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    residual_bound: Option<f64>,
}

impl Spectrum {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self { eigenvalues, residual_bound: None }
    }

    pub fn with_residual_bound(mut self, bound: f64) -> Self {
        self.residual_bound = Some(bound);
        self
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Relative residual of spot-checked eigenpairs, when one was computed.
    pub fn residual_bound(&self) -> Option<f64> {
        self.residual_bound
    }

    pub fn power_sum(&self, k: u32) -> f64 {
        let p: Vec<f64> = self.eigenvalues.iter().map(|&l| l.powi(k as i32)).collect();
        pairwise_sum(&p)
    }

    /// `2^{-n} sum_j lambda_j^k`.
    pub fn moment(&self, k: u32) -> f64 {
        if self.eigenvalues.is_empty() {
            return f64::NAN;
        }
        self.power_sum(k) / self.eigenvalues.len() as f64
    }

    /// Trace and Frobenius identities against the coefficient sum of squares.
    pub fn identities(&self, sum_coeff_sq: f64) -> IdentityCheck {
        let s1 = self.power_sum(1);
        let m2 = self.moment(2);
        IdentityCheck {
            trace: s1,
            trace_tol: 1e-9 * self.power_sum(2).sqrt(),
            second_moment: m2,
            sum_coeff_sq,
            second_rel_err: (m2 - sum_coeff_sq).abs() / sum_coeff_sq.abs().max(f64::MIN_POSITIVE),
        }
    }
}

pub fn empirical_moment(s: &Spectrum, k: u32) -> f64 {
    s.moment(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub trace: f64,
    pub trace_tol: f64,
    pub second_moment: f64,
    pub sum_coeff_sq: f64,
    pub second_rel_err: f64,
}

impl IdentityCheck {
    pub const REL_TOL: f64 = 1e-9;

    pub fn holds(&self) -> bool {
        self.trace.abs() <= self.trace_tol && self.second_rel_err <= Self::REL_TOL
    }
}

pub fn eigenvalues(m: &HermitianMatrix) -> Result<Spectrum, SpectraError> {
    eigenvalues_with(m, Backend::default())
}

pub fn eigenvalues_with(m: &HermitianMatrix, backend: Backend) -> Result<Spectrum, SpectraError> {
    Ok(Spectrum::from_eigenvalues(eigen::hermitian_eigenvalues(m, backend)?))
}

/// Options for diagonalizing samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub backend: Backend,
    pub dense_cap: u32,
    /// Use the real symmetric form when the sample admits one.
    pub real_form: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { backend: Backend::default(), dense_cap: DEFAULT_DENSE_CAP, real_form: true }
    }
}

pub fn sample_spectrum(h: &HamiltonianSample, opts: &SolveOptions) -> Result<Spectrum, SpectraError> {
    if opts.real_form {
        if let Some(r) = h.to_real_form_with_cap(opts.dense_cap)? {
            return Ok(Spectrum::from_eigenvalues(eigen::symmetric_eigenvalues(&r, opts.backend)?));
        }
    }
    let m = h.to_dense_with_cap(opts.dense_cap)?;
    eigenvalues_with(&m, opts.backend)
}

/// Spot-check eigenpairs of `h` through a full eigendecomposition.
pub fn sample_spectrum_checked(h: &HamiltonianSample, opts: &SolveOptions, picks: &[usize]) -> Result<Spectrum, SpectraError> {
    let m = h.to_dense_with_cap(opts.dense_cap)?;
    let s = eigenvalues_with(&m, opts.backend)?;
    let r = eigen::residual_spot_check(&m, picks)?;
    Ok(s.with_residual_bound(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Binning {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self, SpectraError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || bins == 0 {
            return Err(SpectraError::InvalidBinning(format!("[{lo}, {hi}] with {bins} bins")));
        }
        Ok(Self { lo, hi, bins })
    }

    /// 101 bins on `[-4, 4]`, or on `[-R-0.5, R+0.5]` for a law supported on `[-R, R]`.
    pub fn default_for(law: &LimitLaw) -> Self {
        match law.support_edge() {
            Some(r) => Self { lo: -r - 0.5, hi: r + 0.5, bins: 101 },
            None => Self { lo: -4.0, hi: 4.0, bins: 101 },
        }
    }

    pub fn edge(&self, i: usize) -> f64 {
        if i == self.bins {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / self.bins as f64
        }
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| self.edge(i)).collect()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    fn locate(&self, x: f64) -> Slot {
        if x.is_nan() {
            Slot::Nan
        } else if x < self.lo {
            Slot::Under
        } else if x > self.hi {
            Slot::Over
        } else {
            let i = ((x - self.lo) / self.width()).floor() as usize;
            let mut i = i.min(self.bins - 1);
            // keep the bin consistent with the rounded edges
            while i > 0 && x < self.edge(i) {
                i -= 1;
            }
            while i + 1 < self.bins && x >= self.edge(i + 1) {
                i += 1;
            }
            Slot::Bin(i)
        }
    }
}

enum Slot {
    Under,
    Over,
    Nan,
    Bin(usize),
}

/// Pooled eigenvalue histogram over samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDos {
    pub binning: Binning,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
    pub nan: u64,
    pub n_samples: u64,
    pub n_eigen_per_sample: usize,
}

impl EmpiricalDos {
    pub fn new(binning: Binning, n_eigen_per_sample: usize) -> Self {
        Self {
            binning,
            counts: vec![0; binning.bins],
            underflow: 0,
            overflow: 0,
            nan: 0,
            n_samples: 0,
            n_eigen_per_sample,
        }
    }

    pub fn accumulate(&mut self, s: &Spectrum) -> Result<(), SpectraError> {
        if s.len() != self.n_eigen_per_sample {
            return Err(SpectraError::EigenCount { expected: self.n_eigen_per_sample, got: s.len() });
        }
        for &x in s.eigenvalues() {
            match self.binning.locate(x) {
                Slot::Under => self.underflow += 1,
                Slot::Over => self.overflow += 1,
                Slot::Nan => self.nan += 1,
                Slot::Bin(i) => self.counts[i] += 1,
            }
        }
        self.n_samples += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &EmpiricalDos) -> Result<(), SpectraError> {
        if self.binning != other.binning || self.n_eigen_per_sample != other.n_eigen_per_sample {
            return Err(SpectraError::BinMismatch);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.nan += other.nan;
        self.n_samples += other.n_samples;
        Ok(())
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.in_range() + self.underflow + self.overflow + self.nan
    }

    /// Count divided by total mass and bin width.
    pub fn density(&self) -> Vec<f64> {
        let norm = self.total().max(1) as f64 * self.binning.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    /// Empirical CDF at every bin edge.
    pub fn cdf_at_edges(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        let mut acc = self.underflow;
        let mut out = Vec::with_capacity(self.counts.len() + 1);
        out.push(acc as f64 / total);
        for &c in &self.counts {
            acc += c;
            out.push(acc as f64 / total);
        }
        out
    }
}

pub fn accumulate(mut dos: EmpiricalDos, s: &Spectrum) -> Result<EmpiricalDos, SpectraError> {
    dos.accumulate(s)?;
    Ok(dos)
}

/// `sup` over bin edges of the gap between the empirical and law CDFs.
pub fn ks_distance(dos: &EmpiricalDos, law: &LimitLaw) -> Result<f64, SpectraError> {
    let edges = dos.binning.edges();
    let law_cdf = law.cdf_sorted(&edges)?;
    Ok(dos.cdf_at_edges().iter().zip(&law_cdf).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub k: u32,
    pub mean: f64,
    pub stderr: f64,
}

/// Per-sample moments `0..=k_max` of one spectrum.
pub fn sample_moments(s: &Spectrum, k_max: u32) -> Vec<f64> {
    (0..=k_max).map(|k| s.moment(k)).collect()
}

/// Monte Carlo mean and standard error per `k` from per-sample moment rows.
pub fn estimate_expected_moments(rows: &[Vec<f64>]) -> Vec<MomentEstimate> {
    let n = rows.len();
    let width = rows.iter().map(Vec::len).min().unwrap_or(0);
    (0..width)
        .map(|k| {
            let xs: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            let mean = pairwise_sum(&xs) / n as f64;
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { f64::NAN };
            MomentEstimate { k: k as u32, mean, stderr: (var / n as f64).sqrt() }
        })
        .collect()
}
