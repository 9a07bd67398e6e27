//! Coupling distributions and random Hamiltonian samples.
//!
//! Term `t` of a sample is the t-th (edge, letter tuple) pair: edges in
//! canonical order, letter tuples in lexicographic order with the lowest
//! vertex most significant. Its coupling is the t-th `u64` of the ChaCha8
//! stream `sample_index` under key `seed`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::hypergraph::Hypergraph;
use crate::numeric::{double_factorial, pairwise_sum};
use crate::pauli::{i_pow, PauliString, MAX_SITES};
use crate::spectra::matrix::{HermitianMatrix, SymmetricMatrix};

pub const DEFAULT_DENSE_CAP: u32 = 14;
pub const MAX_TERMS: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnsembleError {
    #[error("{0} sites exceed the 64-site Pauli encoding")]
    TooManySites(u32),
    #[error("{0} terms exceed the limit of {MAX_TERMS}")]
    TooManyTerms(u128),
    #[error("dense matrix for n = {n} exceeds the cap n <= {cap}; it would need {bytes} bytes")]
    DenseCap { n: u32, cap: u32, bytes: u128 },
    #[error("vector length {got} does not match dimension {dim}")]
    LengthMismatch { dim: usize, got: usize },
    #[error("{got} distributions given for {edges} edges")]
    DistributionCount { edges: usize, got: usize },
    #[error("unknown distribution {0:?}")]
    UnknownDistribution(String),
}

/// Zero-mean, unit-variance coupling laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingDistribution {
    #[serde(rename = "gauss")]
    StandardNormal,
    Rademacher,
    #[serde(rename = "uniform")]
    UniformSym,
    /// `Exp(1) - 1`.
    #[serde(rename = "exp-shift")]
    ShiftedExponential,
}

impl CouplingDistribution {
    pub const ALL: [CouplingDistribution; 4] = [
        CouplingDistribution::StandardNormal,
        CouplingDistribution::Rademacher,
        CouplingDistribution::UniformSym,
        CouplingDistribution::ShiftedExponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CouplingDistribution::StandardNormal => "gauss",
            CouplingDistribution::Rademacher => "rademacher",
            CouplingDistribution::UniformSym => "uniform",
            CouplingDistribution::ShiftedExponential => "exp-shift",
        }
    }

    /// Transform a uniform variate in `(0, 1)`.
    pub fn from_uniform(self, u: f64) -> f64 {
        match self {
            CouplingDistribution::StandardNormal => Normal::standard().inverse_cdf(u),
            CouplingDistribution::Rademacher => {
                if u < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            CouplingDistribution::UniformSym => 3f64.sqrt() * (2.0 * u - 1.0),
            CouplingDistribution::ShiftedExponential => -(-u).ln_1p() - 1.0,
        }
    }

    /// Exact raw moment `E X^m`.
    pub fn moment(self, m: u32) -> BigRational {
        let int = |v: BigInt| BigRational::from_integer(v);
        match self {
            _ if m == 0 => int(1.into()),
            CouplingDistribution::StandardNormal => {
                if m % 2 == 1 {
                    BigRational::zero()
                } else {
                    int(double_factorial(m as i64 - 1).into())
                }
            }
            CouplingDistribution::Rademacher => int(if m % 2 == 0 { 1 } else { 0 }.into()),
            CouplingDistribution::UniformSym => {
                if m % 2 == 1 {
                    BigRational::zero()
                } else {
                    BigRational::new(BigInt::from(3).pow(m / 2), BigInt::from(m + 1))
                }
            }
            CouplingDistribution::ShiftedExponential => {
                // subfactorials: !m = (m - 1)(!(m-1) + !(m-2))
                let (mut a, mut b) = (BigInt::from(1), BigInt::from(0));
                for i in 2..=m {
                    let c = BigInt::from(i - 1) * (&a + &b);
                    a = b;
                    b = c;
                }
                int(b)
            }
        }
    }

    pub fn moment_f64(self, m: u32) -> f64 {
        self.moment(m).to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_symmetric(self) -> bool {
        self != CouplingDistribution::ShiftedExponential
    }
}

impl fmt::Display for CouplingDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingDistribution {
    type Err = EnsembleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| EnsembleError::UnknownDistribution(s.to_string()))
    }
}

/// Uniform in `(0, 1)` from the top 53 bits.
#[inline]
pub fn unit_open(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub string: PauliString,
    pub edge: u32,
}

/// Sample-independent structure of the model on one hypergraph.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    n_sites: u32,
    edge_count: usize,
    strings: Vec<PauliString>,
    edge_of: Vec<u32>,
    scale: Vec<f64>,
    dists: Vec<CouplingDistribution>,
}

impl Ensemble {
    pub fn new(g: &Hypergraph, dist: CouplingDistribution) -> Result<Self, EnsembleError> {
        Self::with_edge_distributions(g, vec![dist; g.edge_count()])
    }

    /// One coupling law per edge.
    pub fn with_edge_distributions(g: &Hypergraph, dists: Vec<CouplingDistribution>) -> Result<Self, EnsembleError> {
        let n = g.n_vertices();
        if n > MAX_SITES {
            return Err(EnsembleError::TooManySites(n));
        }
        if dists.len() != g.edge_count() {
            return Err(EnsembleError::DistributionCount { edges: g.edge_count(), got: dists.len() });
        }
        let total: u128 = g.edges().iter().map(|e| 3u128.saturating_pow(e.len() as u32)).sum();
        if total > MAX_TERMS as u128 {
            return Err(EnsembleError::TooManyTerms(total));
        }
        let e_norm = (g.edge_count() as f64).sqrt();
        let mut strings = Vec::with_capacity(total as usize);
        let mut edge_of = Vec::with_capacity(total as usize);
        let mut scale = Vec::with_capacity(total as usize);
        for (ei, e) in g.edges().iter().enumerate() {
            let s = 1.0 / (e_norm * 3f64.powi(e.len() as i32).sqrt());
            let mut letters: Vec<(u32, u8)> = e.iter().map(|&v| (v, 1u8)).collect();
            loop {
                strings.push(PauliString::from_letters(n, &letters).expect("edge vertices are valid sites"));
                edge_of.push(ei as u32);
                scale.push(s);
                let mut j = letters.len();
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    if letters[j].1 < 3 {
                        letters[j].1 += 1;
                        break;
                    }
                    letters[j].1 = 1;
                }
                if letters.iter().all(|l| l.1 == 1) {
                    break;
                }
            }
        }
        Ok(Self { n_sites: n, edge_count: g.edge_count(), strings, edge_of, scale, dists })
    }

    pub fn n_sites(&self) -> u32 {
        self.n_sites
    }

    pub fn term_count(&self) -> usize {
        self.strings.len()
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    pub fn draw(&self, seed: u64, sample_index: u64) -> HamiltonianSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample_index);
        let terms = (0..self.strings.len())
            .map(|t| {
                let edge = self.edge_of[t];
                let alpha = self.dists[edge as usize].from_uniform(unit_open(rng.next_u64()));
                Term { coeff: alpha * self.scale[t], string: self.strings[t], edge }
            })
            .collect();
        HamiltonianSample { n_sites: self.n_sites, edge_count: self.edge_count, terms }
    }
}

/// Convenience wrapper around [`Ensemble::draw`].
pub fn draw(
    g: &Hypergraph,
    dist: CouplingDistribution,
    seed: u64,
    sample_index: u64,
) -> Result<HamiltonianSample, EnsembleError> {
    Ok(Ensemble::new(g, dist)?.draw(seed, sample_index))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSample {
    n_sites: u32,
    edge_count: usize,
    terms: Vec<Term>,
}

/// Bytes of a dense complex matrix on `n` sites.
pub fn dense_bytes(n: u32) -> u128 {
    16u128 << (2 * n)
}

impl HamiltonianSample {
    /// Build from explicit terms; strings must share the site count.
    pub fn from_terms(n_sites: u32, terms: Vec<Term>) -> Result<Self, EnsembleError> {
        if n_sites > MAX_SITES {
            return Err(EnsembleError::TooManySites(n_sites));
        }
        let edge_count = terms.iter().map(|t| t.edge as usize + 1).max().unwrap_or(0);
        Ok(Self { n_sites, edge_count, terms })
    }

    pub fn n_sites(&self) -> u32 {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coeff).collect()
    }

    pub fn sum_coeff_sq(&self) -> f64 {
        let sq: Vec<f64> = self.terms.iter().map(|t| t.coeff * t.coeff).collect();
        pairwise_sum(&sq)
    }

    fn check_cap(&self, cap: u32) -> Result<(), EnsembleError> {
        if self.n_sites > cap {
            return Err(EnsembleError::DenseCap { n: self.n_sites, cap, bytes: dense_bytes(self.n_sites) });
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Result<HermitianMatrix, EnsembleError> {
        self.to_dense_with_cap(DEFAULT_DENSE_CAP)
    }

    /// Lower triangle accumulated term by term, or per X-mask through a
    /// Walsh-Hadamard transform when there are many terms; the upper triangle
    /// is then mirrored so the result is exactly Hermitian.
    pub fn to_dense_with_cap(&self, cap: u32) -> Result<HermitianMatrix, EnsembleError> {
        self.check_cap(cap)?;
        let mut groups: Vec<(u64, Vec<usize>)> = Vec::new();
        {
            let mut by_x: Vec<(u64, usize)> = self.terms.iter().enumerate().map(|(i, t)| (t.string.x_mask(), i)).collect();
            by_x.sort_unstable();
            for (x, i) in by_x {
                match groups.last_mut() {
                    Some((gx, v)) if *gx == x => v.push(i),
                    _ => groups.push((x, vec![i])),
                }
            }
        }
        let log = self.n_sites as usize + 1;
        if self.terms.len() > groups.len() * log {
            Ok(self.dense_hadamard(&groups))
        } else {
            Ok(self.dense_direct())
        }
    }

    pub(crate) fn dense_direct(&self) -> HermitianMatrix {
        let n = self.dim();
        let mut m = HermitianMatrix::zeros(n);
        let data = m.lower_mut();
        for t in &self.terms {
            for c in 0..n {
                let (r, k) = t.string.apply_basis(c as u64);
                let r = r as usize;
                if r >= c {
                    data[c * n + r] += i_pow(k) * t.coeff;
                }
            }
        }
        m.mirror_lower();
        m
    }

    pub(crate) fn dense_hadamard(&self, groups: &[(u64, Vec<usize>)]) -> HermitianMatrix {
        let n = self.dim();
        let mut m = HermitianMatrix::zeros(n);
        let data = m.lower_mut();
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        for (x, idx) in groups {
            f.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for &i in idx {
                let t = &self.terms[i];
                f[t.string.z_mask() as usize] += i_pow(t.string.phase_exp()) * t.coeff;
            }
            walsh_hadamard(&mut f);
            for (c, &v) in f.iter().enumerate() {
                let r = c ^ *x as usize;
                if r >= c {
                    data[c * n + r] += v;
                }
            }
        }
        m.mirror_lower();
        m
    }

    /// Matrix-free product `H v`.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>, EnsembleError> {
        let n = self.dim();
        if v.len() != n {
            return Err(EnsembleError::LengthMismatch { dim: n, got: v.len() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for t in &self.terms {
            for (s, &vs) in v.iter().enumerate() {
                let (r, k) = t.string.apply_basis(s as u64);
                out[r as usize] += i_pow(k) * (t.coeff * vs);
            }
        }
        Ok(out)
    }

    /// True when every term has even weight and `n` is even, so the
    /// Hamiltonian commutes with an antiunitary squaring to one and has a
    /// real symmetric form of the same dimension.
    pub fn has_real_form(&self) -> bool {
        self.n_sites % 2 == 0 && self.n_sites >= 2 && self.terms.iter().all(|t| t.string.weight() % 2 == 0)
    }

    /// The Hamiltonian in the basis `u_s = (|s> + T|s>)/sqrt2`,
    /// `w_s = i(|s> - T|s>)/sqrt2`, with `T` the spin-flip time reversal and
    /// `s` ranging over states with the top site down. `None` when no such
    /// form exists.
    pub fn to_real_form_with_cap(&self, cap: u32) -> Result<Option<SymmetricMatrix>, EnsembleError> {
        self.check_cap(cap)?;
        if !self.has_real_form() {
            return Ok(None);
        }
        let n = self.dim();
        let half = n / 2;
        let flip = (n - 1) as u64;
        let theta = |s: u64| if s.count_ones() % 2 == 0 { 1i32 } else { -1 };
        let mut m = SymmetricMatrix::zeros(n);
        for t in &self.terms {
            let p = &t.string;
            for s in 0..half as u64 {
                let (t1, k1) = p.apply_basis(s);
                let (_, k2) = p.apply_basis(s ^ flip);
                // P|s> = i^k1 |t1>, P|s~> = i^k2 |t1~>
                let (r, first_is_r) = if t1 < half as u64 { (t1, true) } else { (t1 ^ flip, false) };
                let th_s = theta(s);
                let th_r = theta(r);
                let a = gauss(k1);
                let b = gauss(k2).scale(th_s);
                // v_u = (a|t1> + b|t1~>)/sqrt2, v_w = i(a|t1> - b|t1~>)/sqrt2
                let vu = if first_is_r { (a, b) } else { (b, a) };
                let (wa, wb) = (a.times_i(), b.times_i().scale(-1));
                let vw = if first_is_r { (wa, wb) } else { (wb, wa) };
                for (col, (al, be)) in [(s as usize, vu), (s as usize + half, vw)] {
                    // <u_r|v> = (al + th_r be)/2, <w_r|v> = -i(al - th_r be)/2
                    let cu = al.add(be.scale(th_r));
                    let cw = al.add(be.scale(-th_r)).times_i().scale(-1);
                    debug_assert!(cu.1 == 0 && cw.1 == 0);
                    let (ru, rw) = (r as usize, r as usize + half);
                    if ru >= col {
                        m.add(ru, col, 0.5 * cu.0 as f64 * t.coeff);
                    }
                    if rw >= col {
                        m.add(rw, col, 0.5 * cw.0 as f64 * t.coeff);
                    }
                }
            }
        }
        m.mirror_lower();
        Ok(Some(m))
    }
}

/// Gaussian integer `(re, im)`.
#[derive(Clone, Copy)]
struct G(i32, i32);

fn gauss(k: u8) -> G {
    match k & 3 {
        0 => G(1, 0),
        1 => G(0, 1),
        2 => G(-1, 0),
        _ => G(0, -1),
    }
}

impl G {
    fn scale(self, s: i32) -> G {
        G(self.0 * s, self.1 * s)
    }
    fn times_i(self) -> G {
        G(-self.1, self.0)
    }
    fn add(self, o: G) -> G {
        G(self.0 + o.0, self.1 + o.1)
    }
}

/// Unnormalized in-place Walsh-Hadamard transform.
pub fn walsh_hadamard(f: &mut [Complex64]) {
    let n = f.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (f[j], f[j + h]);
                f[j] = a + b;
                f[j + h] = a - b;
            }
        }
        h *= 2;
    }
}
