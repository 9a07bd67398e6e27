//! Limiting spectral laws: standard normal, semicircle, the q-interpolating
//! family and the star-graph law.

use std::f64::consts::{FRAC_PI_2, PI};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use thiserror::Error;

use crate::numeric::{binomial, catalan, double_factorial, factorial, integrate, QuadratureError};
use crate::partitions::{crossing_histogram, PartitionError};

/// Above this `q` the Touchard-Riordan alternating sum is replaced by the
/// crossing polynomial.
pub const TR_SWITCH_Q: f64 = 0.999;
/// Largest `k` for which crossing numbers are enumerated directly.
pub const MAX_ENUMERATED_K: usize = 16;
pub const IMAG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LawError {
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("k = {0} must be even")]
    OddK(usize),
    #[error("k = {k} exceeds the enumeration limit {MAX_ENUMERATED_K}")]
    KTooLarge { k: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("integral has imaginary part {im:e} next to real part {re:e}")]
    ImaginaryPart { re: f64, im: f64 },
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("unknown law {0:?}")]
    UnknownLaw(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LimitLaw {
    Gaussian,
    Semicircle,
    QInterp { lambda: f64 },
    Star,
}

pub fn q_of_lambda(lambda: f64) -> f64 {
    (-4.0 * lambda / 3.0).exp()
}

/// Smallest `K >= 1` with `q^K < 1e-16`.
pub fn truncation_order(q: f64) -> usize {
    if q <= 0.0 {
        return 1;
    }
    let k = ((1e-16f64).ln() / q.ln()).floor() as usize + 1;
    let mut k = k.max(1);
    while q.powi(k as i32) >= 1e-16 {
        k += 1;
    }
    k
}

/// Bound on the relative error of the truncated product for `|x|` inside the
/// support.
pub fn truncation_tail_bound(q: f64) -> f64 {
    let k = truncation_order(q) as i32;
    5.0 * q.powi(k + 1) / (1.0 - q)
}

/// `prod_{k=0}^{K} (1 - q^{2k+2})/(1 - q^{2k+1}) (1 - x^2 (1-q) q^k / (1 + q^k)^2)`.
fn q_product(x: f64, q: f64) -> f64 {
    let big_k = truncation_order(q);
    let x2 = x * x * (1.0 - q);
    let mut p = 1.0;
    let mut qk = 1.0;
    for _ in 0..=big_k {
        let ratio = (1.0 - qk * qk * q * q) / (1.0 - qk * qk * q);
        p *= ratio * (1.0 - x2 * qk / ((1.0 + qk) * (1.0 + qk)));
        qk *= q;
    }
    p
}

/// `v(x|q)` on `|x| < 2/sqrt(1-q)`, zero outside.
pub fn v_density(x: f64, q: f64) -> f64 {
    let r = 2.0 / (1.0 - q).sqrt();
    if x.abs() >= r {
        return 0.0;
    }
    let s = (1.0 - (1.0 - q) * x * x / 4.0).sqrt();
    (1.0 - q).sqrt() / (PI * s) * q_product(x, q)
}

/// Accepts the forms produced by [`LimitLaw::name`].
impl std::str::FromStr for LimitLaw {
    type Err = LawError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "gaussian" => Ok(LimitLaw::Gaussian),
            "semicircle" => Ok(LimitLaw::Semicircle),
            "star" => Ok(LimitLaw::Star),
            other => {
                let inner = other
                    .strip_prefix("q-interp(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| LawError::UnknownLaw(other.to_string()))?;
                let lambda: f64 = inner.trim().parse().map_err(|_| LawError::UnknownLaw(other.to_string()))?;
                LimitLaw::q_interp(lambda)
            }
        }
    }
}

impl LimitLaw {
    pub fn q_interp(lambda: f64) -> Result<Self, LawError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(LawError::InvalidLambda(lambda));
        }
        Ok(LimitLaw::QInterp { lambda })
    }

    pub fn name(&self) -> String {
        match self {
            LimitLaw::Gaussian => "gaussian".into(),
            LimitLaw::Semicircle => "semicircle".into(),
            LimitLaw::QInterp { lambda } => format!("q-interp({lambda})"),
            LimitLaw::Star => "star".into(),
        }
    }

    pub fn q(&self) -> Option<f64> {
        match self {
            LimitLaw::QInterp { lambda } => Some(q_of_lambda(*lambda)),
            LimitLaw::Semicircle => Some(0.0),
            _ => None,
        }
    }

    /// Right end of a compact support.
    pub fn support_edge(&self) -> Option<f64> {
        self.q().map(|q| 2.0 / (1.0 - q).sqrt())
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            LimitLaw::Gaussian => Normal::standard().pdf(x),
            LimitLaw::Semicircle => {
                if x.abs() >= 2.0 {
                    0.0
                } else {
                    (4.0 - x * x).sqrt() / (2.0 * PI)
                }
            }
            LimitLaw::QInterp { lambda } => v_density(x, q_of_lambda(*lambda)),
            LimitLaw::Star => 3.0 * (3.0 / (2.0 * PI)).sqrt() * x * x * (-1.5 * x * x).exp(),
        }
    }

    /// Density pulled back by `x = R sin(theta)` for compact laws.
    fn theta_integrand(&self, theta: f64) -> f64 {
        match self {
            LimitLaw::Semicircle => 2.0 / PI * theta.cos().powi(2),
            LimitLaw::QInterp { lambda } => {
                let q = q_of_lambda(*lambda);
                let r = 2.0 / (1.0 - q).sqrt();
                2.0 / PI * q_product(r * theta.sin(), q)
            }
            _ => unreachable!("only compact laws"),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64, LawError> {
        match self {
            LimitLaw::Gaussian => Ok(Normal::standard().cdf(x)),
            LimitLaw::Semicircle => Ok(semicircle_cdf(x)),
            LimitLaw::Star if x.is_infinite() => Ok(if x > 0.0 { 1.0 } else { 0.0 }),
            LimitLaw::Star => {
                let z = 3f64.sqrt() * x;
                let n = Normal::standard();
                Ok(n.cdf(z) - z * n.pdf(z))
            }
            LimitLaw::QInterp { .. } => Ok(self.cdf_sorted(&[x])?[0]),
        }
    }

    /// CDF by quadrature in the angle variable, accumulated panel by panel
    /// over ascending abscissae.
    pub fn cdf_by_quadrature(&self, xs: &[f64]) -> Result<Vec<f64>, LawError> {
        let r = self.support_edge().expect("compact law");
        let mut out = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        let mut prev = -FRAC_PI_2;
        for &x in xs {
            let theta = if x <= -r {
                -FRAC_PI_2
            } else if x >= r {
                FRAC_PI_2
            } else {
                (x / r).asin()
            };
            if theta > prev {
                acc += integrate(|t| self.theta_integrand(t), prev, theta, 1e-13, 1)?.value;
                prev = theta;
            }
            out.push(acc.clamp(0.0, 1.0));
        }
        Ok(out)
    }

    /// CDF at ascending abscissae.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Result<Vec<f64>, LawError> {
        match self {
            LimitLaw::QInterp { .. } => self.cdf_by_quadrature(xs),
            _ => xs.iter().map(|&x| self.cdf(x)).collect(),
        }
    }

    pub fn moment(&self, k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        match self {
            LimitLaw::QInterp { lambda } => touchard_riordan(q_of_lambda(*lambda), k),
            _ => self.moment_exact(k).and_then(|r| r.to_f64()).unwrap_or(f64::NAN),
        }
    }

    /// Exact moments of the three laws with rational moments.
    pub fn moment_exact(&self, k: usize) -> Option<BigRational> {
        if k % 2 == 1 {
            return Some(BigRational::zero());
        }
        let int = |v: num_bigint::BigUint| BigRational::from_integer(BigInt::from(v));
        let h = k as u64 / 2;
        match self {
            LimitLaw::Gaussian => Some(int(double_factorial(k as i64 - 1))),
            LimitLaw::Semicircle => Some(int(catalan(h))),
            LimitLaw::Star => Some(BigRational::new(
                BigInt::from(factorial(k as u64 + 1)),
                BigInt::from(6).pow(h as u32) * BigInt::from(factorial(h)),
            )),
            LimitLaw::QInterp { .. } => None,
        }
    }

    /// `int x^k rho(x) dx` by quadrature of the density.
    pub fn moment_by_quadrature(&self, k: usize) -> Result<f64, LawError> {
        let kk = k as i32;
        match self.support_edge() {
            Some(r) => Ok(integrate(|t| (r * t.sin()).powi(kk) * self.theta_integrand(t), -FRAC_PI_2, FRAC_PI_2, 1e-12, 2)?
                .value),
            None => {
                let l = 14.0;
                Ok(integrate(|x| x.powi(kk) * self.density(x), -l, l, 1e-12, 8)?.value)
            }
        }
    }
}

pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// Literal alternating sum
/// `(1-q)^{-k/2} sum_j (-1)^j q^{j(j-1)/2} C(k, k/2+j)`.
pub fn touchard_riordan_sum(q: f64, k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let h = (k / 2) as i64;
    let mut s = 0.0;
    for j in -h..=h {
        let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let e = (j * (j - 1) / 2) as i32;
        s += sign * q.powi(e) * binomial(k as u64, (h + j) as u64).to_f64().unwrap_or(f64::INFINITY);
    }
    s / (1.0 - q).powi(h as i32)
}

/// Coefficients of `sum_pi q^{cr(pi)}`, obtained by dividing the
/// Touchard-Riordan numerator by `(1-q)^{k/2}` in exact arithmetic.
pub fn crossing_polynomial(k: usize) -> Result<Vec<BigInt>, LawError> {
    if k % 2 == 1 {
        return Err(LawError::OddK(k));
    }
    let h = (k / 2) as i64;
    let deg = (h * (h + 1) / 2) as usize;
    let mut num = vec![BigInt::zero(); deg + 1];
    for j in -h..=h {
        let e = (j * (j - 1) / 2) as usize;
        let c = BigInt::from(binomial(k as u64, (h + j) as u64));
        if j.rem_euclid(2) == 0 {
            num[e] += c;
        } else {
            num[e] -= c;
        }
    }
    // P = (1-q) Q  =>  Q_i = P_i + Q_{i-1}
    for _ in 0..h {
        let mut acc = BigInt::zero();
        for c in num.iter_mut() {
            acc += &*c;
            *c = acc.clone();
        }
        debug_assert!(acc.is_zero());
    }
    while num.len() > 1 && num.last().is_some_and(|c| c.is_zero()) {
        num.pop();
    }
    Ok(num)
}

fn horner(coeffs: &[BigInt], q: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * q + c.to_f64().unwrap_or(f64::INFINITY))
}

/// Even moments of the q-interpolating law, 0 for odd `k`.
pub fn touchard_riordan(q: f64, k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    if q > TR_SWITCH_Q {
        horner(&crossing_polynomial(k).expect("k even"), q)
    } else {
        touchard_riordan_sum(q, k)
    }
}

/// `sum_pi q^{cr(pi)}` with the crossing numbers enumerated.
pub fn moment_by_partitions(lambda: f64, k: usize) -> Result<f64, LawError> {
    if k % 2 == 1 {
        return Ok(0.0);
    }
    if k > MAX_ENUMERATED_K {
        return Err(LawError::KTooLarge { k });
    }
    let q = q_of_lambda(lambda);
    let hist = crossing_histogram(k)?;
    Ok(hist.iter().rev().fold(0.0, |acc, &c| acc * q + c as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralMoment {
    pub re: f64,
    pub im: f64,
}

/// Gaussian-weighted integral representation of the even moments, with both
/// parts of the complex integrand integrated.
pub fn moment_by_integral(lambda: f64, k: usize) -> Result<IntegralMoment, LawError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(LawError::InvalidLambda(lambda));
    }
    if k % 2 == 1 {
        return Err(LawError::OddK(k));
    }
    if k == 0 {
        return Ok(IntegralMoment { re: 1.0, im: 0.0 });
    }
    let m = (k / 2) as i32;
    let a = (lambda / 3.0).sqrt();
    let b = lambda / 3.0;
    let d = (-2.0 * lambda / 3.0).exp() * (-2.0 * lambda / 3.0).sinh();
    let base = ((2.0 * b).cosh() + 1.0) / d.abs();
    let amplitude = base.max(1.0).powi(m);
    let l = (2.0 * (amplitude.ln() + 40.0)).sqrt();
    let pieces = (4.0 * a * m as f64 * l).ceil().max(16.0) as usize;
    let norm = 1.0 / (2.0 * PI).sqrt();
    let f = |x: f64| -> Complex64 {
        let z = Complex64::new(2.0 * b, 2.0 * a * x);
        let ratio = (z.cosh() - 1.0) / d;
        ratio.powi(m) * (norm * (-0.5 * x * x).exp())
    };
    let tol = 1e-13 * amplitude;
    let re = integrate(|x| f(x).re, -l, l, tol, pieces)?.value;
    let im = integrate(|x| f(x).im, -l, l, tol, pieces)?.value;
    if im.abs() > IMAG_TOL * re.abs().max(1.0) {
        return Err(LawError::ImaginaryPart { re, im });
    }
    Ok(IntegralMoment { re, im })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        assert!((LimitLaw::Semicircle.density(0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(LimitLaw::Star.density(0.0), 0.0);
        for &x in &[-1.9, -0.7, 0.0, 0.3, 1.5] {
            let sc = LimitLaw::Semicircle.density(x);
            assert!((v_density(x, 0.0) - sc).abs() < 1e-15);
        }
        assert_eq!(v_density(3.0, 0.5), 0.0);
    }

    #[test]
    fn names_parse_back() {
        for law in [LimitLaw::Gaussian, LimitLaw::Semicircle, LimitLaw::Star, LimitLaw::q_interp(0.75).unwrap()] {
            assert_eq!(law.name().parse::<LimitLaw>().unwrap(), law);
        }
        for bad in ["", "normal", "q-interp(", "q-interp(-1)", "q-interp(x)"] {
            assert!(bad.parse::<LimitLaw>().is_err(), "{bad}");
        }
    }

    #[test]
    fn moment_examples() {
        assert_eq!(LimitLaw::Gaussian.moment(6), 15.0);
        assert_eq!(LimitLaw::Semicircle.moment(4), 2.0);
        assert!((LimitLaw::Star.moment(4) - 5.0 / 3.0).abs() < 1e-15);
        for law in [LimitLaw::Gaussian, LimitLaw::Semicircle, LimitLaw::Star, LimitLaw::q_interp(1.0).unwrap()] {
            assert_eq!(law.moment(3), 0.0);
            assert!((law.moment(2) - 1.0).abs() < 1e-12);
        }
        let q = q_of_lambda(1.0);
        let law = LimitLaw::q_interp(1.0).unwrap();
        assert!((law.moment(4) - (2.0 + q)).abs() < 1e-12);
        assert!((law.moment(6) - (5.0 + 6.0 * q + 3.0 * q * q + q * q * q)).abs() < 1e-12);
    }

    #[test]
    fn invalid_lambda() {
        assert!(LimitLaw::q_interp(0.0).is_err());
        assert!(LimitLaw::q_interp(f64::NAN).is_err());
        assert!(moment_by_integral(-1.0, 2).is_err());
    }

    #[test]
    fn crossing_polynomials() {
        let p = crossing_polynomial(6).unwrap();
        assert_eq!(p, [5, 6, 3, 1].map(BigInt::from).to_vec());
        for k in [2, 4, 8, 10] {
            let hist: Vec<BigInt> = crossing_histogram(k).unwrap().into_iter().map(BigInt::from).collect();
            assert_eq!(crossing_polynomial(k).unwrap(), hist);
        }
    }

    #[test]
    fn integral_form_small_k() {
        for &lam in &[0.25, 1.0, 4.0] {
            let m = moment_by_integral(lam, 2).unwrap();
            assert!((m.re - 1.0).abs() < 1e-9, "{lam} {m:?}");
        }
        let m = moment_by_integral(1.0, 4).unwrap();
        assert!((m.re - (2.0 + (-4.0f64 / 3.0).exp())).abs() < 1e-9);
        assert_eq!(moment_by_integral(1.0, 0).unwrap().re, 1.0);
    }

    #[test]
    fn cdfs() {
        assert!((LimitLaw::Gaussian.cdf(1.0).unwrap() - 0.841_344_746).abs() < 1e-8);
        assert_eq!(LimitLaw::Semicircle.cdf(0.0).unwrap(), 0.5);
        let law = LimitLaw::q_interp(0.7).unwrap();
        let c = law.cdf_sorted(&[-10.0, 0.0, 10.0]).unwrap();
        assert_eq!(c[0], 0.0);
        assert!((c[1] - 0.5).abs() < 1e-10);
        assert!((c[2] - 1.0).abs() < 1e-10);
        assert!(LimitLaw::Star.cdf(f64::NEG_INFINITY).unwrap().abs() < 1e-15);
        assert!((LimitLaw::Star.cdf(8.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn truncation() {
        assert_eq!(truncation_order(0.0), 1);
        let q: f64 = 0.5;
        let k = truncation_order(q);
        assert!(q.powi(k as i32) < 1e-16 && q.powi(k as i32 - 1) >= 1e-16);
        assert!(truncation_tail_bound(0.9) < 1e-14);
    }
}
