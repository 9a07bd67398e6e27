//! Exact integer combinatorics, pairwise summation and adaptive quadrature.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// `C(n, k)` exactly; the word-sized path falls back to big integers on overflow.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        match c.checked_mul((n - i) as u128) {
            Some(v) => c = v / (i + 1) as u128,
            None => return binomial_big(n, k),
        }
    }
    BigUint::from(c)
}

fn binomial_big(n: u64, k: u64) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k {
        c *= n - i;
        c /= i + 1;
    }
    c
}

pub fn binomial_f64(n: u64, k: u64) -> f64 {
    binomial(n, k).to_f64().unwrap_or(f64::INFINITY)
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `n!! = n (n-2) (n-4) ...`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> BigUint {
    let mut acc = BigUint::one();
    let mut i = n;
    while i > 1 {
        acc *= i as u64;
        i -= 2;
    }
    acc
}

pub fn catalan(m: u64) -> BigUint {
    binomial(2 * m, m) / (m + 1)
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature on [{a}, {b}] did not reach tolerance {tol:e} (estimate {estimate:e})")]
    ToleranceNotMet { a: f64, b: f64, tol: f64, estimate: f64 },
    #[error("integrand is not finite near {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Composite double-exponential quadrature: `[a, b]` is cut into `pieces`
/// equal panels and each panel is bisected until its error estimate is below
/// its share of `tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64, pieces: usize) -> Result<Integral, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let mut parts = Vec::with_capacity(pieces);
    let mut total = Integral { value: 0.0, error: 0.0, evaluations: 0 };
    for i in 0..pieces {
        let lo = a + h * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + h };
        let r = adaptive(&f, lo, hi, tol / pieces as f64, 12)?;
        parts.push(r.value);
        total.error += r.error;
        total.evaluations += r.evaluations;
    }
    total.value = pairwise_sum(&parts);
    Ok(total)
}

fn adaptive<F>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<Integral, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let out = quadrature::integrate(f, a, b, tol);
    if !out.integral.is_finite() {
        return Err(QuadratureError::NonFinite(0.5 * (a + b)));
    }
    // below this the estimate is round-off
    let floor = 1e3 * f64::EPSILON * out.integral.abs();
    if out.error_estimate <= tol.max(floor) {
        return Ok(Integral {
            value: out.integral,
            error: out.error_estimate,
            evaluations: out.num_function_evaluations as usize,
        });
    }
    if depth == 0 {
        return Err(QuadratureError::ToleranceNotMet { a, b, tol, estimate: out.error_estimate });
    }
    let m = 0.5 * (a + b);
    let l = adaptive(f, a, m, 0.5 * tol, depth - 1)?;
    let r = adaptive(f, m, b, 0.5 * tol, depth - 1)?;
    Ok(Integral {
        value: l.value + r.value,
        error: l.error + r.error,
        evaluations: l.evaluations + r.evaluations + out.num_function_evaluations as usize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(10, 2), BigUint::from(45u32));
        assert_eq!(binomial(5, 0), BigUint::one());
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(50, 25), BigUint::from(126_410_606_437_752u64));
    }

    #[test]
    fn large_binomial_promotes() {
        // C(200,100) needs ~196 bits; compare against Pascal's rule
        let a = binomial(200, 100);
        assert_eq!(a, binomial(199, 99) + binomial(199, 100));
        assert_eq!(binomial(130, 65), binomial_big(130, 65));
    }

    #[test]
    fn factorials() {
        assert_eq!(double_factorial(7), BigUint::from(105u32));
        assert_eq!(double_factorial(-1), BigUint::one());
        assert_eq!(double_factorial(0), BigUint::one());
        assert_eq!(factorial(6), BigUint::from(720u32));
        let cats: Vec<u64> = (0..7).map(|m| catalan(m).to_u64().unwrap()).collect();
        assert_eq!(cats, [1, 1, 2, 5, 14, 42, 132]);
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn quadrature_basics() {
        let r = integrate(|x| x * x, 0.0, 3.0, 1e-12, 1).unwrap();
        assert!((r.value - 9.0).abs() < 1e-11);
        let r = integrate(|x| (1.0 - x * x).sqrt(), -1.0, 1.0, 1e-12, 1).unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
        let r = integrate(|x| (40.0 * x).cos(), 0.0, std::f64::consts::PI, 1e-12, 8).unwrap();
        assert!(r.value.abs() < 1e-11);
    }
}
