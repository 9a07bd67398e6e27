//! Eigenvalues of dense Hermitian and real symmetric matrices.

use faer::{Mat, Side};
use num_complex::Complex64;
use thiserror::Error;

use super::matrix::{HermitianMatrix, SymmetricMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("input is not Hermitian: defect {defect:e} exceeds {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("LAPACK {routine} returned info = {info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("dimension {0} too large for a 32-bit LAPACK interface")]
    TooLarge(usize),
    #[error("faer eigensolver did not converge")]
    NoConvergence,
    #[error("backend {0:?} is not compiled in")]
    Unavailable(Backend),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// LAPACK divide and conquer (two-stage reduction for complex input).
    #[cfg_attr(feature = "lapack", default)]
    Lapack,
    #[cfg_attr(not(feature = "lapack"), default)]
    Faer,
}

pub const HERMITIAN_TOL: f64 = 1e-12;

fn check_hermitian(m: &HermitianMatrix) -> Result<(), EigenError> {
    let tol = HERMITIAN_TOL * m.max_abs().max(1.0);
    let defect = m.hermitian_defect();
    if defect > tol {
        return Err(EigenError::NotHermitian { defect, tol });
    }
    Ok(())
}

/// Ascending eigenvalues, reading the lower triangle.
pub fn hermitian_eigenvalues(m: &HermitianMatrix, backend: Backend) -> Result<Vec<f64>, EigenError> {
    check_hermitian(m)?;
    let mut w = match backend {
        Backend::Lapack => lapack::zheevd(m)?,
        Backend::Faer => {
            let n = m.dim();
            let a = Mat::<Complex64>::from_fn(n, n, |r, c| m.get(r, c));
            a.self_adjoint_eigenvalues(Side::Lower).map_err(|_| EigenError::NoConvergence)?
        }
    };
    w.sort_by(f64::total_cmp);
    Ok(w)
}

pub fn symmetric_eigenvalues(m: &SymmetricMatrix, backend: Backend) -> Result<Vec<f64>, EigenError> {
    let tol = HERMITIAN_TOL * m.as_slice().iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let defect = m.symmetry_defect();
    if defect > tol {
        return Err(EigenError::NotHermitian { defect, tol });
    }
    let mut w = match backend {
        Backend::Lapack => lapack::dsyevd(m)?,
        Backend::Faer => {
            let n = m.dim();
            let a = Mat::<f64>::from_fn(n, n, |r, c| m.get(r, c));
            a.self_adjoint_eigenvalues(Side::Lower).map_err(|_| EigenError::NoConvergence)?
        }
    };
    w.sort_by(f64::total_cmp);
    Ok(w)
}

/// Full eigendecomposition with faer; returns the largest relative residual
/// `|M v - l v| / |M|_F` over the eigenpairs at `indices`.
pub fn residual_spot_check(m: &HermitianMatrix, indices: &[usize]) -> Result<f64, EigenError> {
    check_hermitian(m)?;
    let n = m.dim();
    let a = Mat::<Complex64>::from_fn(n, n, |r, c| m.get(r, c));
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| EigenError::NoConvergence)?;
    let norm = m.frobenius_sq().sqrt().max(f64::MIN_POSITIVE);
    let u = evd.U();
    let s = evd.S();
    let mut worst = 0.0f64;
    for &j in indices {
        let j = j % n.max(1);
        let v: Vec<Complex64> = (0..n).map(|r| u[(r, j)]).collect();
        let lam = s[j].re;
        let mv = m.mul_vec(&v).expect("dimension checked");
        let r2: f64 = mv.iter().zip(&v).map(|(a, b)| (a - b * lam).norm_sqr()).sum();
        worst = worst.max(r2.sqrt() / norm);
    }
    Ok(worst)
}

#[cfg(feature = "lapack")]
mod lapack {
    use super::EigenError;
    use crate::spectra::matrix::{HermitianMatrix, SymmetricMatrix};
    use lapack_sys::__BindgenComplex as Zc;
    use std::os::raw::{c_char, c_int};

    #[link(name = "openblas")]
    extern "C" {
        fn openblas_set_num_threads(n: c_int);
    }

    /// Keep BLAS single-threaded; parallelism comes from independent samples.
    pub fn single_threaded_blas() {
        static ONCE: std::sync::Once = std::sync::Once::new();
        ONCE.call_once(|| unsafe { openblas_set_num_threads(1) });
    }

    fn dim_i32(n: usize) -> Result<c_int, EigenError> {
        c_int::try_from(n).ok().filter(|&d| (d as i64) * (d as i64) <= i32::MAX as i64).ok_or(EigenError::TooLarge(n))
    }

    pub fn zheevd(m: &HermitianMatrix) -> Result<Vec<f64>, EigenError> {
        single_threaded_blas();
        let n = dim_i32(m.dim())?;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut a: Vec<Zc<f64>> = m.as_slice().iter().map(|z| Zc { re: z.re, im: z.im }).collect();
        let mut w = vec![0.0; m.dim()];
        let (jobz, uplo) = (b'N' as c_char, b'L' as c_char);
        let mut info: c_int = 0;
        let mut wq = Zc { re: 0.0, im: 0.0 };
        let mut rq = 0.0f64;
        let mut iq: c_int = 0;
        let q: c_int = -1;
        unsafe {
            lapack_sys::zheevd_2stage_(
                &jobz, &uplo, &n, a.as_mut_ptr(), &n, w.as_mut_ptr(), &mut wq, &q, &mut rq, &q, &mut iq, &q, &mut info,
            );
        }
        if info != 0 {
            return Err(EigenError::Lapack { routine: "zheevd_2stage", info });
        }
        let (lw, lrw, liw) = (wq.re as c_int, rq as c_int, iq);
        let mut work = vec![Zc { re: 0.0, im: 0.0 }; lw.max(1) as usize];
        let mut rwork = vec![0.0f64; lrw.max(1) as usize];
        let mut iwork = vec![0 as c_int; liw.max(1) as usize];
        unsafe {
            lapack_sys::zheevd_2stage_(
                &jobz,
                &uplo,
                &n,
                a.as_mut_ptr(),
                &n,
                w.as_mut_ptr(),
                work.as_mut_ptr(),
                &lw,
                rwork.as_mut_ptr(),
                &lrw,
                iwork.as_mut_ptr(),
                &liw,
                &mut info,
            );
        }
        if info != 0 {
            return Err(EigenError::Lapack { routine: "zheevd_2stage", info });
        }
        Ok(w)
    }

    pub fn dsyevd(m: &SymmetricMatrix) -> Result<Vec<f64>, EigenError> {
        single_threaded_blas();
        let n = dim_i32(m.dim())?;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut a = m.as_slice().to_vec();
        let mut w = vec![0.0; m.dim()];
        let (jobz, uplo) = (b'N' as c_char, b'L' as c_char);
        let mut info: c_int = 0;
        let mut wq = 0.0f64;
        let mut iq: c_int = 0;
        let q: c_int = -1;
        unsafe {
            lapack_sys::dsyevd_(
                &jobz, &uplo, &n, a.as_mut_ptr(), &n, w.as_mut_ptr(), &mut wq, &q, &mut iq, &q, &mut info,
            );
        }
        if info != 0 {
            return Err(EigenError::Lapack { routine: "dsyevd", info });
        }
        let (lw, liw) = (wq as c_int, iq);
        let mut work = vec![0.0f64; lw.max(1) as usize];
        let mut iwork = vec![0 as c_int; liw.max(1) as usize];
        unsafe {
            lapack_sys::dsyevd_(
                &jobz,
                &uplo,
                &n,
                a.as_mut_ptr(),
                &n,
                w.as_mut_ptr(),
                work.as_mut_ptr(),
                &lw,
                iwork.as_mut_ptr(),
                &liw,
                &mut info,
            );
        }
        if info != 0 {
            return Err(EigenError::Lapack { routine: "dsyevd", info });
        }
        Ok(w)
    }
}

#[cfg(not(feature = "lapack"))]
mod lapack {
    use super::{Backend, EigenError};
    use crate::spectra::matrix::{HermitianMatrix, SymmetricMatrix};

    pub fn zheevd(_: &HermitianMatrix) -> Result<Vec<f64>, EigenError> {
        Err(EigenError::Unavailable(Backend::Lapack))
    }

    pub fn dsyevd(_: &SymmetricMatrix) -> Result<Vec<f64>, EigenError> {
        Err(EigenError::Unavailable(Backend::Lapack))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn backends() -> Vec<Backend> {
        if cfg!(feature = "lapack") {
            vec![Backend::Lapack, Backend::Faer]
        } else {
            vec![Backend::Faer]
        }
    }

    #[test]
    fn diagonal() {
        let m = HermitianMatrix::from_row_major(2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)], 0.0)
            .unwrap();
        for b in backends() {
            assert_eq!(hermitian_eigenvalues(&m, b).unwrap(), vec![-1.0, 1.0]);
        }
    }

    #[test]
    fn sigma_y_and_backends_agree() {
        let m = HermitianMatrix::from_row_major(2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)], 0.0)
            .unwrap();
        for b in backends() {
            let w = hermitian_eigenvalues(&m, b).unwrap();
            assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
        }
        let n = 137;
        let rows: Vec<Complex64> = (0..n * n)
            .map(|k| {
                let (r, col) = (k / n, k % n);
                let (lo, hi) = (r.min(col) as f64, r.max(col) as f64);
                let im = if r == col { 0.0 } else if r > col { (lo * 0.3 + hi).cos() } else { -(lo * 0.3 + hi).cos() };
                c((lo + 2.0 * hi).sin(), im)
            })
            .collect();
        let m = HermitianMatrix::from_row_major(n, &rows, 0.0).unwrap();
        let ws: Vec<Vec<f64>> = backends().into_iter().map(|b| hermitian_eigenvalues(&m, b).unwrap()).collect();
        for w in &ws[1..] {
            for (a, b) in w.iter().zip(&ws[0]) {
                assert!((a - b).abs() < 1e-11);
            }
        }
        assert!((ws[0].iter().sum::<f64>() - m.trace()).abs() < 1e-10);
        assert!(residual_spot_check(&m, &[0, 5, 136]).unwrap() < 1e-12);
    }

    #[test]
    fn symmetric_backends_agree() {
        let n = 150;
        let mut s = SymmetricMatrix::zeros(n);
        for col in 0..n {
            for r in col..n {
                s.add(r, col, ((r * 7 + col * 3) as f64).sin());
            }
        }
        s.mirror_lower();
        let ws: Vec<Vec<f64>> = backends().into_iter().map(|b| symmetric_eigenvalues(&s, b).unwrap()).collect();
        for w in &ws[1..] {
            for (a, b) in w.iter().zip(&ws[0]) {
                assert!((a - b).abs() < 1e-11);
            }
        }
        assert!((ws[0].iter().sum::<f64>() - s.trace()).abs() < 1e-10);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = HermitianMatrix::zeros(2);
        m.lower_mut()[1] = c(1.0, 0.0);
        assert!(matches!(hermitian_eigenvalues(&m, Backend::Faer), Err(EigenError::NotHermitian { .. })));
    }
}
