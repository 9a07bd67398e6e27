//! Pauli strings on up to 64 sites as symplectic bitmasks.
//!
//! A string is `i^phase * prod_j X_j^{x_j} Z_j^{z_j}` with site 1 on the
//! least significant bit. `Y = iXZ`, so each Y letter contributes one unit of
//! phase.

use num_complex::Complex64;
use thiserror::Error;

pub const MAX_SITES: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("site {0} appears more than once")]
    DuplicateSite(u32),
    #[error("site {site} outside 1..={n_sites}")]
    SiteOutOfRange { site: u32, n_sites: u32 },
    #[error("site counts differ: {0} vs {1}")]
    SiteCountMismatch(u32, u32),
    #[error("letter {0} is not a Pauli index")]
    InvalidLetter(u8),
    #[error("site count {0} outside 1..=64")]
    InvalidSiteCount(u32),
    #[error("empty letter chain")]
    EmptyChain,
}

/// Exact value of a normalized Pauli trace: zero or `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceValue {
    Zero,
    Unit(u8),
}

impl TraceValue {
    pub fn is_zero(self) -> bool {
        self == TraceValue::Zero
    }

    pub fn is_one(self) -> bool {
        self == TraceValue::Unit(0)
    }

    /// `(re, im)` as integers in `{-1, 0, 1}`.
    pub fn parts(self) -> (i64, i64) {
        match self {
            TraceValue::Zero => (0, 0),
            TraceValue::Unit(0) => (1, 0),
            TraceValue::Unit(1) => (0, 1),
            TraceValue::Unit(2) => (-1, 0),
            TraceValue::Unit(_) => (0, -1),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        let (re, im) = self.parts();
        Complex64::new(re as f64, im as f64)
    }
}

/// Powers of `i` as exact complex numbers.
pub fn i_pow(k: u8) -> Complex64 {
    TraceValue::Unit(k & 3).to_complex()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_sites: u32,
    x_mask: u64,
    z_mask: u64,
    phase_exp: u8,
}

fn site_mask(n_sites: u32) -> u64 {
    if n_sites >= 64 {
        u64::MAX
    } else {
        (1u64 << n_sites) - 1
    }
}

impl PauliString {
    pub fn identity(n_sites: u32) -> Result<Self, PauliError> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(PauliError::InvalidSiteCount(n_sites));
        }
        Ok(Self { n_sites, x_mask: 0, z_mask: 0, phase_exp: 0 })
    }

    /// Raw constructor; masks are truncated to `n_sites` bits.
    pub fn from_masks(n_sites: u32, x_mask: u64, z_mask: u64, phase_exp: u8) -> Result<Self, PauliError> {
        let id = Self::identity(n_sites)?;
        let m = site_mask(n_sites);
        if x_mask & !m != 0 || z_mask & !m != 0 {
            let high = 64 - ((x_mask | z_mask) & !m).leading_zeros();
            return Err(PauliError::SiteOutOfRange { site: high, n_sites });
        }
        Ok(Self { x_mask, z_mask, phase_exp: phase_exp & 3, ..id })
    }

    /// Build from `(site, letter)` pairs, sites 1-based, letters in `0..=3`.
    pub fn from_letters(n_sites: u32, letters: &[(u32, u8)]) -> Result<Self, PauliError> {
        let mut p = Self::identity(n_sites)?;
        let mut seen = 0u64;
        for &(site, a) in letters {
            if site == 0 || site > n_sites {
                return Err(PauliError::SiteOutOfRange { site, n_sites });
            }
            let bit = 1u64 << (site - 1);
            if seen & bit != 0 {
                return Err(PauliError::DuplicateSite(site));
            }
            seen |= bit;
            match a {
                0 => {}
                1 => p.x_mask |= bit,
                2 => {
                    p.x_mask |= bit;
                    p.z_mask |= bit;
                    p.phase_exp = (p.phase_exp + 1) & 3;
                }
                3 => p.z_mask |= bit,
                _ => return Err(PauliError::InvalidLetter(a)),
            }
        }
        Ok(p)
    }

    pub fn n_sites(&self) -> u32 {
        self.n_sites
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase_exp as u32 + (self.x_mask & self.z_mask).count_ones()) % 2 == 0
    }

    /// Letter on a 1-based site.
    pub fn letter(&self, site: u32) -> u8 {
        let bit = 1u64 << (site - 1);
        match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
            (false, false) => 0,
            (true, false) => 1,
            (true, true) => 2,
            (false, true) => 3,
        }
    }

    /// Phase left over after writing the string as a product of letters,
    /// i.e. `self = i^k * prod sigma^(letter)`.
    pub fn letter_phase(&self) -> u8 {
        let ys = (self.x_mask & self.z_mask).count_ones() as u8;
        (self.phase_exp + 4 - (ys & 3)) & 3
    }

    pub fn with_phase(mut self, phase_exp: u8) -> Self {
        self.phase_exp = phase_exp & 3;
        self
    }

    pub fn multiply(&self, q: &PauliString) -> Result<PauliString, PauliError> {
        if self.n_sites != q.n_sites {
            return Err(PauliError::SiteCountMismatch(self.n_sites, q.n_sites));
        }
        Ok(self.mul_unchecked(q))
    }

    #[inline]
    pub(crate) fn mul_unchecked(&self, q: &PauliString) -> PauliString {
        let swaps = (self.z_mask & q.x_mask).count_ones() as u8;
        PauliString {
            n_sites: self.n_sites,
            x_mask: self.x_mask ^ q.x_mask,
            z_mask: self.z_mask ^ q.z_mask,
            phase_exp: (self.phase_exp + q.phase_exp + 2 * (swaps & 1)) & 3,
        }
    }

    pub fn commutes(&self, q: &PauliString) -> Result<bool, PauliError> {
        if self.n_sites != q.n_sites {
            return Err(PauliError::SiteCountMismatch(self.n_sites, q.n_sites));
        }
        Ok(self.commutes_unchecked(q))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, q: &PauliString) -> bool {
        ((self.x_mask & q.z_mask).count_ones() + (self.z_mask & q.x_mask).count_ones()) % 2 == 0
    }

    /// `2^{-n} Tr`.
    pub fn normalized_trace(&self) -> TraceValue {
        if self.is_identity_up_to_phase() {
            TraceValue::Unit(self.phase_exp)
        } else {
            TraceValue::Zero
        }
    }

    /// Image of the basis state `|s>`: returns `(s', k)` with `P|s> = i^k |s'>`.
    #[inline]
    pub fn apply_basis(&self, s: u64) -> (u64, u8) {
        let sign = ((self.z_mask & s).count_ones() & 1) as u8;
        (s ^ self.x_mask, (self.phase_exp + 2 * sign) & 3)
    }

    /// Dense row-major matrix of size `2^n x 2^n`. Intended for small `n`.
    pub fn to_matrix(&self) -> Vec<Complex64> {
        let dim = 1usize << self.n_sites;
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for c in 0..dim as u64 {
            let (r, k) = self.apply_basis(c);
            m[r as usize * dim + c as usize] = i_pow(k);
        }
        m
    }
}

/// `(1/2) Tr sigma^(a_1) ... sigma^(a_k)` for single-site letters in `1..=3`.
pub fn chain_trace(letters: &[u8]) -> Result<TraceValue, PauliError> {
    if letters.is_empty() {
        return Err(PauliError::EmptyChain);
    }
    let mut acc = PauliString::identity(1)?;
    for &a in letters {
        if !(1..=3).contains(&a) {
            return Err(PauliError::InvalidLetter(a));
        }
        acc = acc.mul_unchecked(&PauliString::from_letters(1, &[(1, a)])?);
    }
    Ok(acc.normalized_trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(a: u8) -> PauliString {
        PauliString::from_letters(1, &[(1, a)]).unwrap()
    }

    #[test]
    fn letter_encodings() {
        let x = single(1);
        assert_eq!((x.x_mask(), x.z_mask(), x.phase_exp()), (1, 0, 0));
        let y = single(2);
        assert_eq!((y.x_mask(), y.z_mask(), y.phase_exp()), (1, 1, 1));
        let iz = PauliString::from_letters(2, &[(1, 0), (2, 3)]).unwrap();
        assert_eq!((iz.x_mask(), iz.z_mask(), iz.phase_exp()), (0, 2, 0));
    }

    #[test]
    fn rejects_bad_sites() {
        assert_eq!(
            PauliString::from_letters(2, &[(1, 1), (1, 3)]),
            Err(PauliError::DuplicateSite(1))
        );
        assert!(matches!(
            PauliString::from_letters(2, &[(3, 1)]),
            Err(PauliError::SiteOutOfRange { site: 3, .. })
        ));
        assert!(PauliString::from_letters(2, &[(0, 1)]).is_err());
        assert_eq!(PauliString::from_letters(1, &[(1, 4)]), Err(PauliError::InvalidLetter(4)));
        assert!(PauliString::identity(0).is_err());
        assert!(PauliString::identity(65).is_err());
        assert!(PauliString::from_masks(2, 4, 0, 0).is_err());
    }

    #[test]
    fn products() {
        let xy = single(1).multiply(&single(2)).unwrap();
        assert_eq!((xy.x_mask(), xy.z_mask(), xy.phase_exp()), (0, 1, 1));
        let yy = single(2).multiply(&single(2)).unwrap();
        assert_eq!((yy.x_mask(), yy.z_mask(), yy.phase_exp()), (0, 0, 0));
        let s = single(1).multiply(&single(2)).unwrap();
        let sq = s.multiply(&s).unwrap();
        assert_eq!((sq.x_mask(), sq.z_mask(), sq.phase_exp()), (0, 0, 2));
        let two = PauliString::identity(2).unwrap();
        assert!(single(1).multiply(&two).is_err());
    }

    #[test]
    fn commutation() {
        assert!(!single(1).commutes(&single(3)).unwrap());
        let x1 = PauliString::from_letters(2, &[(1, 1)]).unwrap();
        let z2 = PauliString::from_letters(2, &[(2, 3)]).unwrap();
        assert!(x1.commutes(&z2).unwrap());
        let xx = PauliString::from_letters(2, &[(1, 1), (2, 1)]).unwrap();
        let zz = PauliString::from_letters(2, &[(1, 3), (2, 3)]).unwrap();
        assert!(xx.commutes(&zz).unwrap());
        assert!(x1.commutes(&single(1)).is_err());
    }

    #[test]
    fn traces() {
        assert_eq!(PauliString::identity(3).unwrap().normalized_trace(), TraceValue::Unit(0));
        assert_eq!(single(1).normalized_trace(), TraceValue::Zero);
        assert_eq!(chain_trace(&[1, 2, 3]), Ok(TraceValue::Unit(1)));
        assert_eq!(chain_trace(&[1, 1]), Ok(TraceValue::Unit(0)));
        assert_eq!(chain_trace(&[1, 2]), Ok(TraceValue::Zero));
        assert_eq!(chain_trace(&[2, 3, 2, 3]), Ok(TraceValue::Unit(2)));
        assert_eq!(chain_trace(&[]), Err(PauliError::EmptyChain));
        assert_eq!(chain_trace(&[0, 1]), Err(PauliError::InvalidLetter(0)));
    }

    #[test]
    fn letters_round_trip() {
        let p = PauliString::from_letters(4, &[(1, 2), (2, 0), (3, 1), (4, 3)]).unwrap();
        assert_eq!([p.letter(1), p.letter(2), p.letter(3), p.letter(4)], [2, 0, 1, 3]);
        assert_eq!(p.letter_phase(), 0);
        assert!(p.is_hermitian());
        assert_eq!(p.weight(), 3);
        assert!(!p.with_phase(0).is_hermitian());
    }
}
