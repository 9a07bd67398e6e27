use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use qsg_core::ensemble::{CouplingDistribution, Ensemble, EnsembleError, HamiltonianSample, Term};
use qsg_core::hypergraph::{circulant, complete_graph, complete_p_uniform, cycle_chain, star_graph, Hypergraph};
use qsg_core::limit_laws::LimitLaw;
use qsg_core::pauli::PauliString;
use qsg_core::spectra::{
    eigenvalues, estimate_expected_moments, ks_distance, sample_moments, sample_spectrum, Backend, Binning, EmpiricalDos,
    SolveOptions, Spectrum,
};
use rayon::prelude::*;
use std::collections::HashSet;

const DISTS: [CouplingDistribution; 4] = CouplingDistribution::ALL;

fn graphs() -> Vec<Hypergraph> {
    vec![
        cycle_chain(3).unwrap(),
        cycle_chain(4).unwrap(),
        star_graph(5).unwrap(),
        complete_graph(4).unwrap(),
        complete_p_uniform(4, 4).unwrap(),
        complete_p_uniform(5, 3).unwrap(),
        Hypergraph::new(6, vec![vec![1], vec![2, 3, 4], vec![1, 5, 6], vec![4, 6]]).unwrap(),
    ]
}

fn lcg(seed: u64) -> impl FnMut() -> f64 {
    let mut s = seed;
    move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}

#[test]
fn distribution_moments_exact() {
    for d in DISTS {
        assert!(d.moment(1).is_zero());
        assert!(d.moment(2).is_one());
        assert!(d.moment(0).is_one());
    }
    let e = CouplingDistribution::ShiftedExponential;
    assert_eq!(e.moment(3), BigRational::from_integer(2.into()));
    assert_eq!(e.moment(4), BigRational::from_integer(9.into()));
    assert_eq!(CouplingDistribution::StandardNormal.moment(8), BigRational::from_integer(105.into()));
    assert_eq!(CouplingDistribution::UniformSym.moment(4), BigRational::new(9.into(), 5.into()));
    for d in DISTS {
        assert_eq!(d.to_string().parse::<CouplingDistribution>().unwrap(), d);
    }
}

#[test]
fn distribution_moments_monte_carlo() {
    let n = 200_000usize;
    for d in DISTS {
        let g = Hypergraph::new(1, vec![vec![1]]).unwrap();
        let ens = Ensemble::new(&g, d).unwrap();
        // three couplings per sample, all iid
        let xs: Vec<f64> = (0..n as u64 / 3).flat_map(|i| ens.draw(7, i).terms().iter().map(|t| t.coeff * 3f64.sqrt()).collect::<Vec<_>>()).collect();
        let m = xs.len() as f64;
        for p in 1..=4u32 {
            let vals: Vec<f64> = xs.iter().map(|x| x.powi(p as i32)).collect();
            let mean = vals.iter().sum::<f64>() / m;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let se = (var / m).sqrt();
            assert!((mean - d.moment_f64(p)).abs() <= 5.0 * se + 1e-12, "{d} p={p}: {mean}");
        }
    }
}

#[test]
fn term_structure() {
    for g in graphs() {
        let ens = Ensemble::new(&g, CouplingDistribution::StandardNormal).unwrap();
        let h = ens.draw(1, 0);
        let want: usize = g.edges().iter().map(|e| 3usize.pow(e.len() as u32)).sum();
        assert_eq!(h.terms().len(), want);
        let mut seen = HashSet::new();
        for t in h.terms() {
            assert!(t.string.is_hermitian());
            assert!(!t.string.is_identity_up_to_phase());
            assert_eq!(t.string.weight() as usize, g.edges()[t.edge as usize].len());
            assert!(seen.insert((t.string.x_mask(), t.string.z_mask())));
        }
    }
    assert_eq!(Ensemble::new(&cycle_chain(3).unwrap(), CouplingDistribution::Rademacher).unwrap().term_count(), 27);
    assert_eq!(Ensemble::new(&complete_p_uniform(4, 4).unwrap(), CouplingDistribution::Rademacher).unwrap().term_count(), 81);
}

#[test]
fn coefficient_normalization() {
    let g = star_graph(4).unwrap();
    let ens = Ensemble::new(&g, CouplingDistribution::Rademacher).unwrap();
    let h = ens.draw(3, 5);
    for t in h.terms() {
        assert!((t.coeff.abs() - 1.0 / (3.0 * 3f64.sqrt())).abs() < 1e-15);
    }
    for d in DISTS {
        let ens = Ensemble::new(&cycle_chain(5).unwrap(), d).unwrap();
        let sq: Vec<f64> = (0..4000).map(|i| ens.draw(11, i).sum_coeff_sq()).collect();
        let mean = sq.iter().sum::<f64>() / sq.len() as f64;
        let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (sq.len() - 1) as f64;
        assert!((mean - 1.0).abs() <= 5.0 * (var / sq.len() as f64).sqrt() + 1e-12, "{d}: {mean}");
    }
}

#[test]
fn dense_identities() {
    for g in graphs() {
        for d in DISTS {
            let h = Ensemble::new(&g, d).unwrap().draw(21, 3);
            let m = h.to_dense().unwrap();
            assert_eq!(m.hermitian_defect(), 0.0);
            assert!(m.trace().abs() < 1e-12);
            let dim = h.dim() as f64;
            assert!((m.frobenius_sq() / dim - h.sum_coeff_sq()).abs() < 1e-12 * h.sum_coeff_sq());
        }
    }
    let big = Ensemble::new(&circulant(10, &[1, 2]).unwrap(), CouplingDistribution::UniformSym).unwrap().draw(0, 0);
    assert_eq!(big.to_dense().unwrap().hermitian_defect(), 0.0);
}

#[test]
fn single_terms() {
    let z = PauliString::from_letters(1, &[(1, 3)]).unwrap();
    let h = HamiltonianSample::from_terms(1, vec![Term { coeff: 1.0, string: z, edge: 0 }]).unwrap();
    let m = h.to_dense().unwrap();
    assert_eq!(m.get(0, 0), Complex64::new(1.0, 0.0));
    assert_eq!(m.get(1, 1), Complex64::new(-1.0, 0.0));
    assert_eq!(m.get(0, 1), Complex64::new(0.0, 0.0));
    let s = eigenvalues(&m).unwrap();
    assert_eq!(s.eigenvalues(), &[-1.0, 1.0]);

    let p = PauliString::from_letters(4, &[(1, 2), (3, 1), (4, 3)]).unwrap();
    let h = HamiltonianSample::from_terms(4, vec![Term { coeff: 0.7, string: p, edge: 0 }]).unwrap();
    let s = eigenvalues(&h.to_dense().unwrap()).unwrap();
    assert!(s.eigenvalues()[..8].iter().all(|l| (l + 0.7).abs() < 1e-12));
    assert!(s.eigenvalues()[8..].iter().all(|l| (l - 0.7).abs() < 1e-12));
}

#[test]
fn dense_cap_is_enforced() {
    let h = Ensemble::new(&cycle_chain(15).unwrap(), CouplingDistribution::Rademacher).unwrap().draw(0, 0);
    match h.to_dense() {
        Err(EnsembleError::DenseCap { n, cap, bytes }) => {
            assert_eq!((n, cap), (15, 14));
            assert_eq!(bytes, 16u128 << 30);
        }
        other => panic!("expected refusal, got {other:?}"),
    }
}

#[test]
fn real_form_matches_complex_spectrum() {
    let cases = vec![
        cycle_chain(4).unwrap(),
        cycle_chain(6).unwrap(),
        complete_p_uniform(4, 4).unwrap(),
        complete_p_uniform(6, 2).unwrap(),
        Hypergraph::new(6, vec![vec![1, 2, 3, 4], vec![3, 6], vec![2, 5]]).unwrap(),
    ];
    for g in cases {
        for d in DISTS {
            let h = Ensemble::new(&g, d).unwrap().draw(5, 2);
            assert!(h.has_real_form());
            let real = h.to_real_form_with_cap(14).unwrap().unwrap();
            assert_eq!(real.symmetry_defect(), 0.0);
            let dim = h.dim() as f64;
            assert!((real.frobenius_sq() / dim - h.sum_coeff_sq()).abs() < 1e-12);
            let a = sample_spectrum(&h, &SolveOptions { real_form: true, ..Default::default() }).unwrap();
            let b = sample_spectrum(&h, &SolveOptions { real_form: false, ..Default::default() }).unwrap();
            for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
                assert!((x - y).abs() < 1e-12, "{g:?} {d}: {x} vs {y}");
            }
        }
    }
    let odd = Ensemble::new(&cycle_chain(5).unwrap(), CouplingDistribution::Rademacher).unwrap().draw(0, 0);
    assert!(!odd.has_real_form());
    assert!(odd.to_real_form_with_cap(14).unwrap().is_none());
    let mixed = Ensemble::new(&Hypergraph::new(4, vec![vec![1], vec![2, 3]]).unwrap(), CouplingDistribution::Rademacher)
        .unwrap()
        .draw(0, 0);
    assert!(!mixed.has_real_form());
}

#[test]
fn backends_agree() {
    let h = Ensemble::new(&star_graph(7).unwrap(), CouplingDistribution::ShiftedExponential).unwrap().draw(8, 8);
    let base = SolveOptions { real_form: false, ..Default::default() };
    let a = sample_spectrum(&h, &SolveOptions { backend: Backend::Faer, ..base }).unwrap();
    let b = sample_spectrum(&h, &base).unwrap();
    for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
        assert!((x - y).abs() < 1e-11);
    }
}

#[test]
fn draws_are_order_independent() {
    let ens = Ensemble::new(&circulant(8, &[1, 3]).unwrap(), CouplingDistribution::StandardNormal).unwrap();
    let seq: Vec<Vec<f64>> = (0..64).map(|i| ens.draw(99, i).coefficients()).collect();
    let par: Vec<Vec<f64>> = (0..64u32).into_par_iter().rev().map(|i| ens.draw(99, i as u64).coefficients()).collect();
    let mut par = par;
    par.reverse();
    assert_eq!(seq, par);
    let shuffled: Vec<Vec<f64>> = [17u64, 3, 40].iter().map(|&i| ens.draw(99, i).coefficients()).collect();
    assert_eq!(shuffled, vec![seq[17].clone(), seq[3].clone(), seq[40].clone()]);
    assert_ne!(ens.draw(100, 0).coefficients(), seq[0]);
}

#[test]
fn spectrum_identities_per_sample() {
    for g in graphs() {
        let ens = Ensemble::new(&g, CouplingDistribution::ShiftedExponential).unwrap();
        for i in 0..5 {
            let h = ens.draw(4, i);
            let s = sample_spectrum(&h, &SolveOptions::default()).unwrap();
            assert!(s.identities(h.sum_coeff_sq()).holds());
            assert_eq!(s.moment(0), 1.0);
            assert!((s.moment(2) - h.sum_coeff_sq()).abs() < 1e-12);
        }
    }
}

#[test]
fn histogram_accounting() {
    let s = Spectrum::from_eigenvalues(vec![-5.0, -0.5, 0.0, 0.25, 3.9, 7.0, f64::NAN, 4.0]);
    let mut dos = EmpiricalDos::new(Binning::new(-4.0, 4.0, 8).unwrap(), 8);
    dos.accumulate(&s).unwrap();
    assert_eq!((dos.underflow, dos.overflow, dos.nan), (1, 1, 1));
    assert_eq!(dos.in_range(), 5);
    assert_eq!(dos.total(), 8);
    let once = dos.clone();
    dos.accumulate(&s).unwrap();
    assert_eq!(dos.counts, once.counts.iter().map(|c| 2 * c).collect::<Vec<_>>());
    assert!(dos.accumulate(&Spectrum::from_eigenvalues(vec![0.0])).is_err());
    let other = EmpiricalDos::new(Binning::new(-4.0, 4.0, 9).unwrap(), 8);
    assert!(dos.merge(&other).is_err());
}

#[test]
fn ks_examples() {
    let mut dos = EmpiricalDos::new(Binning::new(-4.0, 4.0, 100).unwrap(), 3);
    dos.accumulate(&Spectrum::from_eigenvalues(vec![0.0; 3])).unwrap();
    assert!((ks_distance(&dos, &LimitLaw::Gaussian).unwrap() - 0.5).abs() < 1e-12);

    // exact quantiles of the law give a small distance
    let law = LimitLaw::Semicircle;
    let n = 20_000;
    let quantiles: Vec<f64> = (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            let (mut lo, mut hi) = (-2.0, 2.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if law.cdf(mid).unwrap() < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        })
        .collect();
    let mut dos = EmpiricalDos::new(Binning::default_for(&law), n);
    dos.accumulate(&Spectrum::from_eigenvalues(quantiles)).unwrap();
    let d = ks_distance(&dos, &law).unwrap();
    assert!(d < 1e-3 && d >= 0.0, "{d}");
    assert!(ks_distance(&dos, &LimitLaw::Gaussian).unwrap() <= 1.0);
}

#[test]
fn stderr_scales_with_sample_count() {
    let ens = Ensemble::new(&cycle_chain(4).unwrap(), CouplingDistribution::StandardNormal).unwrap();
    let rows: Vec<Vec<f64>> =
        (0..1600).map(|i| sample_moments(&sample_spectrum(&ens.draw(2, i), &SolveOptions::default()).unwrap(), 2)).collect();
    let small = estimate_expected_moments(&rows[..100])[2].stderr;
    let large = estimate_expected_moments(&rows)[2].stderr;
    let ratio = small / large;
    assert!(ratio > 2.5 && ratio < 6.5, "{ratio}");
}

#[test]
fn relabelling_gives_the_same_law() {
    let g = Hypergraph::new(5, vec![vec![1, 2], vec![2, 3, 4], vec![4, 5], vec![1, 5]]).unwrap();
    let h = g.relabel(&[3, 5, 1, 2, 4]).unwrap();
    let est = |g: &Hypergraph| {
        let ens = Ensemble::new(g, CouplingDistribution::UniformSym).unwrap();
        let rows: Vec<Vec<f64>> =
            (0..3000).map(|i| sample_moments(&sample_spectrum(&ens.draw(6, i), &SolveOptions::default()).unwrap(), 4)).collect();
        estimate_expected_moments(&rows)
    };
    let (a, b) = (est(&g), est(&h));
    for k in [2usize, 4] {
        let se = (a[k].stderr.powi(2) + b[k].stderr.powi(2)).sqrt();
        assert!((a[k].mean - b[k].mean).abs() < 4.0 * se, "k={k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn apply_matches_dense(n in 1u32..=6, seed in any::<u64>(), di in 0usize..4) {
        let g = if n >= 3 { cycle_chain(n).unwrap() } else { complete_graph(n.max(2)).unwrap() };
        let h = Ensemble::new(&g, DISTS[di]).unwrap().draw(seed, seed >> 7);
        let dim = h.dim();
        let mut r = lcg(seed);
        let u: Vec<Complex64> = (0..dim).map(|_| Complex64::new(r(), r())).collect();
        let v: Vec<Complex64> = (0..dim).map(|_| Complex64::new(r(), r())).collect();
        let dense = h.to_dense().unwrap().mul_vec(&u).unwrap();
        let hu = h.apply(&u).unwrap();
        for (a, b) in dense.iter().zip(&hu) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        let sum: Vec<Complex64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let hv = h.apply(&v).unwrap();
        let hs = h.apply(&sum).unwrap();
        for i in 0..dim {
            prop_assert!((hs[i] - hu[i] - hv[i]).norm() < 1e-12);
        }
        prop_assert!(h.apply(&u[1..]).is_err());
    }

    #[test]
    fn sample_hermitian_and_traceless(seed in any::<u64>(), idx in any::<u64>(), gi in 0usize..7, di in 0usize..4) {
        let g = &graphs()[gi];
        let h = Ensemble::new(g, DISTS[di]).unwrap().draw(seed, idx);
        let m = h.to_dense().unwrap();
        prop_assert_eq!(m.hermitian_defect(), 0.0);
        prop_assert!(m.trace().abs() < 1e-12);
        prop_assert!((m.frobenius_sq() / h.dim() as f64 - h.sum_coeff_sq()).abs() < 1e-12);
    }
}
