use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use respsim_core::encoding::{
    amplification_rounds, encode_lcu, filtered_chain, shift_encoding, success_probability, BlockEncoding, ChainFactor,
    EncodingChain, HamiltonianEncoding,
};
use respsim_core::estimation::{FilterParams, SimSystem};
use respsim_core::filter::build_indicator;
use respsim_core::make_hubbard_dimer;
use respsim_core::operator::{hermitian_eigen, jordan_wigner, spectral_norm, DenseOperator};
use respsim_core::oracle::{diagonalize, window_amplitude};

fn dimer_system() -> SimSystem {
    SimSystem::from_model(&make_hubbard_dimer(1.0, 2.0, 0.5)).unwrap()
}

#[test]
fn dimer_subnorm_is_coefficient_sum() {
    let m = make_hubbard_dimer(1.0, 2.0, 0.5);
    let p = jordan_wigner(&m.hamiltonian().unwrap()).unwrap();
    let hand: f64 = p.terms.values().map(|c| c.norm()).sum();
    let be = encode_lcu(&p).unwrap();
    assert!((be.subnorm - hand).abs() < 1e-14);
    assert_eq!(be.ancillas, (p.len() as f64).log2().ceil() as usize);
}

#[test]
fn shift_moves_spectrum_and_grows_subnorm() {
    let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(2.0, 0.0),
    ]));
    let be = BlockEncoding::new(DenseOperator::new(diag, true).unwrap(), 2.0, 1).unwrap();
    let shifted = shift_encoding(&be, 0.5);
    assert_eq!(shifted.subnorm, 2.5);
    assert_eq!(shifted.ancillas, 2);
    let want = [-1.5, 0.0, 1.5];
    for (k, w) in want.iter().enumerate() {
        assert_eq!(shifted.op.matrix[(k, k)].re, *w);
    }
    let same = shift_encoding(&be, 0.0);
    assert_eq!(same.op.matrix, be.op.matrix);
    assert_eq!(same.subnorm, be.subnorm);
}

#[test]
fn zero_dipoles_give_zero_chain() {
    let sys = SimSystem::from_model(&make_hubbard_dimer(1.0, 2.0, 0.0)).unwrap();
    let params = FilterParams { overlap: 0.1, eps: 1e-3 };
    let chain = sys.chain(&[0, 0], &[(4.2, 4.8)], params, false).unwrap();
    assert!(chain.zeta > 0.0);
    assert!(chain.effective_operator().unwrap().iter().all(|z| z.norm() == 0.0));
    let (p, xi) = success_probability(&chain, &sys.ground).unwrap();
    assert_eq!((p, xi), (0.0, 0.0));
}

#[test]
fn full_window_chain_is_dipole_product() {
    let sys = dimer_system();
    let h = &sys.hamiltonian;
    let (vals, _) = hermitian_eigen(&h.enc.op.matrix);
    let rho = vals.iter().map(|l| l.abs()).fold(0.0, f64::max) / h.scale_at(0.0);
    let delta = (0.5 * (1.0 - rho)).min(0.1);
    let eps = 1e-3;
    let f = build_indicator(-1.0 + delta, 1.0 - delta, delta, eps).unwrap();
    let (d, dp) = (&sys.dipoles[0], &sys.dipoles[0]);
    let chain = filtered_chain(d, &f, h, dp, 0.0).unwrap();
    let eff = chain.effective_operator().unwrap();
    let want = &dp.op.matrix * &d.op.matrix;
    let norm = |m: &DMatrix<Complex64>| spectral_norm(m, true);
    assert!(norm(&(eff - want)) <= eps * norm(&dp.op.matrix) * norm(&d.op.matrix));
}

#[test]
fn bright_line_chain_matches_window_amplitude() {
    let m = make_hubbard_dimer(1.0, 2.0, 0.5);
    let sd = diagonalize(&m, true).unwrap();
    let sys = dimer_system();
    let params = FilterParams { overlap: 0.1, eps: 1e-3 };
    let (a, b) = (4.2, 4.8);
    let chain = sys.chain(&[0, 0], &[(a, b)], params, false).unwrap();
    let got = chain.expectation(&sys.ground).unwrap();
    let want = window_amplitude(&sd, 0, 0, a, b);
    // No eigenvalue sits in either ramp, so the filter error is the only budget.
    let ramp = params.overlap * (b - a);
    assert!(!sd.eigenvalues.iter().any(|&l| (l - a).abs() < ramp || (l - b).abs() < ramp));
    let d_psi = sys.dipoles[0].op.apply(&sys.ground).norm();
    assert!((got - want).norm() <= params.eps * d_psi * d_psi);
}

#[test]
fn success_probability_examples() {
    let id = EncodingChain::new(vec![ChainFactor::Block(BlockEncoding::identity(4))]).unwrap();
    let psi = DVector::from_element(4, Complex64::new(0.5, 0.0));
    assert!((success_probability(&id, &psi).unwrap().0 - 1.0).abs() < 1e-15);
    assert_eq!(amplification_rounds(&id, &psi).unwrap(), 1);

    let tenth = DenseOperator::new(DMatrix::<Complex64>::identity(4, 4).scale(0.1), true).unwrap();
    let weak = EncodingChain::new(vec![ChainFactor::Block(BlockEncoding::new(tenth, 1.0, 0).unwrap())]).unwrap();
    assert_eq!(amplification_rounds(&weak, &psi).unwrap(), 10);
}

#[test]
fn dimer_success_probability_matches_oracle() {
    let m = make_hubbard_dimer(1.0, 2.0, 0.5);
    let sd = diagonalize(&m, true).unwrap();
    let sys = dimer_system();
    let params = FilterParams { overlap: 0.1, eps: 1e-6 };
    let chain = sys.chain(&[0, 0], &[(4.2, 4.8)], params, false).unwrap();
    // Oracle: project D psi onto the window eigenvectors, then apply D again.
    let d = &sys.dipoles[0].op.matrix;
    let mut coeffs = sd.eigenvectors.adjoint() * (d * &sys.ground);
    for (j, c) in coeffs.iter_mut().enumerate() {
        if !(4.2..4.8).contains(&sd.eigenvalues[j]) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let xi_exact = (d * (&sd.eigenvectors * coeffs)).norm();
    let (p, xi) = success_probability(&chain, &sys.ground).unwrap();
    assert!((xi - xi_exact).abs() < 1e-5);
    assert!((p - (xi / chain.zeta).powi(2)).abs() < 1e-12);
    let rounds = amplification_rounds(&chain, &sys.ground).unwrap();
    assert_eq!(rounds, (chain.zeta / xi_exact).ceil() as u64);
}

#[test]
fn shift_covariance() {
    let sys = dimer_system();
    let base = Arc::new(HamiltonianEncoding::new(sys.hamiltonian.enc.clone()).unwrap());
    let shift = 0.75;
    let moved = HamiltonianEncoding::new(shift_encoding(&base.enc, shift)).unwrap();
    let (center, hw) = (3.9, 0.4);
    // Both chains see the same rescaling when the shift and the centre share a sign.
    let s = moved.scale_at(center);
    assert!((s - base.scale_at(center + shift)).abs() < 1e-12);
    let f = build_indicator(-hw / s, hw / s, 0.1 * hw / s, 1e-3).unwrap();
    let d = &sys.dipoles[0];
    let a = filtered_chain(d, &f, &moved, d, center).unwrap().effective_operator().unwrap();
    let b = filtered_chain(d, &f, &base, d, center + shift).unwrap().effective_operator().unwrap();
    assert!(spectral_norm(&(a - b), true) < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chains_respect_their_subnormalisation(lo in 0.0f64..6.0, width in 0.3f64..2.0, ax in 0usize..3, centered: bool) {
        let sys = dimer_system();
        let params = FilterParams { overlap: 0.1, eps: 1e-3 };
        let chain = sys.chain(&[ax, ax], &[(lo, lo + width)], params, centered).unwrap();
        let eff = chain.effective_operator().unwrap();
        prop_assert!(spectral_norm(&eff, false) <= chain.zeta * (1.0 + 1e-9));
        let (p, xi) = success_probability(&chain, &sys.ground).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p - (xi / chain.zeta).powi(2)).abs() < 1e-12);
    }
}
