use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use respsim_core::operator::{dense, jordan_wigner};
use respsim_core::oracle::{
    alpha1, alpha3, alpha3_terms, chi1_time, diagonalize, nested_window_amplitude, r_pathway, r_pathway_freq, r_pathway_sos,
    window_amplitude, Alpha3Preset, Decay, SpectralData,
};
use respsim_core::{make_hubbard_dimer, make_random_model, ModelSpec};

const BRIGHT: f64 = 4.47213595499958;

fn dimer() -> (ModelSpec, SpectralData) {
    let m = make_hubbard_dimer(1.0, 2.0, 0.5);
    let sd = diagonalize(&m, true).unwrap();
    (m, sd)
}

fn dipole_matrix(m: &ModelSpec, axis: usize) -> DMatrix<Complex64> {
    dense(&jordan_wigner(&m.dipole_operator(axis).unwrap()).unwrap(), true).unwrap().matrix
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[test]
fn random_model_spectrum_matches_second_eigensolver() {
    let m = make_random_model(3, 2, 4).unwrap();
    let sd = diagonalize(&m, true).unwrap();
    // Real Fock-space matrix built without the qubit map, restricted to the sector.
    let fock = m.hamiltonian().unwrap().to_fock_matrix();
    let basis: Vec<usize> = (0..fock.nrows()).filter(|b| b.count_ones() == 2).collect();
    let sub = DMatrix::from_fn(basis.len(), basis.len(), |r, c| fock[(basis[r], basis[c])].re);
    let mut vals: Vec<f64> = nalgebra::SymmetricEigen::new(sub).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    assert!((vals[0] - sd.ground_energy).abs() < 1e-10);
    for (v, l) in vals.iter().zip(&sd.eigenvalues) {
        assert!((v - vals[0] - l).abs() < 1e-10);
    }
}

#[test]
fn zero_hamiltonian_has_flat_spectrum() {
    let sd = diagonalize(&make_hubbard_dimer(0.0, 0.0, 0.5), true).unwrap();
    assert!(sd.eigenvalues.iter().all(|l| l.abs() < 1e-15));
}

#[test]
fn full_window_is_dipole_variance() {
    let (m, sd) = dimer();
    let d = dipole_matrix(&m, 0);
    let psi = sd.ground_state();
    let mean = (psi.adjoint() * &d * &psi)[(0, 0)];
    let second = (psi.adjoint() * &d * &d * &psi)[(0, 0)];
    let w = window_amplitude(&sd, 0, 0, 0.0, sd.max_excitation() + 1.0);
    assert!((w - (second - mean * mean.conj())).norm() < 1e-12);
}

#[test]
fn window_below_first_excitation_is_empty() {
    let (_, sd) = dimer();
    let first = sd.eigenvalues.iter().copied().find(|&l| l > 1e-9).unwrap();
    assert_eq!(window_amplitude(&sd, 0, 0, 0.0, 0.5 * first), zero());
}

#[test]
fn bright_window_is_product_of_transition_dipoles() {
    let (_, sd) = dimer();
    let b = sd.eigenvalues.iter().position(|&l| (l - BRIGHT).abs() < 1e-9).unwrap();
    let d = &sd.transition_dipoles[0];
    let w = window_amplitude(&sd, 0, 0, BRIGHT - 0.1, BRIGHT + 0.1);
    assert!((w - d[(0, b)] * d[(b, 0)]).norm() < 1e-14);
    assert!(w.norm() > 0.1);
}

#[test]
fn alpha1_matches_scripted_sum_over_states() {
    let m = make_random_model(3, 2, 2).unwrap();
    let sd = diagonalize(&m, true).unwrap();
    let gamma = 0.05;
    let grid: Vec<f64> = (0..50).map(|k| 0.1 * k as f64).collect();
    let r = alpha1(&sd, 0, 1, &grid, gamma).unwrap();
    let (di, dj) = (&sd.transition_dipoles[0], &sd.transition_dipoles[1]);
    for (w, v) in grid.iter().zip(&r.values) {
        let mut s = zero();
        for n in 1..sd.len() {
            let wn = sd.eigenvalues[n];
            s += di[(0, n)] * dj[(n, 0)] / Complex64::new(wn - w, -gamma);
            s += dj[(0, n)] * di[(n, 0)] / Complex64::new(wn + w, gamma);
        }
        assert!((s - v).norm() <= 1e-12 * (1.0 + s.norm()));
    }
}

#[test]
fn zero_dipole_gives_zero_response() {
    let sd = diagonalize(&make_hubbard_dimer(1.0, 2.0, 0.0), true).unwrap();
    let r = alpha1(&sd, 0, 0, &[0.0, 1.0, 4.0], 0.05).unwrap();
    assert!(r.values.iter().all(|v| *v == zero()));
    assert_eq!(alpha3(&sd, [0; 4], [0.1, 0.2, 0.3], 0.05).unwrap(), zero());
    assert!(chi1_time(&sd, 0, 0, &[0.5, 1.0], 0.05).iter().all(|v| *v == zero()));
}

#[test]
fn single_lorentzian_peak_and_half_width() {
    let (_, sd) = dimer();
    let gamma = 0.05;
    let grid: Vec<f64> = (0..=4000).map(|k| BRIGHT - 0.5 + k as f64 * 2.5e-4).collect();
    let im: Vec<f64> = alpha1(&sd, 0, 0, &grid, gamma).unwrap().values.iter().map(|v| v.im).collect();
    let (arg, peak) = im.iter().enumerate().fold((0, f64::MIN), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    assert!((grid[arg] - BRIGHT).abs() <= 5e-4);
    let at = |w: f64| alpha1(&sd, 0, 0, &[w], gamma).unwrap().values[0].im;
    assert!((at(BRIGHT + gamma) / peak - 0.5).abs() < 0.01);
    assert!((at(BRIGHT - gamma) / peak - 0.5).abs() < 0.01);
}

#[test]
fn time_domain_transform_reproduces_alpha1() {
    let (_, sd) = dimer();
    let gamma = 0.1;
    let ds = 2e-3;
    let s: Vec<f64> = (0..=200_000).map(|k| k as f64 * ds).collect();
    let chi = chi1_time(&sd, 0, 0, &s, gamma);
    let grid = [0.0, 1.0, 2.0, 3.0, 4.0, BRIGHT, 5.0, 6.0];
    let exact = alpha1(&sd, 0, 0, &grid, gamma).unwrap().values;
    let peak = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (w, e) in grid.iter().zip(&exact) {
        let mut acc = zero();
        for (k, (sk, c)) in s.iter().zip(&chi).enumerate() {
            let weight = if k == 0 || k == s.len() - 1 { 0.5 } else { 1.0 };
            acc += c * Complex64::new(0.0, w * sk).exp() * weight;
        }
        acc *= ds;
        assert!((acc - e).norm() <= 0.01 * peak, "w={w}: {acc} vs {e}");
    }
}

#[test]
fn kramers_kronig_static_limit() {
    let (_, sd) = dimer();
    let gamma = 0.05;
    let dw = 1e-3;
    let grid: Vec<f64> = (0..=400_000).map(|k| k as f64 * dw).collect();
    let r = alpha1(&sd, 0, 0, &grid, gamma).unwrap().values;
    let mut integral = 0.0;
    for k in 1..grid.len() {
        let f = |i: usize| if grid[i] == 0.0 { 0.0 } else { r[i].im / grid[i] };
        integral += 0.5 * (f(k - 1) + f(k)) * dw;
    }
    let predicted = 2.0 / std::f64::consts::PI * integral;
    assert!((predicted - r[0].re).abs() <= 0.02 * r[0].re.abs());
}

#[test]
fn alpha1_symmetric_for_real_models() {
    let sd = diagonalize(&make_random_model(3, 2, 6).unwrap(), true).unwrap();
    let grid = [0.0, 0.7, 1.9, 3.3];
    let xy = alpha1(&sd, 0, 1, &grid, 0.05).unwrap().values;
    let yx = alpha1(&sd, 1, 0, &grid, 0.05).unwrap().values;
    for (a, b) in xy.iter().zip(&yx) {
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn pathway_forms_agree() {
    let models = [make_hubbard_dimer(1.0, 2.0, 0.5), make_random_model(2, 2, 3).unwrap()];
    for m in &models {
        let sd = diagonalize(m, true).unwrap();
        for decay in [Decay::Uniform(0.1), Decay::Uniform(0.7)] {
            for nu in 1..=4 {
                for axes in [[0, 0, 0, 0], [0, 1, 2, 0], [2, 1, 0, 1]] {
                    let s = [0.3, 1.1, 0.7];
                    let a = r_pathway(&sd, nu, axes, s, &decay).unwrap();
                    let b = r_pathway_sos(&sd, nu, axes, s, &decay).unwrap();
                    assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
                }
            }
        }
    }
}

#[test]
fn uniform_decay_factors_out() {
    let (_, sd) = dimer();
    let s = [0.4, 0.9, 0.2];
    let slow = r_pathway(&sd, 1, [0; 4], s, &Decay::Uniform(1.0)).unwrap();
    let fast = r_pathway(&sd, 1, [0; 4], s, &Decay::Uniform(3.0)).unwrap();
    let expected = (-2.0 * (s[0] + s[1] + s[2])).exp();
    assert!((fast.norm() / slow.norm() - expected).abs() < 1e-12);
}

#[test]
fn first_pathway_matches_triple_loop() {
    let m = make_random_model(2, 2, 8).unwrap();
    let sd = diagonalize(&m, true).unwrap();
    let gamma = 0.05;
    let axes = [0, 1, 2, 0];
    let (w1, w2, w3) = (0.8, -0.3, 0.5);
    let got = r_pathway_freq(&sd, 1, axes, [w1 + w2 + w3, w1 + w2, w1], &Decay::Uniform(gamma)).unwrap();
    let d = &sd.transition_dipoles;
    let e = &sd.eigenvalues;
    let g = Complex64::new(0.0, gamma);
    let mut want = zero();
    // ket excited by the first field, bra by the second and third.
    for n in 0..sd.len() {
        for mm in 0..sd.len() {
            for l in 0..sd.len() {
                let num = d[axes[0]][(l, n)] * d[axes[1]][(mm, l)] * d[axes[2]][(0, mm)] * d[axes[3]][(n, 0)];
                let den = (e[n] - w1 - g) * (e[n] - e[mm] - w1 - w2 - g) * (e[n] - e[l] - w1 - w2 - w3 - g);
                want += num / den;
            }
        }
    }
    assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0));
}

#[test]
fn alpha3_presets_have_expected_sizes() {
    assert_eq!(alpha3_terms(Alpha3Preset::All).len(), 48);
    assert_eq!(alpha3_terms(Alpha3Preset::Eight).len(), 8);
    assert_eq!(alpha3_terms(Alpha3Preset::Two).len(), 2);
}

#[test]
fn nested_depth_one_is_window_amplitude() {
    let (_, sd) = dimer();
    for (a, b) in [(0.5, 2.5), (4.0, 5.0)] {
        let n = nested_window_amplitude(&sd, &[0, 0], &[(a, b)]).unwrap();
        assert!((n - window_amplitude(&sd, 0, 0, a, b)).norm() < 1e-14);
    }
    // A window holding zero also picks up the ground-state term.
    let d00 = sd.transition_dipoles[0][(0, 0)];
    let n = nested_window_amplitude(&sd, &[0, 0], &[(-0.5, 10.0)]).unwrap();
    assert!((n - window_amplitude(&sd, 0, 0, -0.5, 10.0) - d00 * d00).norm() < 1e-14);
    assert_eq!(nested_window_amplitude(&sd, &[0, 0], &[(1.0, 1.0)]).unwrap(), zero());
}

#[test]
fn nested_depth_two_matches_projector_sandwich() {
    let m = make_random_model(2, 2, 1).unwrap();
    let sd = diagonalize(&m, true).unwrap();
    let dips: Vec<_> = (0..3).map(|a| dipole_matrix(&m, a)).collect();
    let psi = sd.ground_state();
    let projector = |w: (f64, f64)| {
        let mut p = DMatrix::<Complex64>::zeros(psi.len(), psi.len());
        for j in 0..sd.len() {
            if w.0 <= sd.eigenvalues[j] && sd.eigenvalues[j] < w.1 {
                let v: DVector<Complex64> = sd.eigenvectors.column(j).into_owned();
                p += &v * v.adjoint();
            }
        }
        p
    };
    let top = sd.max_excitation() + 1.0;
    for (w1, w2) in [((-0.1, top), (-0.1, top)), ((0.1, 0.5 * top), (-0.1, 0.1)), ((0.3, top), (0.2, top))] {
        let axes = [0, 1, 2];
        let got = nested_window_amplitude(&sd, &axes, &[w1, w2]).unwrap();
        let want = (psi.adjoint() * &dips[2] * projector(w2) * &dips[1] * projector(w1) * &dips[0] * &psi)[(0, 0)];
        assert!((got - want).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn windows_partitioning_the_spectrum_add_up(cuts in prop::collection::vec(0.0f64..1.0, 0..6)) {
        let (_, sd) = dimer();
        let top = sd.max_excitation() + 1.0;
        let mut edges: Vec<f64> = cuts.iter().map(|c| c * top).collect();
        edges.push(0.0);
        edges.push(top);
        edges.sort_by(f64::total_cmp);
        let total = window_amplitude(&sd, 0, 0, 0.0, top);
        let parts: Complex64 = edges.windows(2).map(|e| window_amplitude(&sd, 0, 0, e[0], e[1])).sum();
        prop_assert!((total - parts).norm() < 1e-10);
    }
}
