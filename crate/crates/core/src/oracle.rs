//! Exact sum-over-states reference built from a dense eigendecomposition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::operator::{dense, hermitian_eigen, jordan_wigner};
use crate::tolerances::GROUND_DEGENERACY;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigensystem with the ground state shifted to zero energy.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Ascending excitation energies; entry 0 is exactly zero.
    pub eigenvalues: Vec<f64>,
    /// Unshifted ground energy (including the model's scalar shift).
    pub ground_energy: f64,
    /// Eigenvectors as columns in the full occupation basis.
    pub eigenvectors: DMatrix<Complex64>,
    /// `d[i][(m, n)] = <m|d_i|n>` per Cartesian axis.
    pub transition_dipoles: [DMatrix<Complex64>; 3],
    /// Particle number of the retained sector, if restricted.
    pub sector: Option<usize>,
    pub degenerate_ground: bool,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn omega(&self, m: usize, n: usize) -> f64 {
        self.eigenvalues[m] - self.eigenvalues[n]
    }

    pub fn max_excitation(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn ground_state(&self) -> DVector<Complex64> {
        self.eigenvectors.column(0).into_owned()
    }
}

/// Per-pair dephasing rates; uniform by default.
#[derive(Clone, Debug)]
pub enum Decay {
    Uniform(f64),
    /// `rates[(m, n)]` is the decay of the coherence `|m><n|`.
    PerPair(DMatrix<f64>),
}

impl Decay {
    #[inline]
    pub fn rate(&self, m: usize, n: usize) -> f64 {
        match self {
            Decay::Uniform(g) => *g,
            Decay::PerPair(r) => r[(m, n)],
        }
    }

    fn require_positive(&self) -> Result<()> {
        let ok = match self {
            Decay::Uniform(g) => *g > 0.0,
            Decay::PerPair(r) => r.iter().all(|&g| g > 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input("broadening must be positive"))
        }
    }
}

/// Values of an n-th order susceptibility on a frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityResult {
    pub order: usize,
    /// One entry per grid point; each holds the order-many frequency arguments.
    pub frequencies: Vec<Vec<f64>>,
    pub values: Vec<Complex64>,
    pub gamma: f64,
    /// Output axis first, then input axes from last to first interaction.
    pub axes: Vec<usize>,
}

/// Diagonalises the model Hamiltonian through its qubit representation.
///
/// With `fix_sector` the eigensystem is restricted to the model's particle
/// number; otherwise the whole Fock space is used.
pub fn diagonalize(model: &ModelSpec, fix_sector: bool) -> Result<SpectralData> {
    let h = dense(&jordan_wigner(&model.hamiltonian()?)?, true)?.matrix;
    let dips: Vec<DMatrix<Complex64>> = (0..3)
        .map(|a| Ok(dense(&jordan_wigner(&model.dipole_operator(a)?)?, true)?.matrix))
        .collect::<Result<_>>()?;
    let dim = h.nrows();
    let basis: Vec<usize> = if fix_sector {
        (0..dim)
            .filter(|b| b.count_ones() as usize == model.n_electrons)
            .collect()
    } else {
        (0..dim).collect()
    };
    let k = basis.len();
    let sub = DMatrix::from_fn(k, k, |r, c| h[(basis[r], basis[c])]);
    let (vals, vecs) = hermitian_eigen(&sub);
    let mut full = DMatrix::zeros(dim, k);
    for (r, &b) in basis.iter().enumerate() {
        for c in 0..k {
            full[(b, c)] = vecs[(r, c)];
        }
    }
    let e0 = vals[0];
    let degenerate = vals.len() > 1 && (vals[1] - e0).abs() <= GROUND_DEGENERACY;
    let shifted: Vec<f64> = vals.iter().map(|v| v - e0).collect();
    let adj = full.adjoint();
    let td = |d: &DMatrix<Complex64>| &adj * d * &full;
    Ok(SpectralData {
        eigenvalues: shifted,
        ground_energy: e0,
        transition_dipoles: [td(&dips[0]), td(&dips[1]), td(&dips[2])],
        eigenvectors: full,
        sector: fix_sector.then_some(model.n_electrons),
        degenerate_ground: degenerate,
    })
}

#[inline]
fn in_window(w: f64, a: f64, b: f64) -> bool {
    a <= w && w < b
}

/// `sum_{j != 0, a <= w_j0 < b} d_out[0,j] d_in[j,0]`.
pub fn window_amplitude(sd: &SpectralData, axis_in: usize, axis_out: usize, a: f64, b: f64) -> Complex64 {
    let din = &sd.transition_dipoles[axis_in];
    let dout = &sd.transition_dipoles[axis_out];
    (1..sd.len())
        .filter(|&j| in_window(sd.eigenvalues[j], a, b))
        .map(|j| dout[(0, j)] * din[(j, 0)])
        .sum()
}

/// `<0| D_k P_k ... D_1 P_1 D_0 |0>` where `axes[0]` acts first and `P_i`
/// projects on eigenstates with excitation energy in `windows[i-1]`.
/// The ground state counts as a member of any window containing zero.
pub fn nested_window_amplitude(sd: &SpectralData, axes: &[usize], windows: &[(f64, f64)]) -> Result<Complex64> {
    if axes.len() != windows.len() + 1 {
        return Err(Error::input("nested amplitude needs one more axis than windows"));
    }
    let mut v: DVector<Complex64> = sd.transition_dipoles[axes[0]].column(0).into_owned();
    for (w, &ax) in windows.iter().zip(&axes[1..]) {
        for j in 0..sd.len() {
            if !in_window(sd.eigenvalues[j], w.0, w.1) {
                v[j] = Complex64::new(0.0, 0.0);
            }
        }
        v = &sd.transition_dipoles[ax] * v;
    }
    Ok(v[0])
}

/// Linear polarizability with uniform broadening.
pub fn alpha1(sd: &SpectralData, i: usize, j: usize, grid: &[f64], gamma: f64) -> Result<SusceptibilityResult> {
    alpha1_with_decay(sd, i, j, grid, &Decay::Uniform(gamma))
}

pub fn alpha1_with_decay(
    sd: &SpectralData,
    i: usize,
    j: usize,
    grid: &[f64],
    decay: &Decay,
) -> Result<SusceptibilityResult> {
    decay.require_positive()?;
    let di = &sd.transition_dipoles[i];
    let dj = &sd.transition_dipoles[j];
    let values = grid
        .iter()
        .map(|&w| {
            (1..sd.len())
                .map(|n| {
                    let g = decay.rate(n, 0);
                    let wn = sd.eigenvalues[n];
                    let fwd = di[(0, n)] * dj[(n, 0)] / Complex64::new(wn - w, -g);
                    let bwd = (di[(0, n)] * dj[(n, 0)] / Complex64::new(wn + w, -g)).conj();
                    fwd + bwd
                })
                .sum()
        })
        .collect();
    Ok(SusceptibilityResult {
        order: 1,
        frequencies: grid.iter().map(|&w| vec![w]).collect(),
        values,
        gamma: match decay {
            Decay::Uniform(g) => *g,
            Decay::PerPair(r) => r[(1.min(sd.len() - 1), 0)],
        },
        axes: vec![i, j],
    })
}

/// Time-domain linear response; zero for negative times.
pub fn chi1_time(sd: &SpectralData, i: usize, j: usize, s_grid: &[f64], gamma: f64) -> Vec<Complex64> {
    let di = &sd.transition_dipoles[i];
    let dj = &sd.transition_dipoles[j];
    s_grid
        .iter()
        .map(|&s| {
            if s < 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let z: Complex64 = (1..sd.len())
                .map(|n| I * di[(0, n)] * dj[(n, 0)] * (Complex64::new(-gamma, -sd.eigenvalues[n]) * s).exp())
                .sum();
            z + z.conj()
        })
        .collect()
}

/// Which side each interaction acts on, listed for `(i1, i2, i3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub fn pathway_sides(nu: usize) -> Result<[Side; 3]> {
    use Side::*;
    match nu {
        1 => Ok([Left, Right, Right]),
        2 => Ok([Right, Left, Right]),
        3 => Ok([Right, Right, Left]),
        4 => Ok([Left, Left, Left]),
        _ => Err(Error::input(format!("pathway index must be 1..=4, got {nu}"))),
    }
}

fn interact(d: &DMatrix<Complex64>, x: &DMatrix<Complex64>, side: Side) -> DMatrix<Complex64> {
    match side {
        Side::Left => d * x,
        Side::Right => x * d,
    }
}

/// Axes are ordered `(i, i3, i2, i1)`: detection axis first.
pub type Axes4 = [usize; 4];

/// Third-order correlation function `R_nu(s3, s2, s1)` by superoperator algebra.
pub fn r_pathway(sd: &SpectralData, nu: usize, axes: Axes4, s: [f64; 3], decay: &Decay) -> Result<Complex64> {
    let sides = pathway_sides(nu)?;
    let [s3, s2, s1] = s;
    if s1 < 0.0 || s2 < 0.0 || s3 < 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let d = &sd.transition_dipoles;
    let n = sd.len();
    let green = |x: &mut DMatrix<Complex64>, t: f64| {
        for a in 0..n {
            for b in 0..n {
                x[(a, b)] *= (Complex64::new(-decay.rate(a, b), -sd.omega(a, b)) * t).exp();
            }
        }
    };
    let mut x = DMatrix::zeros(n, n);
    x[(0, 0)] = Complex64::new(1.0, 0.0);
    let times = [s1, s2, s3];
    let ins = [axes[3], axes[2], axes[1]];
    for k in 0..3 {
        x = interact(&d[ins[k]], &x, sides[k]);
        green(&mut x, times[k]);
    }
    Ok((&d[axes[0]] * x).trace())
}

/// Same correlation function as [`r_pathway`], by explicit index loops that
/// track the ket and bra labels of the density matrix.
pub fn r_pathway_sos(sd: &SpectralData, nu: usize, axes: Axes4, s: [f64; 3], decay: &Decay) -> Result<Complex64> {
    let sides = pathway_sides(nu)?;
    let [s3, s2, s1] = s;
    if s1 < 0.0 || s2 < 0.0 || s3 < 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let d = &sd.transition_dipoles;
    let n = sd.len();
    let times = [s1, s2, s3];
    let ins = [axes[3], axes[2], axes[1]];
    let mut total = Complex64::new(0.0, 0.0);
    for x1 in 0..n {
        for x2 in 0..n {
            for x3 in 0..n {
                let picks = [x1, x2, x3];
                let (mut ket, mut bra) = (0usize, 0usize);
                let mut amp = Complex64::new(1.0, 0.0);
                for k in 0..3 {
                    let new = picks[k];
                    match sides[k] {
                        Side::Left => {
                            amp *= d[ins[k]][(new, ket)];
                            ket = new;
                        }
                        Side::Right => {
                            amp *= d[ins[k]][(bra, new)];
                            bra = new;
                        }
                    }
                    amp *= (Complex64::new(-decay.rate(ket, bra), -sd.omega(ket, bra)) * times[k]).exp();
                }
                total += amp * d[axes[0]][(bra, ket)];
            }
        }
    }
    Ok(total)
}

/// Frequency-domain `i^3 R_nu` at cumulative frequencies `(W3, W2, W1)`.
pub fn r_pathway_freq(sd: &SpectralData, nu: usize, axes: Axes4, w: [f64; 3], decay: &Decay) -> Result<Complex64> {
    let sides = pathway_sides(nu)?;
    let d = &sd.transition_dipoles;
    let n = sd.len();
    let freqs = [w[2], w[1], w[0]];
    let ins = [axes[3], axes[2], axes[1]];
    let mut x = DMatrix::zeros(n, n);
    x[(0, 0)] = Complex64::new(1.0, 0.0);
    for k in 0..3 {
        x = interact(&d[ins[k]], &x, sides[k]);
        for a in 0..n {
            for b in 0..n {
                // Fourier transform of the retarded propagator, times i per interaction.
                x[(a, b)] /= Complex64::new(sd.omega(a, b) - freqs[k], -decay.rate(a, b));
            }
        }
    }
    Ok((&d[axes[0]] * x).trace())
}

/// Subsets of the 48 third-order terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alpha3Preset {
    /// All 3! orderings, four pathways, plus the conjugate block.
    All,
    /// Identity ordering only: four pathways and their conjugates.
    Eight,
    /// Pathway 1 and its conjugate at the identity ordering.
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alpha3Term {
    /// `perm[k]` is the index (0-based, into `(w1, w2, w3)`) placed in slot k.
    pub perm: [usize; 3],
    pub pathway: usize,
    pub conjugate: bool,
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn alpha3_terms(preset: Alpha3Preset) -> Vec<Alpha3Term> {
    let perms: &[[usize; 3]] = match preset {
        Alpha3Preset::All => &PERMS,
        _ => &PERMS[..1],
    };
    let pathways: &[usize] = match preset {
        Alpha3Preset::Two => &[1],
        _ => &[1, 2, 3, 4],
    };
    let mut out = Vec::new();
    for conjugate in [false, true] {
        for &perm in perms {
            for &pathway in pathways {
                out.push(Alpha3Term { perm, pathway, conjugate });
            }
        }
    }
    out
}

/// Third-order susceptibility at one frequency triple `(w3, w2, w1)`.
/// Axes are `(i, i3, i2, i1)`.
pub fn alpha3(sd: &SpectralData, axes: Axes4, w: [f64; 3], gamma: f64) -> Result<Complex64> {
    alpha3_with(sd, axes, w, &Decay::Uniform(gamma), Alpha3Preset::All)
}

pub fn alpha3_with(
    sd: &SpectralData,
    axes: Axes4,
    w: [f64; 3],
    decay: &Decay,
    preset: Alpha3Preset,
) -> Result<Complex64> {
    decay.require_positive()?;
    let terms = alpha3_terms(preset);
    let n_perm = if preset == Alpha3Preset::All { 6.0 } else { 1.0 };
    // Inputs indexed as (w1, w2, w3) with matching axes (i1, i2, i3).
    let freqs = [w[2], w[1], w[0]];
    let in_axes = [axes[3], axes[2], axes[1]];
    let mut total = Complex64::new(0.0, 0.0);
    for t in terms {
        let sign = if t.conjugate { -1.0 } else { 1.0 };
        let f = |k: usize| sign * freqs[t.perm[k]];
        let cum = [f(0) + f(1) + f(2), f(0) + f(1), f(0)];
        let ax = [axes[0], in_axes[t.perm[2]], in_axes[t.perm[1]], in_axes[t.perm[0]]];
        let v = r_pathway_freq(sd, t.pathway, ax, cum, decay)?;
        total += if t.conjugate { v.conj() } else { v };
    }
    Ok(total / n_perm)
}
