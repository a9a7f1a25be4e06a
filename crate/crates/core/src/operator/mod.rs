//! Fermionic operators, the Jordan-Wigner map to Pauli sums, and dense realisations.
//!
//! Conventions: mode `p` maps to qubit `p`; occupation of mode `p` is bit `p`
//! of a basis index; `a_p = Z_0 ... Z_{p-1} (X_p + iY_p)/2`.
//! The two-body term is `sum V[p,q,r,s] a_p^dag a_q^dag a_r a_s` exactly as
//! indexed, with no factor of one half. `V[p,q,r,s]` is the integral in which
//! orbitals `p,s` share the first electron coordinate and `q,r` the second.

mod dense;
mod fermion;
mod pauli;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::{DEFAULT_QUBIT_CAP, INTEGRAL_SYMMETRY};

pub use dense::{complexify, hermitian_deviation, hermitian_eigen, spectral_norm, DenseOperator};
pub use fermion::{FermionOperator, FermionTerm, Ladder};
pub use pauli::{PauliOperator, PauliString};

/// Dense rank-4 real tensor, row-major in `(p, q, r, s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor4 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    #[inline]
    fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.idx(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let i = self.idx(p, q, r, s);
        self.data[i] = v;
    }

    /// Writes `v` at `(p,q,r,s)` and all of its real-orbital symmetry images.
    pub fn set_symmetric(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in symmetry_images(p, q, r, s) {
            self.set(a, b, c, d, v);
        }
    }

    /// Largest violation of the eightfold symmetry.
    pub fn symmetry_violation(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.get(p, q, r, s);
                        for (a, b, c, d) in symmetry_images(p, q, r, s) {
                            worst = worst.max((v - self.get(a, b, c, d)).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }
}

/// The eight index tuples related by the real-orbital integral symmetries:
/// `p<->s`, `q<->r`, and exchanging the two electron coordinates.
pub fn symmetry_images(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    let base = [(p, q, r, s), (q, p, s, r)];
    let mut out = [(0, 0, 0, 0); 8];
    let mut k = 0;
    for (a, b, c, d) in base {
        for (a2, d2) in [(a, d), (d, a)] {
            for (b2, c2) in [(b, c), (c, b)] {
                out[k] = (a2, b2, c2, d2);
                k += 1;
            }
        }
    }
    out
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::input(format!("{what} must be square")));
    }
    let dev = (m - m.transpose()).abs().max();
    if dev > INTEGRAL_SYMMETRY {
        return Err(Error::input(format!("{what} is not symmetric (deviation {dev:e})")));
    }
    Ok(())
}

/// `sum T[p,q] a_p^dag a_q + sum V[p,q,r,s] a_p^dag a_q^dag a_r a_s`.
pub fn build_hamiltonian(t: &DMatrix<f64>, v: &Tensor4) -> Result<FermionOperator> {
    check_symmetric(t, "one-body matrix")?;
    let n = t.nrows();
    if v.n != n {
        return Err(Error::input(format!(
            "two-body tensor has dimension {} but one-body matrix has {n}",
            v.n
        )));
    }
    let viol = v.symmetry_violation();
    if viol > INTEGRAL_SYMMETRY {
        return Err(Error::input(format!(
            "two-body tensor violates eightfold symmetry by {viol:e}"
        )));
    }
    let mut h = FermionOperator::zero(n);
    for p in 0..n {
        for q in 0..n {
            if t[(p, q)] != 0.0 {
                h.add_term(t[(p, q)], vec![(p, true), (q, false)])?;
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let x = v.get(p, q, r, s);
                    if x != 0.0 {
                        h.add_term(x, vec![(p, true), (q, true), (r, false), (s, false)])?;
                    }
                }
            }
        }
    }
    Ok(h)
}

/// `sum d[p,q] a_p^dag a_q` for one Cartesian axis.
pub fn build_dipole(d: &DMatrix<f64>) -> Result<FermionOperator> {
    check_symmetric(d, "dipole matrix")?;
    let n = d.nrows();
    let mut op = FermionOperator::zero(n);
    for p in 0..n {
        for q in 0..n {
            if d[(p, q)] != 0.0 {
                op.add_term(d[(p, q)], vec![(p, true), (q, false)])?;
            }
        }
    }
    Ok(op)
}

fn ladder_pauli(n_qubits: usize, p: usize, dagger: bool) -> PauliOperator {
    let z_string = (1u64 << p) - 1;
    let bit = 1u64 << p;
    let mut op = PauliOperator::zero(n_qubits);
    op.add(PauliString { x: bit, z: z_string }, Complex64::new(0.5, 0.0));
    let y_sign = if dagger { -0.5 } else { 0.5 };
    op.add(PauliString { x: bit, z: z_string | bit }, Complex64::new(0.0, y_sign));
    op
}

/// Jordan-Wigner image with the default qubit cap.
pub fn jordan_wigner(op: &FermionOperator) -> Result<PauliOperator> {
    jordan_wigner_capped(op, DEFAULT_QUBIT_CAP)
}

pub fn jordan_wigner_capped(op: &FermionOperator, qubit_cap: usize) -> Result<PauliOperator> {
    let n = op.n_modes;
    if n > qubit_cap || n > 63 {
        return Err(Error::resource(format!(
            "{n} modes exceed the qubit cap of {qubit_cap}"
        )));
    }
    let mut out = PauliOperator::zero(n);
    for term in &op.terms {
        let mut prod = PauliOperator::identity(n).scale(term.coeff);
        for &(p, dagger) in &term.ops {
            prod = prod.mul(&ladder_pauli(n, p, dagger));
        }
        for (s, c) in prod.terms {
            out.add(s, c);
        }
    }
    out.prune();
    Ok(out)
}

/// Dense matrix of a Pauli sum, refusing sizes beyond `qubit_cap`.
pub fn dense_capped(p: &PauliOperator, hermitian: bool, qubit_cap: usize) -> Result<DenseOperator> {
    if p.n_qubits > qubit_cap {
        return Err(Error::resource(format!(
            "{} qubits exceed the dense cap of {qubit_cap}",
            p.n_qubits
        )));
    }
    DenseOperator::new(p.to_matrix(), hermitian)
}

pub fn dense(p: &PauliOperator, hermitian: bool) -> Result<DenseOperator> {
    dense_capped(p, hermitian, DEFAULT_QUBIT_CAP)
}

/// LCU subnormalisation: sum of |c_j|.
pub fn lcu_one_norm(p: &PauliOperator) -> f64 {
    p.one_norm()
}

/// Sum of the `eta` largest |eigenvalues| of a real symmetric one-body matrix.
pub fn eta_dipole_norm(d: &DMatrix<f64>, eta: usize) -> Result<f64> {
    check_symmetric(d, "dipole matrix")?;
    if eta == 0 || eta > d.nrows() {
        return Err(Error::input(format!(
            "eta must lie in 1..={}, got {eta}",
            d.nrows()
        )));
    }
    let eig = d.clone().symmetric_eigen();
    let mut mags: Vec<f64> = eig.eigenvalues.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags.iter().take(eta).sum())
}

/// Total particle-number operator on `n` modes.
pub fn number_operator(n: usize) -> FermionOperator {
    let mut op = FermionOperator::zero(n);
    for p in 0..n {
        op.add_term(1.0, vec![(p, true), (p, false)]).expect("in range");
    }
    op
}
