//! Fixtures shared by the benchmarks.

use respsim_core::estimation::SimSystem;
use respsim_core::operator::{DenseOperator, FermionOperator};
use respsim_core::{make_hubbard_dimer, make_random_model, Complex64, ModelSpec, Result};

pub fn dimer() -> ModelSpec {
    make_hubbard_dimer(1.0, 2.0, 0.5)
}

pub fn dimer_system() -> Result<SimSystem> {
    SimSystem::from_model(&dimer())
}

/// Hamiltonian of a seeded random model with `n` orbitals at half filling.
pub fn random_hamiltonian(n: usize) -> Result<FermionOperator> {
    make_random_model(n, n, 1)?.hamiltonian()
}

/// Diagonal operator with evenly spaced eigenvalues in `(-1, 1)`.
pub fn spread_diagonal(dim: usize) -> Result<DenseOperator> {
    let diag = (0..dim).map(|k| Complex64::new(-0.95 + 1.9 * k as f64 / (dim - 1) as f64, 0.0));
    let m = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, diag));
    DenseOperator::new(m, true)
}
