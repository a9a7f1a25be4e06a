//! Dense complex matrices with a Hermitian flag.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::HERMITIAN;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<Complex64>,
    pub hermitian: bool,
}

impl DenseOperator {
    /// Wraps `matrix`; a `hermitian` flag is validated to `HERMITIAN`.
    pub fn new(matrix: DMatrix<Complex64>, hermitian: bool) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::input("dense operator must be square"));
        }
        if hermitian {
            let dev = hermitian_deviation(&matrix);
            if dev > HERMITIAN {
                return Err(Error::input(format!(
                    "matrix flagged Hermitian deviates by {dev:e}"
                )));
            }
        }
        Ok(Self { matrix, hermitian })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim), hermitian: true }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: DMatrix::zeros(dim, dim), hermitian: true }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.matrix, self.hermitian)
    }

    /// Ascending eigenvalues and matching eigenvector columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        if !self.hermitian {
            return Err(Error::input("eigh requires a Hermitian operator"));
        }
        Ok(hermitian_eigen(&self.matrix))
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * v
    }
}

pub fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn spectral_norm(m: &DMatrix<Complex64>, hermitian: bool) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if hermitian {
        let (vals, _) = hermitian_eigen(m);
        vals.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    } else {
        m.clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(0.0, |a: f64, v| a.max(*v))
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    // Symmetrise first so rounding noise in the lower triangle is irrelevant.
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Converts a real matrix to complex.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}
