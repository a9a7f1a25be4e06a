//! Pauli strings and sparse Pauli sums.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::PAULI_PRUNE;

/// Symplectic Pauli word: qubit q carries X if bit q of `x` is set and Z if bit
/// q of `z` is set; both set means Y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn single(q: usize, letter: char) -> Result<Self> {
        let bit = 1u64 << q;
        match letter {
            'I' => Ok(Self::IDENTITY),
            'X' => Ok(Self { x: bit, z: 0 }),
            'Y' => Ok(Self { x: bit, z: bit }),
            'Z' => Ok(Self { x: 0, z: bit }),
            other => Err(Error::input(format!("unknown Pauli letter {other:?}"))),
        }
    }

    /// Parses words such as `"X0 Y1 Z3"`; `"I"` or `""` is the identity.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Self::IDENTITY;
        for tok in s.split_whitespace() {
            let mut chars = tok.chars();
            let letter = chars.next().unwrap_or('I');
            let rest: String = chars.collect();
            if letter == 'I' && rest.is_empty() {
                continue;
            }
            let q: usize = rest
                .parse()
                .map_err(|_| Error::input(format!("bad Pauli token {tok:?}")))?;
            let (p, _) = out.mul(&Self::single(q, letter)?);
            out = p;
        }
        Ok(out)
    }

    pub fn letter(&self, q: usize) -> char {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// `self * other = i^k * result`; returns `(result, k mod 4)`.
    pub fn mul(&self, other: &Self) -> (Self, u8) {
        let mut k: u32 = 0;
        let support = self.x | self.z | other.x | other.z;
        let mut rest = support;
        while rest != 0 {
            let q = rest.trailing_zeros();
            rest &= rest - 1;
            let a = letter_index(self.x >> q & 1, self.z >> q & 1);
            let b = letter_index(other.x >> q & 1, other.z >> q & 1);
            k += PRODUCT_PHASE[a][b] as u32;
        }
        (Self { x: self.x ^ other.x, z: self.z ^ other.z }, (k % 4) as u8)
    }

    /// Matrix action on a computational basis state: returns `(image, amplitude)`.
    pub fn apply_basis(&self, b: usize) -> (usize, Complex64) {
        let y_count = (self.x & self.z).count_ones();
        let mut amp = I_POW[(y_count % 4) as usize];
        if (self.z & b as u64).count_ones() % 2 == 1 {
            amp = -amp;
        }
        (b ^ self.x as usize, amp)
    }
}

// Letter order: I, X, Y, Z. Entry = power of i in the single-qubit product.
const PRODUCT_PHASE: [[u8; 4]; 4] = [
    [0, 0, 0, 0],
    [0, 0, 1, 3], // X*Y = iZ, X*Z = -iY
    [0, 3, 0, 1], // Y*X = -iZ, Y*Z = iX
    [0, 1, 3, 0], // Z*X = iY, Z*Y = -iX
];

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

fn letter_index(x: u64, z: u64) -> usize {
    match (x, z) {
        (0, 0) => 0,
        (1, 0) => 1,
        (1, 1) => 2,
        _ => 3,
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let support = self.x | self.z;
        if support == 0 {
            return write!(f, "I");
        }
        let mut first = true;
        for q in 0..64 {
            if support >> q & 1 == 1 {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{}{}", self.letter(q), q)?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Sparse sum `sum_j c_j P_j` on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOperator {
    pub terms: BTreeMap<PauliString, Complex64>,
    pub n_qubits: usize,
}

impl PauliOperator {
    pub fn zero(n_qubits: usize) -> Self {
        Self { terms: BTreeMap::new(), n_qubits }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut p = Self::zero(n_qubits);
        p.add(PauliString::IDENTITY, Complex64::new(1.0, 0.0));
        p
    }

    /// Builds from `(word, coefficient)` pairs, e.g. `[("Z0", 1.0.into())]`.
    pub fn from_terms(n_qubits: usize, terms: &[(&str, Complex64)]) -> Result<Self> {
        let mut p = Self::zero(n_qubits);
        for (w, c) in terms {
            p.add(PauliString::parse(w)?, *c);
        }
        p.prune();
        Ok(p)
    }

    pub fn add(&mut self, s: PauliString, c: Complex64) {
        *self.terms.entry(s).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PAULI_PRUNE);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.n_qubits = self.n_qubits.max(other.n_qubits);
        for (s, c) in &other.terms {
            out.add(*s, *c);
        }
        out.prune();
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.prune();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n_qubits.max(other.n_qubits));
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (p, k) = a.mul(b);
                out.add(p, ca * cb * I_POW[k as usize]);
            }
        }
        out.prune();
        out
    }

    /// Sum of |c_j|.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// All coefficients real up to `tol` (Hermitian Pauli sum).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (s, c) in &self.terms {
            for col in 0..dim {
                let (row, amp) = s.apply_basis(col);
                m[(row, col)] += c * amp;
            }
        }
        m
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i) {}", c.re, c.im, s)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn single_qubit_products() {
        let x = PauliString::parse("X0").unwrap();
        let y = PauliString::parse("Y0").unwrap();
        let z = PauliString::parse("Z0").unwrap();
        assert_eq!(x.mul(&y), (z, 1));
        assert_eq!(y.mul(&x), (z, 3));
        assert_eq!(y.mul(&z), (x, 1));
        assert_eq!(z.mul(&x), (y, 1));
        assert_eq!(x.mul(&x), (PauliString::IDENTITY, 0));
    }

    #[test]
    fn product_matches_matrix_product() {
        let a = PauliOperator::from_terms(3, &[("X0 Y2", r(0.3)), ("Z1", r(-1.1))]).unwrap();
        let b = PauliOperator::from_terms(3, &[("Y0 Z2", r(0.5)), ("X1 X2", Complex64::new(0.0, 0.4))])
            .unwrap();
        let lhs = a.mul(&b).to_matrix();
        let rhs = a.to_matrix() * b.to_matrix();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn y_matrix_convention() {
        let y = PauliOperator::from_terms(1, &[("Y0", r(1.0))]).unwrap().to_matrix();
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn display_and_parse_roundtrip() {
        let s = PauliString::parse("X0 Z2 Y5").unwrap();
        assert_eq!(s.to_string(), "X0 Z2 Y5");
        assert_eq!(PauliString::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn one_norm_examples() {
        let p = PauliOperator::from_terms(2, &[("Z0", r(1.0)), ("X1", r(-0.5))]).unwrap();
        assert_eq!(p.one_norm(), 1.5);
        assert_eq!(PauliOperator::zero(3).one_norm(), 0.0);
    }

    #[test]
    fn pruning_drops_cancelled_terms() {
        let p = PauliOperator::from_terms(1, &[("Z0", r(1.0)), ("Z0", r(-1.0))]).unwrap();
        assert!(p.is_empty());
    }
}
