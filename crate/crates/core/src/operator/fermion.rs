//! Second-quantized fermionic operators.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::FERMION_PRUNE;

/// A single ladder operator: `(mode, dagger)`; `dagger == true` is a creator.
pub type Ladder = (usize, bool);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FermionTerm {
    pub coeff: Complex64,
    /// Applied right to left, as written.
    pub ops: Vec<Ladder>,
}

/// Sum of products of ladder operators on `n_modes` spin-orbitals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FermionOperator {
    pub terms: Vec<FermionTerm>,
    pub n_modes: usize,
}

impl FermionOperator {
    pub fn zero(n_modes: usize) -> Self {
        Self { terms: Vec::new(), n_modes }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, coeff: impl Into<Complex64>, ops: Vec<Ladder>) -> Result<()> {
        if let Some(&(p, _)) = ops.iter().find(|(p, _)| *p >= self.n_modes) {
            return Err(Error::input(format!(
                "mode index {p} out of range for {} modes",
                self.n_modes
            )));
        }
        self.terms.push(FermionTerm { coeff: coeff.into(), ops });
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| FermionTerm {
                coeff: t.coeff.conj(),
                ops: t.ops.iter().rev().map(|&(p, d)| (p, !d)).collect(),
            })
            .collect();
        Self { terms, n_modes: self.n_modes }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= s;
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.n_modes = self.n_modes.max(other.n_modes);
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    /// Canonical form: creators left of annihilators, each group in ascending
    /// mode order, like terms merged, numerically zero terms dropped.
    pub fn normal_ordered(&self) -> Self {
        let mut acc: BTreeMap<Vec<Ladder>, Complex64> = BTreeMap::new();
        let mut stack: Vec<(Complex64, Vec<Ladder>)> =
            self.terms.iter().map(|t| (t.coeff, t.ops.clone())).collect();
        while let Some((c, ops)) = stack.pop() {
            match first_disorder(&ops) {
                None => *acc.entry(ops).or_insert(Complex64::new(0.0, 0.0)) += c,
                Some(i) => {
                    let (a, b) = (ops[i], ops[i + 1]);
                    if a.0 == b.0 && a.1 == b.1 {
                        // a_p a_p = 0 and a_p^dag a_p^dag = 0
                        continue;
                    }
                    let mut swapped = ops.clone();
                    swapped.swap(i, i + 1);
                    stack.push((-c, swapped));
                    if !a.1 && b.1 && a.0 == b.0 {
                        let mut contracted = ops.clone();
                        contracted.drain(i..i + 2);
                        stack.push((c, contracted));
                    }
                }
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() > FERMION_PRUNE)
            .map(|(ops, coeff)| FermionTerm { coeff, ops })
            .collect();
        Self { terms, n_modes: self.n_modes }
    }

    /// True when the canonical forms of the operator and its adjoint agree.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let a = self.normal_ordered();
        let b = self.adjoint().normal_ordered();
        let mut map: BTreeMap<&Vec<Ladder>, Complex64> = BTreeMap::new();
        for t in &a.terms {
            *map.entry(&t.ops).or_default() += t.coeff;
        }
        for t in &b.terms {
            *map.entry(&t.ops).or_default() -= t.coeff;
        }
        map.values().all(|c| c.norm() <= tol)
    }

    /// Direct Fock-space matrix in the occupation basis (bit p = occupation of mode p).
    pub fn to_fock_matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_modes;
        let mut m = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            for col in 0..dim {
                if let Some((row, sign)) = apply_ladders(&t.ops, col) {
                    m[(row, col)] += t.coeff * sign;
                }
            }
        }
        m
    }
}

fn order_key(l: Ladder) -> (u8, usize) {
    (if l.1 { 0 } else { 1 }, l.0)
}

fn first_disorder(ops: &[Ladder]) -> Option<usize> {
    (0..ops.len().saturating_sub(1)).find(|&i| order_key(ops[i]) >= order_key(ops[i + 1]))
}

fn apply_ladders(ops: &[Ladder], state: usize) -> Option<(usize, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for &(p, dagger) in ops.iter().rev() {
        let bit = 1usize << p;
        let occupied = s & bit != 0;
        if occupied == dagger {
            return None;
        }
        if (s & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        s ^= bit;
    }
    Some((s, sign))
}
