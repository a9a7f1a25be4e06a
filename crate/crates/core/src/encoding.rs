//! Block encodings as (operator, subnormalisation, ancilla count) triples and
//! chains of them with a polynomial filter in the middle.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{apply_filter_vector, ChebyshevFilter};
use crate::operator::{dense, hermitian_eigen, lcu_one_norm, DenseOperator, PauliOperator};
use crate::tolerances::{HERMITIAN, NORM_SLACK};

/// Above this dimension filters are applied by recurrence instead of through
/// a cached eigendecomposition.
pub const SPECTRAL_CACHE_MAX_DIM: usize = 1024;

#[derive(Clone, Debug)]
pub struct BlockEncoding {
    pub op: DenseOperator,
    pub subnorm: f64,
    pub ancillas: usize,
    /// Encoding error; always zero here because operators are exact.
    pub eps_encode: f64,
}

impl BlockEncoding {
    /// Validates `||op|| <= subnorm`.
    pub fn new(op: DenseOperator, subnorm: f64, ancillas: usize) -> Result<Self> {
        if !(subnorm >= 0.0) {
            return Err(Error::input("subnormalisation must be non-negative"));
        }
        let norm = op.spectral_norm();
        if norm > subnorm * (1.0 + NORM_SLACK) + NORM_SLACK {
            return Err(Error::input(format!("operator norm {norm} exceeds subnormalisation {subnorm}")));
        }
        Ok(Self { op, subnorm, ancillas, eps_encode: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn identity(dim: usize) -> Self {
        Self { op: DenseOperator::identity(dim), subnorm: 1.0, ancillas: 0, eps_encode: 0.0 }
    }
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// LCU encoding of a Pauli sum: subnormalisation is the coefficient 1-norm.
pub fn encode_lcu(p: &PauliOperator) -> Result<BlockEncoding> {
    if p.is_empty() {
        return Err(Error::input("cannot block-encode an empty operator"));
    }
    let op = dense(p, p.is_hermitian(HERMITIAN))?;
    Ok(BlockEncoding { op, subnorm: lcu_one_norm(p), ancillas: ceil_log2(p.len()), eps_encode: 0.0 })
}

/// Encoding of `A - omega I` with subnormalisation `alpha + |omega|`.
pub fn shift_encoding(be: &BlockEncoding, omega: f64) -> BlockEncoding {
    let n = be.dim();
    let matrix = &be.op.matrix - DMatrix::<Complex64>::identity(n, n).scale(omega);
    BlockEncoding {
        op: DenseOperator { matrix, hermitian: be.op.hermitian },
        subnorm: be.subnorm + omega.abs(),
        ancillas: be.ancillas + 1,
        eps_encode: be.eps_encode,
    }
}

/// A Hamiltonian encoding together with the eigendecomposition used to apply
/// filters to it. Shared between all chains built on the same Hamiltonian.
#[derive(Debug)]
pub struct HamiltonianEncoding {
    pub enc: BlockEncoding,
    eig: Option<(Vec<f64>, DMatrix<Complex64>)>,
}

impl HamiltonianEncoding {
    pub fn new(enc: BlockEncoding) -> Result<Arc<Self>> {
        if !enc.op.hermitian {
            return Err(Error::input("Hamiltonian encoding must be Hermitian"));
        }
        let eig = (enc.dim() <= SPECTRAL_CACHE_MAX_DIM).then(|| hermitian_eigen(&enc.op.matrix));
        Ok(Arc::new(Self { enc, eig }))
    }

    /// Rescaling applied to `H - omega I` before filtering.
    pub fn scale_at(&self, omega: f64) -> f64 {
        self.enc.subnorm + omega.abs()
    }

    /// `(H - omega I) / (alpha + |omega|)` as a dense operator.
    pub fn rescaled(&self, omega: f64) -> DenseOperator {
        let shifted = shift_encoding(&self.enc, omega);
        DenseOperator { matrix: shifted.op.matrix.unscale(shifted.subnorm), hermitian: true }
    }

    fn apply_filter(&self, f: &ChebyshevFilter, omega: f64, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let s = self.scale_at(omega);
        match &self.eig {
            Some((vals, vecs)) => {
                let mut c = vecs.adjoint() * v;
                for (j, l) in vals.iter().enumerate() {
                    c[j] *= f.eval((l - omega) / s);
                }
                Ok(vecs * c)
            }
            None => apply_filter_vector(f, &self.rescaled(omega), v),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ChainFactor {
    Block(BlockEncoding),
    /// `F((H - omega I) / (alpha + |omega|))`.
    Filter { filter: ChebyshevFilter, hamiltonian: Arc<HamiltonianEncoding>, omega: f64 },
}

impl ChainFactor {
    pub fn subnorm(&self) -> f64 {
        match self {
            ChainFactor::Block(b) => b.subnorm,
            ChainFactor::Filter { filter, .. } => filter.sup_bound(),
        }
    }

    pub fn ancillas(&self) -> usize {
        match self {
            ChainFactor::Block(b) => b.ancillas,
            // The shifted Hamiltonian's register plus one signal-processing qubit.
            ChainFactor::Filter { hamiltonian, .. } => hamiltonian.enc.ancillas + 2,
        }
    }

    fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        match self {
            ChainFactor::Block(b) => Ok(b.op.apply(v)),
            ChainFactor::Filter { filter, hamiltonian, omega } => hamiltonian.apply_filter(filter, *omega, v),
        }
    }
}

/// Alternative normalisations quoted for reporting only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportedZeta {
    /// `(alpha + 1 + |omega|) * prod(beta)`.
    pub shifted_form: f64,
    /// `alpha * prod(beta)`.
    pub plain_form: f64,
}

/// Product of block encodings; `factors[0]` acts first.
#[derive(Clone, Debug)]
pub struct EncodingChain {
    pub factors: Vec<ChainFactor>,
    pub zeta: f64,
    pub ancillas: usize,
    pub reported: Option<ReportedZeta>,
}

impl EncodingChain {
    pub fn new(factors: Vec<ChainFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::input("empty encoding chain"));
        }
        let dim = factor_dim(&factors[0]);
        if factors.iter().any(|f| factor_dim(f) != dim) {
            return Err(Error::input("chain factors act on different dimensions"));
        }
        let zeta = factors.iter().map(ChainFactor::subnorm).product();
        let ancillas = factors.iter().map(ChainFactor::ancillas).sum();
        Ok(Self { factors, zeta, ancillas, reported: None })
    }

    pub fn dim(&self) -> usize {
        factor_dim(&self.factors[0])
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let mut out = v.clone();
        for f in &self.factors {
            out = f.apply(&out)?;
        }
        Ok(out)
    }

    /// Dense effective operator, built column by column.
    pub fn effective_operator(&self) -> Result<DMatrix<Complex64>> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut e = DVector::zeros(n);
            e[c] = Complex64::new(1.0, 0.0);
            m.set_column(c, &self.apply(&e)?);
        }
        Ok(m)
    }

    /// `<psi| effective |psi>`.
    pub fn expectation(&self, psi: &DVector<Complex64>) -> Result<Complex64> {
        Ok(psi.dotc(&self.apply(psi)?))
    }

    pub fn describe(&self) -> ChainDescription {
        ChainDescription {
            zeta: self.zeta,
            ancillas: self.ancillas,
            reported: self.reported,
            factors: self
                .factors
                .iter()
                .map(|f| match f {
                    ChainFactor::Block(b) => FactorDescription {
                        kind: "block".into(),
                        subnorm: b.subnorm,
                        ancillas: b.ancillas,
                        degree: None,
                        window: None,
                    },
                    ChainFactor::Filter { filter, hamiltonian, omega } => {
                        let s = hamiltonian.scale_at(*omega);
                        FactorDescription {
                            kind: "filter".into(),
                            subnorm: filter.sup_bound(),
                            ancillas: f.ancillas(),
                            degree: Some(filter.degree),
                            window: Some((omega + filter.lo() * s, omega + filter.hi() * s)),
                        }
                    }
                })
                .collect(),
        }
    }
}

fn factor_dim(f: &ChainFactor) -> usize {
    match f {
        ChainFactor::Block(b) => b.dim(),
        ChainFactor::Filter { hamiltonian, .. } => hamiltonian.enc.dim(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorDescription {
    pub kind: String,
    pub subnorm: f64,
    pub ancillas: usize,
    pub degree: Option<usize>,
    /// Energy window covered by a filter factor.
    pub window: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDescription {
    pub zeta: f64,
    pub ancillas: usize,
    pub reported: Option<ReportedZeta>,
    pub factors: Vec<FactorDescription>,
}

/// `D' F((H - omega I)/(alpha + |omega|)) D`.
pub fn filtered_chain(
    u_d: &BlockEncoding,
    filter: &ChebyshevFilter,
    hamiltonian: &Arc<HamiltonianEncoding>,
    u_dp: &BlockEncoding,
    omega: f64,
) -> Result<EncodingChain> {
    nested_chain(&[u_d.clone(), u_dp.clone()], &[(filter.clone(), omega)], hamiltonian)
}

/// `D_k F_k ... D_1 F_1 D_0`, with `dipoles[0]` acting first.
pub fn nested_chain(
    dipoles: &[BlockEncoding],
    filters: &[(ChebyshevFilter, f64)],
    hamiltonian: &Arc<HamiltonianEncoding>,
) -> Result<EncodingChain> {
    if dipoles.len() != filters.len() + 1 {
        return Err(Error::input("nested chain needs one more dipole than filters"));
    }
    let mut factors = vec![ChainFactor::Block(dipoles[0].clone())];
    for ((filter, omega), d) in filters.iter().zip(&dipoles[1..]) {
        if filter.lo() < -1.0 || filter.hi() > 1.0 {
            return Err(Error::input("filter window lies outside the rescaled spectrum"));
        }
        factors.push(ChainFactor::Filter { filter: filter.clone(), hamiltonian: hamiltonian.clone(), omega: *omega });
        factors.push(ChainFactor::Block(d.clone()));
    }
    let mut chain = EncodingChain::new(factors)?;
    let betas: f64 = dipoles.iter().map(|d| d.subnorm).product();
    let alpha = hamiltonian.enc.subnorm;
    let omega = filters.iter().map(|f| f.1.abs()).fold(0.0, f64::max);
    chain.reported = Some(ReportedZeta { shifted_form: (alpha + 1.0 + omega) * betas, plain_form: alpha * betas });
    Ok(chain)
}

/// `(||effective psi|| / zeta)^2` and `xi = ||effective psi||`.
pub fn success_probability(chain: &EncodingChain, state: &DVector<Complex64>) -> Result<(f64, f64)> {
    let xi = chain.apply(state)?.norm();
    if chain.zeta == 0.0 {
        return Ok((0.0, xi));
    }
    Ok(((xi / chain.zeta).powi(2), xi))
}

/// `ceil(zeta / xi)` rounds of amplitude amplification.
pub fn amplification_rounds(chain: &EncodingChain, state: &DVector<Complex64>) -> Result<u64> {
    let (_, xi) = success_probability(chain, state)?;
    if !(xi > 0.0) {
        return Err(Error::Statistical("no signal in window".into()));
    }
    Ok((chain.zeta / xi * (1.0 - 1e-12)).ceil().max(1.0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::PauliOperator;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn lcu_examples() {
        let single = PauliOperator::from_terms(1, &[("Z0", c(0.7))]).unwrap();
        let be = encode_lcu(&single).unwrap();
        assert_eq!((be.subnorm, be.ancillas), (0.7, 0));
        let pair = PauliOperator::from_terms(1, &[("Z0", c(0.5)), ("X0", c(0.5))]).unwrap();
        let be = encode_lcu(&pair).unwrap();
        assert_eq!((be.subnorm, be.ancillas), (1.0, 1));
        assert!(encode_lcu(&PauliOperator::zero(1)).is_err());
    }

    #[test]
    fn shift_examples() {
        let p = PauliOperator::from_terms(1, &[("Z0", c(2.0))]).unwrap();
        let be = encode_lcu(&p).unwrap();
        let same = shift_encoding(&be, 0.0);
        assert_eq!(same.op, be.op);
        assert_eq!(same.ancillas, be.ancillas + 1);
        assert_eq!(shift_encoding(&be, 0.5).subnorm, 2.5);
        let moved = shift_encoding(&be, 0.5);
        assert_eq!(moved.op.matrix[(0, 0)], c(1.5));
        assert_eq!(moved.op.matrix[(1, 1)], c(-2.5));
    }

    #[test]
    fn rounds_examples() {
        let chain = EncodingChain::new(vec![ChainFactor::Block(BlockEncoding::identity(2))]).unwrap();
        let psi = DVector::from_vec(vec![c(1.0), c(0.0)]);
        assert_eq!(amplification_rounds(&chain, &psi).unwrap(), 1);
        let (p, _) = success_probability(&chain, &psi).unwrap();
        assert_eq!(p, 1.0);
        let tenth = BlockEncoding::new(DenseOperator::identity(2), 10.0, 0).unwrap();
        let chain = EncodingChain::new(vec![ChainFactor::Block(tenth)]).unwrap();
        assert_eq!(amplification_rounds(&chain, &psi).unwrap(), 10);
        let zero = BlockEncoding::new(DenseOperator::zeros(2), 1.0, 0).unwrap();
        let chain = EncodingChain::new(vec![ChainFactor::Block(zero)]).unwrap();
        assert!(matches!(amplification_rounds(&chain, &psi), Err(Error::Statistical(_))));
    }

    #[test]
    fn subnorm_validated() {
        assert!(BlockEncoding::new(DenseOperator::identity(2), 0.5, 0).is_err());
    }
}
