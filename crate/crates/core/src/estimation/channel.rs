use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::encoding::EncodingChain;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    Real,
    Imag,
}

/// Non-unitary Hadamard test on `<psi0| chain / zeta |psi0>`.
#[derive(Clone, Debug)]
pub struct HadamardChannel {
    pub chain: Option<Arc<EncodingChain>>,
    /// Normalised value `v`, `|v| <= 1`.
    pub value: Complex64,
    pub part: Part,
    pub seed: u64,
}

impl HadamardChannel {
    pub fn from_chain(chain: Arc<EncodingChain>, psi: &DVector<Complex64>, seed: u64) -> Result<Self> {
        let value = if chain.zeta > 0.0 { chain.expectation(psi)? / chain.zeta } else { Complex64::new(0.0, 0.0) };
        Self::with_value(value, seed).map(|mut c| {
            c.chain = Some(chain);
            c
        })
    }

    /// A channel with a prescribed normalised value.
    pub fn with_value(value: Complex64, seed: u64) -> Result<Self> {
        if value.norm() > 1.0 + 1e-9 {
            return Err(Error::input(format!("|v| = {} exceeds 1", value.norm())));
        }
        Ok(Self { chain: None, value, part: Part::Real, seed })
    }

    /// Probability of the 0 outcome.
    pub fn p0(&self) -> f64 {
        let x = match self.part {
            Part::Real => self.value.re,
            Part::Imag => self.value.im,
        };
        (0.5 * (1.0 + x)).clamp(0.0, 1.0)
    }
}

/// The same test with the ancilla phase shifted so that it reads `Im v`.
pub fn imaginary_part_channel(ch: &HadamardChannel) -> HadamardChannel {
    HadamardChannel { part: Part::Imag, ..ch.clone() }
}

/// Empirical frequency of the 0 outcome over `shots` draws.
pub fn sample_hadamard(ch: &HadamardChannel, shots: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::input("shots must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ch.seed);
    let zeros = binomial(&mut rng, shots, ch.p0());
    Ok(zeros as f64 / shots as f64)
}

pub(crate) fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("probability in (0, 1)").sample(rng)
}

/// Outcome distribution of a linear combination of `|B|` Hadamard tests:
/// `P(i) = (1 + s Re v_i) / (2|B|)`, plus a discarded outcome holding the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcuDistribution {
    pub probs: Vec<f64>,
    pub bottom: f64,
}

impl LcuDistribution {
    /// `sign` flips which amplitudes count as large.
    pub fn from_values(values: &[f64], sign: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("no bins"));
        }
        let b = values.len() as f64;
        let probs: Vec<f64> = values.iter().map(|v| (1.0 + sign * v) / (2.0 * b)).collect();
        if probs.iter().any(|p| !(-1e-12..=1.0 + 1e-12).contains(p)) {
            return Err(Error::input("bin probability outside [0, 1]; check the subnormalisation"));
        }
        let probs: Vec<f64> = probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
        let bottom = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Ok(Self { probs, bottom })
    }

    pub fn from_channels(channels: &[HadamardChannel]) -> Result<Self> {
        let vals: Vec<f64> = channels.iter().map(|c| 2.0 * c.p0() - 1.0).collect();
        Self::from_values(&vals, 1.0)
    }

    /// Counts per bin followed by the discarded count, for `n` draws.
    pub fn sample(&self, rng: &mut ChaCha8Rng, n: u64) -> Vec<u64> {
        let mut left = n;
        let mut mass = 1.0;
        let mut out = Vec::with_capacity(self.probs.len() + 1);
        for &p in &self.probs {
            let c = if mass > 0.0 { binomial(rng, left, (p / mass).min(1.0)) } else { 0 };
            out.push(c);
            left -= c;
            mass -= p;
        }
        out.push(left);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_value_always_zero_outcome() {
        let ch = HadamardChannel::with_value(Complex64::new(1.0, 0.0), 3).unwrap();
        assert_eq!(sample_hadamard(&ch, 1000).unwrap(), 1.0);
    }

    #[test]
    fn imaginary_variant() {
        let ch = HadamardChannel::with_value(Complex64::new(0.3, 0.0), 1).unwrap();
        assert_eq!(imaginary_part_channel(&ch).p0(), 0.5);
        let ch = HadamardChannel::with_value(Complex64::new(0.0, 0.4), 1).unwrap();
        assert!((imaginary_part_channel(&ch).p0() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn uniform_when_all_zero() {
        let d = LcuDistribution::from_values(&[0.0; 4], 1.0).unwrap();
        assert!(d.probs.iter().all(|&p| p == 0.125));
        assert!((d.bottom - 0.5).abs() < 1e-15);
    }

    #[test]
    fn counts_sum_to_draws() {
        let d = LcuDistribution::from_values(&[0.2, -0.1, 0.0], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(d.sample(&mut rng, 12345).iter().sum::<u64>(), 12345);
    }

    #[test]
    fn oversized_value_rejected() {
        assert!(LcuDistribution::from_values(&[3.0], 1.0).is_err());
        assert!(HadamardChannel::with_value(Complex64::new(1.5, 0.0), 0).is_err());
    }
}
