use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::channel::{imaginary_part_channel, sample_hadamard, HadamardChannel};
use super::{chain_degree, FilterParams, SimSystem, Window};
use crate::encoding::amplification_rounds;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMethod {
    /// Hadamard-test sampling of the real and imaginary parts.
    DirectSampling,
    /// Idealised amplitude estimation: exact value plus bounded seeded noise.
    AmplitudeEstimation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimate {
    pub windows: Vec<Window>,
    /// First-acting axis first.
    pub axes: Vec<usize>,
    pub value: Complex64,
    pub method: EstimateMethod,
    pub samples: u64,
    /// Charged queries to the Hamiltonian encoding.
    pub queries: u64,
    pub eps_filter: f64,
    pub eps_stat: f64,
    pub zeta: f64,
    pub degree: u64,
}

impl WindowEstimate {
    pub fn center(&self) -> f64 {
        0.5 * (self.windows[0].0 + self.windows[0].1)
    }

    pub fn width(&self) -> f64 {
        self.windows[0].1 - self.windows[0].0
    }
}

/// Amplitude-estimation shots per unit of `zeta / eps`.
pub const AE_SHOT_CONSTANT: f64 = std::f64::consts::PI;

/// Direct-sampling shots per part are `9 zeta^2 / eps_stat^2` (three standard
/// deviations inside the statistical budget).
pub const DIRECT_SIGMAS: f64 = 3.0;

/// Estimates `<psi0| D_k F_k ... F_1 D_0 |psi0>` over the given windows to
/// additive accuracy `eps`, half of it spent on the filter, half on sampling.
/// `overlap` fixes the ramp width relative to each window.
#[allow(clippy::too_many_arguments)]
pub fn estimate_window(
    system: &SimSystem,
    axes: &[usize],
    windows: &[Window],
    eps: f64,
    method: EstimateMethod,
    overlap: f64,
    centered: bool,
    seed: u64,
) -> Result<WindowEstimate> {
    if !(eps > 0.0) {
        return Err(Error::input("eps must be positive"));
    }
    let zeta = system.zeta(axes, centered)?;
    let eps_filter = eps / 2.0;
    let eps_stat = eps / 2.0;
    // Filter error enters the amplitude multiplied by at most zeta.
    let params = FilterParams { overlap, eps: (eps_filter / zeta).min(0.5) };
    let chain = Arc::new(system.chain(axes, windows, params, centered)?);
    let degree = chain_degree(&chain);
    let rounds = match amplification_rounds(&chain, &system.ground) {
        Ok(r) => r,
        Err(Error::Statistical(_)) => 1,
        Err(e) => return Err(e),
    };
    let re = HadamardChannel::from_chain(chain.clone(), &system.ground, seed)?;
    let (value, samples) = match method {
        EstimateMethod::DirectSampling => {
            let shots = (DIRECT_SIGMAS * DIRECT_SIGMAS * zeta * zeta / (eps_stat * eps_stat)).ceil() as u64;
            let im = HadamardChannel { seed: seed.wrapping_add(0x9e37_79b9_7f4a_7c15), ..imaginary_part_channel(&re) };
            let x = 2.0 * sample_hadamard(&re, shots)? - 1.0;
            let y = 2.0 * sample_hadamard(&im, shots)? - 1.0;
            (Complex64::new(x, y) * zeta, 2 * shots)
        }
        EstimateMethod::AmplitudeEstimation => {
            let shots = (AE_SHOT_CONSTANT * zeta / eps_stat).ceil() as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = eps_stat * rng.gen::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.gen::<f64>();
            (re.value * zeta + Complex64::from_polar(r, phi), shots)
        }
    };
    Ok(WindowEstimate {
        windows: windows.to_vec(),
        axes: axes.to_vec(),
        value,
        method,
        samples,
        queries: degree * samples * rounds,
        eps_filter,
        eps_stat,
        zeta,
        degree,
    })
}
