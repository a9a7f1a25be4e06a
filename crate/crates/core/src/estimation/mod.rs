//! Measurement layer: Hadamard-test sampling, bin search over the excitation
//! spectrum and windowed amplitude estimation.
//!
//! Windows are half-open energy intervals `[a, b)` measured from the ground
//! energy. Every sampled quantity is `<psi0| chain |psi0> / zeta`, computed
//! exactly and then sampled; the search logic only sees the samples.

mod channel;
mod estimate;
mod search;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DVector;
use num_complex::Complex64;

pub use channel::{imaginary_part_channel, sample_hadamard, HadamardChannel, LcuDistribution, Part};
pub use estimate::{estimate_window, EstimateMethod, WindowEstimate};
pub use search::{
    binary_search_1d, binary_search_nd, inequality_test, relation_matrix, required_samples, run_search,
    sort_bins, BinSearchConfig, Relation, SearchLevel, SearchProblem, SearchTrace,
};

use crate::encoding::{
    encode_lcu, nested_chain, shift_encoding, BlockEncoding, EncodingChain, HamiltonianEncoding,
};
use crate::error::{Error, Result};
use crate::filter::{build_indicator, ChebyshevFilter};
use crate::model::ModelSpec;
use crate::operator::{jordan_wigner, DenseOperator};
use crate::oracle::diagonalize;

/// Half-open energy interval.
pub type Window = (f64, f64);

/// Filter settings shared by every window of a search or estimate.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FilterParams {
    /// Ramp half-width as a fraction of the window width.
    pub overlap: f64,
    pub eps: f64,
}

/// Everything needed to build chains for one model: exact ground state,
/// ground-shifted Hamiltonian encoding and dipole encodings.
#[derive(Debug)]
pub struct SimSystem {
    pub label: String,
    pub ground: DVector<Complex64>,
    pub ground_energy: f64,
    pub hamiltonian: Arc<HamiltonianEncoding>,
    /// Dipole encodings as given.
    pub dipoles: [BlockEncoding; 3],
    /// `D - <psi0|D|psi0>`, so that the ground state drops out of every window.
    pub centered_dipoles: [BlockEncoding; 3],
    pub ground_dipole: [f64; 3],
    filters: Mutex<HashMap<[u64; 4], (ChebyshevFilter, f64)>>,
}

impl SimSystem {
    pub fn from_model(model: &ModelSpec) -> Result<Self> {
        let sd = diagonalize(model, true)?;
        let ground = sd.ground_state();
        let e0 = sd.ground_energy;
        let h = encode_lcu(&jordan_wigner(&model.hamiltonian()?)?)?;
        let hamiltonian = HamiltonianEncoding::new(shift_encoding(&h, e0))?;
        let dim = ground.len();
        let mut raw = Vec::with_capacity(3);
        let mut centered = Vec::with_capacity(3);
        let mut means = [0.0; 3];
        for (axis, mean) in means.iter_mut().enumerate() {
            let p = jordan_wigner(&model.dipole_operator(axis)?)?;
            // An absent dipole is encoded as the zero operator with unit subnormalisation.
            let be = if p.is_empty() {
                BlockEncoding::new(DenseOperator::zeros(dim), 1.0, 0)?
            } else {
                encode_lcu(&p)?
            };
            *mean = ground.dotc(&be.op.apply(&ground)).re;
            centered.push(shift_encoding(&be, *mean));
            raw.push(be);
        }
        let arr = |v: Vec<BlockEncoding>| -> [BlockEncoding; 3] { v.try_into().expect("three axes") };
        Ok(Self {
            label: model.label.clone(),
            ground,
            ground_energy: e0,
            hamiltonian,
            dipoles: arr(raw),
            centered_dipoles: arr(centered),
            ground_dipole: means,
            filters: Mutex::new(HashMap::new()),
        })
    }

    /// Upper end of the excitation spectrum implied by the encoding.
    pub fn e_max(&self) -> f64 {
        self.hamiltonian.enc.subnorm
    }

    fn dipole(&self, axis: usize, centered: bool) -> Result<&BlockEncoding> {
        let set = if centered { &self.centered_dipoles } else { &self.dipoles };
        set.get(axis).ok_or_else(|| Error::input(format!("axis {axis} out of range")))
    }

    /// Chain subnormalisation for the given axes.
    pub fn zeta(&self, axes: &[usize], centered: bool) -> Result<f64> {
        let mut z = 1.0;
        for (k, &a) in axes.iter().enumerate() {
            z *= self.dipole(a, centered && is_outer(k, axes.len()))?.subnorm;
        }
        Ok(z)
    }

    /// Indicator for an energy window, rescaled by the shift to its midpoint.
    /// Filters are cached per window and parameters.
    pub fn window_filter(&self, w: Window, params: FilterParams) -> Result<(ChebyshevFilter, f64)> {
        if !(w.1 > w.0) {
            return Err(Error::input(format!("empty window [{}, {})", w.0, w.1)));
        }
        let key = [w.0.to_bits(), w.1.to_bits(), params.overlap.to_bits(), params.eps.to_bits()];
        if let Some(hit) = self.filters.lock().expect("filter cache").get(&key) {
            return Ok(hit.clone());
        }
        let omega = 0.5 * (w.0 + w.1);
        let s = self.hamiltonian.scale_at(omega);
        let half = 0.5 * (w.1 - w.0) / s;
        let delta = params.overlap * (w.1 - w.0) / s;
        let built = (build_indicator(-half, half, delta, params.eps)?, omega);
        self.filters.lock().expect("filter cache").insert(key, built.clone());
        Ok(built)
    }

    /// `D_k F_k ... F_1 D_0` with `axes[0]` acting first. With `centered`, the
    /// first and last dipoles have their ground expectation removed.
    pub fn chain(&self, axes: &[usize], windows: &[Window], params: FilterParams, centered: bool) -> Result<EncodingChain> {
        if axes.len() != windows.len() + 1 {
            return Err(Error::input("need one more axis than windows"));
        }
        let dips = axes
            .iter()
            .enumerate()
            .map(|(k, &a)| self.dipole(a, centered && is_outer(k, axes.len())).cloned())
            .collect::<Result<Vec<_>>>()?;
        let filters = windows
            .iter()
            .map(|&w| self.window_filter(w, params))
            .collect::<Result<Vec<_>>>()?;
        nested_chain(&dips, &filters, &self.hamiltonian)
    }

    /// `<psi0| chain |psi0> / zeta`.
    pub fn normalized_value(&self, chain: &EncodingChain) -> Result<Complex64> {
        Ok(chain.expectation(&self.ground)? / chain.zeta)
    }
}

fn is_outer(k: usize, len: usize) -> bool {
    k == 0 || k + 1 == len
}

/// Filter degrees summed over a chain.
pub(crate) fn chain_degree(chain: &EncodingChain) -> u64 {
    chain
        .factors
        .iter()
        .map(|f| match f {
            crate::encoding::ChainFactor::Filter { filter, .. } => filter.degree as u64,
            crate::encoding::ChainFactor::Block(_) => 0,
        })
        .sum()
}
