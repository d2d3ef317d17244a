//! Entropy lower bounds for circuits with depolarizing noise. All entropies are in bits.

use crate::error::{invalid, Result};
use crate::state::{DensityState, SimState};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EntropyBoundParams {
    pub n: usize,
    /// Qubits shielded from noise.
    pub n_c: usize,
    /// Physical or logical depolarizing rate.
    pub p: f64,
    pub layers: usize,
    /// Initial entropy.
    pub s0: f64,
}

impl EntropyBoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid("depolarizing rate outside [0, 1]"));
        }
        if self.n_c > self.n {
            return Err(invalid("more protected qubits than qubits"));
        }
        if !(self.s0 >= 0.0) || self.s0 > self.n as f64 + 1e-9 {
            return Err(invalid("initial entropy outside [0, n]"));
        }
        Ok(())
    }

    fn exposed(&self) -> f64 {
        (self.n - self.n_c) as f64
    }
}

/// (1−p)·S0 + p·(n−n_c).
pub fn single_layer_bound(par: &EntropyBoundParams) -> Result<f64> {
    par.validate()?;
    Ok((1.0 - par.p) * par.s0 + par.p * par.exposed())
}

/// (1 − (1−p)^L)·(n−n_c) from a pure start.
pub fn layered_bound(par: &EntropyBoundParams) -> Result<f64> {
    par.validate()?;
    if par.s0 != 0.0 {
        return Err(invalid("layered bound assumes a pure initial state"));
    }
    Ok((1.0 - libm::pow(1.0 - par.p, par.layers as f64)) * par.exposed())
}

/// Layered bound with every qubit encoded and the logical rate p_l in place of p.
pub fn corrected_layered_bound(n: usize, p_logical: f64, layers: usize) -> Result<f64> {
    layered_bound(&EntropyBoundParams { n, n_c: 0, p: p_logical, layers, s0: 0.0 })
}

/// Depolarize each of the first n − n_c qubits with rate p.
pub fn depolarizing_layer<S: SimState>(state: &mut S, n_c: usize, p: f64) {
    let n = state.n_qubits();
    for q in 0..n.saturating_sub(n_c) {
        state.depolarize(q, p);
    }
}

/// S(ρ)/n.
pub fn normalized_entropy(rho: &DensityState) -> f64 {
    rho.entropy() / rho.n() as f64
}
