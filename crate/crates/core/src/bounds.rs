//! Analytic lower bounds on cost and gradient variances, evaluated in log space.

use crate::error::{invalid, Result};
use crate::ensembles::{CLIFFORD1_ORDER, CLIFFORD2_ORDER};

/// |CL(1)|·|CL(2)|.
pub const DEFAULT_C: f64 = (CLIFFORD1_ORDER * CLIFFORD2_ORDER) as f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    pub d: usize,
    /// Gate extent K.
    pub k: usize,
    /// Jump depth L.
    pub l: usize,
    pub n: usize,
    pub n_r: usize,
    pub q: f64,
    pub d_max: f64,
    pub c_const: f64,
    /// Layers between the parameterized gate and the measurement.
    pub i: usize,
    /// ‖H_μ‖∞.
    pub h_norm: f64,
    /// Σ_{P≠I} a_P².
    pub obs_weight: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.k == 0 || self.l == 0 || self.n == 0 || self.n_r == 0 || self.i == 0 {
            return Err(invalid("d, K, L, n, n_r and i must be positive"));
        }
        if self.n_r > self.n {
            return Err(invalid("n_r exceeds n"));
        }
        if !(0.0..=1.0).contains(&self.q) || !(0.0..=1.0).contains(&self.d_max) {
            return Err(invalid("q and D_max must lie in [0, 1]"));
        }
        if !(self.c_const > 0.0) || !(self.h_norm > 0.0) || !(self.obs_weight >= 0.0) {
            return Err(invalid("C, ‖H‖ must be positive and the observable weight nonnegative"));
        }
        Ok(())
    }
}

/// Bound value with the exponents entering it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub bound: f64,
    /// Natural log of the bound; −∞ when a factor vanishes.
    pub log_bound: f64,
    pub small_delta: f64,
    pub big_delta: f64,
    pub lambda: f64,
    pub gamma: f64,
}

/// x^e in log space with 0^0 = 1.
fn log_pow(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        e * libm::log(x)
    }
}

fn log_weight(w: f64) -> f64 {
    if w == 0.0 {
        f64::NEG_INFINITY
    } else {
        libm::log(w)
    }
}

struct Exponents {
    small_delta: f64,
    big_delta: f64,
    lambda: f64,
    gamma: f64,
    kd: f64,
}

fn exponents(p: &BoundParams) -> Exponents {
    let d = p.d as f64;
    let k = p.k as f64;
    let l = p.l as f64;
    let ratio = p.n as f64 / p.n_r as f64;
    let small_delta = 0.5 * libm::pow(ratio, 1.0 / d) + k / 2.0;
    let big_delta = (d * (small_delta - 1.0) + l).max(d * (k - 1.0) + l);
    let kd = libm::pow(k, d);
    let lambda = (libm::pow(small_delta, d) * (d * (small_delta - 1.0) + l)).max(kd * (d * (k - 1.0) + l));
    let gamma = kd * (d * (k - 1.0) + l) / (ratio * l);
    Exponents { small_delta, big_delta, lambda, gamma, kd }
}

/// Σa² · C^−Λ · D_max^(2K^dΔ) · q^(2Γ+2).
pub fn variance_lower_bound(p: &BoundParams) -> Result<BoundReport> {
    p.validate()?;
    let e = exponents(p);
    let log_bound = log_weight(p.obs_weight) - e.lambda * libm::log(p.c_const)
        + log_pow(p.d_max, 2.0 * e.kd * e.big_delta)
        + log_pow(p.q, 2.0 * e.gamma + 2.0);
    Ok(BoundReport {
        bound: libm::exp(log_bound),
        log_bound,
        small_delta: e.small_delta,
        big_delta: e.big_delta,
        lambda: e.lambda,
        gamma: e.gamma,
    })
}

/// Σa² · D_max^(2K^d(i−1)+2Δ) / C^(K^d(i−1)+Λ) · ‖H‖²/64 · q^(2Γ+2) · (1−q)^(2γ),
/// γ = (i−1)/L · K^d · n_r/n. The reported `gamma` is γ.
pub fn gradient_variance_lower_bound(p: &BoundParams) -> Result<BoundReport> {
    p.validate()?;
    let e = exponents(p);
    let i1 = (p.i - 1) as f64;
    let g = i1 / p.l as f64 * e.kd * p.n_r as f64 / p.n as f64;
    let log_bound = log_weight(p.obs_weight)
        + log_pow(p.d_max, 2.0 * e.kd * i1 + 2.0 * e.big_delta)
        - (e.kd * i1 + e.lambda) * libm::log(p.c_const)
        + 2.0 * libm::log(p.h_norm)
        - libm::log(64.0)
        + log_pow(p.q, 2.0 * e.gamma + 2.0)
        + log_pow(1.0 - p.q, 2.0 * g);
    Ok(BoundReport {
        bound: libm::exp(log_bound),
        log_bound,
        small_delta: e.small_delta,
        big_delta: e.big_delta,
        lambda: e.lambda,
        gamma: g,
    })
}
