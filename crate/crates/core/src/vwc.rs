//! Classical Markov chain of a dissipatively driven computation history.
//!
//! State (reg, clock) has index clock·2^T + reg; bit i of reg is qubit i.
//! The gates are U_1 = X_0 and U_t = CNOT(t−2 → t−1); all jump rates are 1
//! except register bit flips, which occur at rate κ.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::linalg::RMat;

/// Largest chain solved densely when κ > 0.
pub const DENSE_STATE_LIMIT: usize = 1024;
pub const STATIONARY_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 1_000_000;
pub const MAX_T: usize = 20;

#[derive(Clone, Debug)]
pub struct HistoryChain {
    t: usize,
    kappa: f64,
    /// Per target state, the (source, rate) pairs feeding it.
    incoming: Vec<Vec<(usize, f64)>>,
    /// Total rate out of each state.
    exit: Vec<f64>,
}

fn gate(t: usize, reg: usize) -> usize {
    if t == 1 {
        reg ^ 1
    } else {
        let (ctl, tgt) = (t - 2, t - 1);
        if reg >> ctl & 1 == 1 {
            reg ^ (1 << tgt)
        } else {
            reg
        }
    }
}

impl HistoryChain {
    pub fn gates(&self) -> usize {
        self.t
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n_states(&self) -> usize {
        self.exit.len()
    }

    pub fn index(&self, reg: usize, clock: usize) -> usize {
        clock * (1 << self.t) + reg
    }

    /// (reg, clock) of a state index.
    pub fn decode(&self, idx: usize) -> (usize, usize) {
        (idx % (1 << self.t), idx >> self.t)
    }

    fn outgoing(&self, idx: usize, mut f: impl FnMut(usize, f64)) {
        let (reg, clock) = self.decode(idx);
        if clock < self.t {
            f(self.index(gate(clock + 1, reg), clock + 1), 1.0);
        }
        if clock > 0 {
            f(self.index(gate(clock, reg), clock - 1), 1.0);
        }
        for i in 0..self.t {
            if clock == 0 && reg >> i & 1 == 1 {
                f(self.index(reg & !(1 << i), 0), 1.0);
            }
            if self.kappa > 0.0 {
                f(self.index(reg ^ (1 << i), clock), self.kappa);
            }
        }
    }

    /// Dense generator with Q[to, from] = rate and zero column sums.
    pub fn rate_matrix(&self) -> Result<RMat> {
        let n = self.n_states();
        if n > 4 * DENSE_STATE_LIMIT {
            return Err(Error::Unsupported(alloc::format!("{n} states are too many for a dense generator")));
        }
        let mut q = RMat::zeros(n, n);
        for (to, list) in self.incoming.iter().enumerate() {
            for &(from, r) in list {
                q[(to, from)] += r;
            }
            q[(to, to)] -= self.exit[to];
        }
        Ok(q)
    }

    /// ‖Qπ‖∞.
    pub fn residual(&self, pi: &[f64]) -> f64 {
        self.incoming
            .iter()
            .enumerate()
            .map(|(j, list)| (list.iter().map(|&(i, r)| r * pi[i]).sum::<f64>() - self.exit[j] * pi[j]).abs())
            .fold(0.0, f64::max)
    }

    /// States reachable from (0, 0).
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = alloc::vec![false; self.n_states()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut out = Vec::new();
        while let Some(s) = queue.pop_front() {
            out.push(s);
            self.outgoing(s, |to, _| {
                if !seen[to] {
                    seen[to] = true;
                    queue.push_back(to);
                }
            });
        }
        out.sort_unstable();
        out
    }
}

pub fn build_chain(t: usize, kappa: f64) -> Result<HistoryChain> {
    if t == 0 || t > MAX_T {
        return Err(invalid(alloc::format!("gate count must lie in 1..={MAX_T}")));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(invalid("noise rate must be finite and nonnegative"));
    }
    let n = (t + 1) << t;
    let mut chain = HistoryChain { t, kappa, incoming: alloc::vec![Vec::new(); n], exit: alloc::vec![0.0; n] };
    let mut edges = Vec::new();
    for from in 0..n {
        chain.outgoing(from, |to, r| edges.push((from, to, r)));
    }
    for (from, to, r) in edges {
        chain.exit[from] += r;
        chain.incoming[to].push((from, r));
    }
    Ok(chain)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StationaryMethod {
    /// Dense solve on the class reachable from (0, 0).
    DenseRecurrent,
    Dense,
    GaussSeidel,
}

#[derive(Clone, Debug)]
pub struct Stationary {
    pub pi: Vec<f64>,
    pub residual: f64,
    pub method: StationaryMethod,
    pub sweeps: usize,
}

/// Dense solve of Qπ = 0, Σπ = 1 on `states` (rows of the last state replaced
/// by normalization).
fn dense_solve(chain: &HistoryChain, states: &[usize]) -> Result<Vec<f64>> {
    let m = states.len();
    let mut pos = alloc::vec![usize::MAX; chain.n_states()];
    for (k, &s) in states.iter().enumerate() {
        pos[s] = k;
    }
    let mut a = RMat::zeros(m, m);
    for (k, &s) in states.iter().enumerate() {
        for &(from, r) in &chain.incoming[s] {
            if pos[from] != usize::MAX {
                a[(k, pos[from])] += r;
            }
        }
        a[(k, k)] -= chain.exit[s];
    }
    for k in 0..m {
        a[(m - 1, k)] = 1.0;
    }
    let mut b = DVector::zeros(m);
    b[m - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or_else(|| Error::Numerical("singular generator".into()))?;
    let mut pi = alloc::vec![0.0; chain.n_states()];
    for (k, &s) in states.iter().enumerate() {
        pi[s] = x[k].max(0.0);
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    Ok(pi)
}

fn gauss_seidel(chain: &HistoryChain, tol: f64) -> Result<(Vec<f64>, usize)> {
    let n = chain.n_states();
    let mut pi = alloc::vec![1.0 / n as f64; n];
    for sweep in 1..=MAX_SWEEPS {
        for j in 0..n {
            let inflow: f64 = chain.incoming[j].iter().map(|&(i, r)| r * pi[i]).sum();
            pi[j] = inflow / chain.exit[j];
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        if sweep % 10 == 0 && chain.residual(&pi) < tol {
            return Ok((pi, sweep));
        }
    }
    Err(Error::Numerical(alloc::format!("Gauss-Seidel did not reach {tol:e} in {MAX_SWEEPS} sweeps")))
}

/// Stationary distribution over all (T+1)·2^T states. For κ = 0 the
/// transient states carry zero weight.
pub fn stationary_distribution(chain: &HistoryChain) -> Result<Stationary> {
    let (pi, method, sweeps) = if chain.kappa == 0.0 {
        (dense_solve(chain, &chain.reachable())?, StationaryMethod::DenseRecurrent, 0)
    } else if chain.n_states() <= DENSE_STATE_LIMIT {
        let all: Vec<usize> = (0..chain.n_states()).collect();
        (dense_solve(chain, &all)?, StationaryMethod::Dense, 0)
    } else {
        let (pi, sweeps) = gauss_seidel(chain, STATIONARY_TOL)?;
        (pi, StationaryMethod::GaussSeidel, sweeps)
    };
    let residual = chain.residual(&pi);
    Ok(Stationary { pi, residual, method, sweeps })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum Readout {
    /// Register equal to 1^T at any clock value.
    #[default]
    Register,
    /// Register equal to 1^T given clock = T.
    ClockConditioned,
}

pub fn output_overlap(chain: &HistoryChain, st: &Stationary, readout: Readout) -> f64 {
    let ones = (1usize << chain.t) - 1;
    match readout {
        Readout::Register => (0..=chain.t).map(|c| st.pi[chain.index(ones, c)]).sum(),
        Readout::ClockConditioned => {
            let block: f64 = (0..1 << chain.t).map(|r| st.pi[chain.index(r, chain.t)]).sum();
            if block > 0.0 {
                st.pi[chain.index(ones, chain.t)] / block
            } else {
                0.0
            }
        }
    }
}

/// Register-readout overlap of the stationary state.
pub fn overlap(t: usize, kappa: f64) -> Result<f64> {
    let chain = build_chain(t, kappa)?;
    let st = stationary_distribution(&chain)?;
    Ok(output_overlap(&chain, &st, Readout::Register))
}
