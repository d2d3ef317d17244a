//! Sampled cost and gradient variances of random dissipative circuits against the analytic lower bounds.

use serde_json::json;

use dissim_core::bounds::{gradient_variance_lower_bound, variance_lower_bound, BoundParams, BoundReport};
use dissim_core::circuit::{build_dissipative_circuit, BrickStyle, DissipativeSpec, NoiseModel, Probe};
use dissim_core::ensembles::GateEnsemble;
use dissim_core::gradients::CostSpec;
use dissim_core::lattice::place_reset_sites;
use dissim_core::pauli::{ObservableDecomposition, Pauli, PauliString};
use dissim_core::state::DensityState;
use dissim_core::variance::{VarianceEstimate, Z_99};

use super::check_dense;
use crate::config::{EnsembleChoice, ExperimentConfig};
use crate::error::{RunError, RunResult};
use crate::pool::{clifford2, par_samples};
use crate::record::{ExperimentRecord, RunOutput};

/// Reset fraction used when none is configured.
pub const DEFAULT_RESET_FRACTION: f64 = 0.5;
/// ‖X/2‖∞ for the probe rotation.
pub const PROBE_NORM: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct BoundPoint {
    pub n: usize,
    pub n_r: usize,
    pub cost: VarianceEstimate,
    pub cost_bound: BoundReport,
    pub grad: VarianceEstimate,
    pub grad_bound: BoundReport,
}

impl BoundPoint {
    pub fn cost_consistent(&self) -> bool {
        self.cost.consistent_with_lower_bound(self.cost_bound.bound, Z_99)
    }

    pub fn grad_consistent(&self) -> bool {
        self.grad.consistent_with_lower_bound(self.grad_bound.bound, Z_99)
    }
}

fn ensemble(choice: EnsembleChoice) -> GateEnsemble {
    match choice {
        EnsembleChoice::Haar => GateEnsemble::Haar,
        EnsembleChoice::Clifford | EnsembleChoice::Clifford1 => GateEnsemble::clifford((*clifford2()).clone()),
    }
}

pub fn point(cfg: &ExperimentConfig, n: usize) -> RunResult<BoundPoint> {
    check_dense(n)?;
    let a = &cfg.ansatz;
    let frac = a.reset_fraction.unwrap_or(DEFAULT_RESET_FRACTION);
    let n_r = ((frac * n as f64).round() as usize).clamp(1, n);
    let lattice = place_reset_sites(n, n_r, a.d)?;
    if a.obs_site >= n {
        return Err(RunError::config(format!("ansatz.obs_site: {} outside {n} qubits", a.obs_site)));
    }
    let p = cfg.noise.p();
    let noise = if p > 0.0 { NoiseModel::Depolarizing(p) } else { NoiseModel::None };
    let d_max = noise.d_max()?;
    let spec = DissipativeSpec {
        lattice,
        depth: a.layers,
        jumps: a.jumps,
        q: a.q,
        noise,
        style: BrickStyle::Full,
        probe: Some(Probe { site: a.obs_site, layers_from_end: 1 }),
    };
    let ens = ensemble(a.ensemble);
    let obs = ObservableDecomposition::single(PauliString::single(n, a.obs_site, Pauli::Z)?);
    let pairs = par_samples(cfg.samples, cfg.seed, |_, rng| {
        let prog = build_dissipative_circuit(&spec, &ens, rng)?;
        let cs = CostSpec::new(prog, obs.clone(), DensityState::zero(n))?;
        Ok((cs.cost(&[0.0])?, cs.gradient_commutator(&[0.0], 0)?))
    })?;
    let costs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let grads: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let params = BoundParams {
        d: a.d,
        k: cfg.bounds.k,
        l: a.layers,
        n,
        n_r,
        q: a.q,
        d_max,
        c_const: cfg.bounds.c_const,
        i: 1,
        h_norm: PROBE_NORM,
        obs_weight: obs.nontrivial_weight(),
    };
    Ok(BoundPoint {
        n,
        n_r,
        cost: VarianceEstimate::from_values(&costs, cfg.seed)?,
        cost_bound: variance_lower_bound(&params)?,
        grad: VarianceEstimate::from_values(&grads, cfg.seed)?,
        grad_bound: gradient_variance_lower_bound(&params)?,
    })
}

pub fn points(cfg: &ExperimentConfig) -> RunResult<Vec<BoundPoint>> {
    cfg.ansatz.qubits.iter().map(|&n| point(cfg, n)).collect()
}

pub fn run(cfg: &ExperimentConfig) -> RunResult<RunOutput> {
    let pts = points(cfg)?;
    let mut rec = ExperimentRecord::new(
        cfg,
        &[
            "n",
            "n_r",
            "cost_variance",
            "cost_stderr",
            "cost_bound",
            "cost_consistent",
            "grad_variance",
            "grad_stderr",
            "grad_bound",
            "grad_consistent",
            "samples",
        ],
    );
    for p in &pts {
        rec.push(vec![
            p.n.into(),
            p.n_r.into(),
            p.cost.variance.into(),
            p.cost.stderr.into(),
            p.cost_bound.bound.into(),
            usize::from(p.cost_consistent()).into(),
            p.grad.variance.into(),
            p.grad.stderr.into(),
            p.grad_bound.bound.into(),
            usize::from(p.grad_consistent()).into(),
            p.cost.samples.into(),
        ]);
    }
    Ok(RunOutput {
        record: rec,
        config: cfg.resolved(),
        summary: json!({
            "all_consistent": pts.iter().all(|p| p.cost_consistent() && p.grad_consistent()),
            "log_cost_bounds": pts.iter().map(|p| p.cost_bound.log_bound).collect::<Vec<_>>(),
            "log_grad_bounds": pts.iter().map(|p| p.grad_bound.log_bound).collect::<Vec<_>>(),
        }),
        wall_clock_s: 0.0,
    })
}
