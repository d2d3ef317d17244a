//! Gradient-variance scaling of layered ansätze with optional resets.

use serde_json::json;

use dissim_core::circuit::{brickwork_ansatz, qaoa_ansatz, Ansatz, ParamPlan, ResetPlan};
use dissim_core::gradients::{CostSpec, GradientMethod};
use dissim_core::pauli::{ObservableDecomposition, Pauli, PauliString};
use dissim_core::state::{DensityState, MixtureState, SimState};
use dissim_core::variance::{scaling_fit, ScalingFit, VarianceEstimate};

use super::{budget_backend, gradient_method, ResolvedBackend};
use crate::config::{AnsatzKind, ExperimentConfig};
use crate::error::RunResult;
use crate::pool::{keyed_angle, par_variance};
use crate::record::{ExperimentRecord, RunOutput};

#[derive(Clone, Debug)]
pub struct VarianceSeries {
    pub label: String,
    pub points: Vec<(usize, VarianceEstimate)>,
    pub fit: Option<ScalingFit>,
}

/// Position-stable key of brickwork slot `mu`: (block, brick from the left, slot).
/// Bricks at the same place get the same angle for every n.
pub fn brickwork_key(n: usize, mu: usize) -> u64 {
    let per_block = 4 * (n / 2);
    let (block, rem) = (mu / per_block, mu % per_block);
    (((block * 1024) + rem / 4) * 4 + rem % 4) as u64
}

pub fn build_ansatz(cfg: &ExperimentConfig, n: usize) -> RunResult<Ansatz> {
    let a = &cfg.ansatz;
    let reset = match a.reset_stride()? {
        Some(stride) => Some(ResetPlan::strided(n, stride, a.reset_every, a.q)?),
        None => None,
    };
    let plan = if a.correlated { ParamPlan::Correlated { period: a.correlation_period } } else { ParamPlan::Independent };
    Ok(match a.kind {
        AnsatzKind::Brickwork => brickwork_ansatz(n, a.layers, reset.as_ref(), plan, a.obs_site)?,
        AnsatzKind::Qaoa => qaoa_ansatz(n, a.layers, reset.as_ref(), plan, a.obs_site)?,
    })
}

pub fn series_label(cfg: &ExperimentConfig) -> String {
    let kind = if cfg.ansatz.reset_fraction.is_some() { "dissipative" } else { "unitary" };
    let plan = if cfg.ansatz.correlated { "correlated" } else { "independent" };
    format!("{kind}/{plan}")
}

fn estimate<S: SimState + Send + Sync>(
    cfg: &ExperimentConfig,
    n: usize,
    an: &Ansatz,
    initial: S,
) -> RunResult<VarianceEstimate> {
    let obs = ObservableDecomposition::single(PauliString::single(n, cfg.ansatz.obs_site, Pauli::Z)?);
    let spec = CostSpec::new(an.program.clone(), obs, initial)?;
    let method: GradientMethod = gradient_method(cfg.ansatz.gradient, cfg.ansatz.fd_step);
    let keys: Vec<u64> = (0..an.program.n_params())
        .map(|mu| match cfg.ansatz.kind {
            AnsatzKind::Brickwork => brickwork_key(n, mu),
            AnsatzKind::Qaoa => mu as u64,
        })
        .collect();
    let seed = cfg.seed;
    par_variance(cfg.samples, seed, |i, _| {
        let theta: Vec<f64> = keys.iter().map(|&k| keyed_angle(seed, i as u64, k)).collect();
        Ok(spec.gradient(&theta, an.grad_param, method)?)
    })
}

/// Variance of ∂C/∂θ over uniform angles for each size in `ansatz.qubits`.
pub fn gradient_variance_series(cfg: &ExperimentConfig) -> RunResult<VarianceSeries> {
    let mut points = Vec::new();
    for &n in &cfg.ansatz.qubits {
        let an = build_ansatz(cfg, n)?;
        let est = match budget_backend(cfg.ansatz.backend, n)? {
            ResolvedBackend::Dense => estimate(cfg, n, &an, DensityState::zero(n))?,
            ResolvedBackend::Mixture => estimate(cfg, n, &an, MixtureState::zero(n))?,
        };
        points.push((n, est));
    }
    let series: Vec<(f64, f64)> = points.iter().map(|(n, e)| (*n as f64, e.variance)).collect();
    let fit = scaling_fit(&series).ok();
    Ok(VarianceSeries { label: series_label(cfg), points, fit })
}

pub fn fit_json(fit: &Option<ScalingFit>) -> serde_json::Value {
    match fit {
        Some(f) => json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "r2": f.r2,
            "regime": format!("{:?}", f.regime).to_lowercase(),
        }),
        None => serde_json::Value::Null,
    }
}

pub fn run(cfg: &ExperimentConfig) -> RunResult<RunOutput> {
    let s = gradient_variance_series(cfg)?;
    let mut rec = ExperimentRecord::new(cfg, &["series", "n", "mean", "variance", "stderr", "samples"]);
    for (n, e) in &s.points {
        rec.push(vec![
            s.label.as_str().into(),
            (*n).into(),
            e.mean.into(),
            e.variance.into(),
            e.stderr.into(),
            e.samples.into(),
        ]);
    }
    Ok(RunOutput {
        record: rec,
        config: cfg.resolved(),
        summary: json!({ "series": s.label, "fit": fit_json(&s.fit) }),
        wall_clock_s: 0.0,
    })
}
