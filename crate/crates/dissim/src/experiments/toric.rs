//! Toric-ladder study: gradient variance of A_0, trained value of B_0, mean
//! stabilizer value and entropy for the noisy rotation ansatz and the stabilizer-pumping ansatz.

use serde_json::json;

use dissim_core::gradients::CostSpec;
use dissim_core::pauli::ObservableDecomposition;
use dissim_core::state::{DensityState, SimState};
use dissim_core::toric::{
    toric_unitary_ansatz, AncillaMode, StabilizerKind, ToricDissipative, ToricLattice,
};
use dissim_core::variance::{scaling_fit, ScalingFit, VarianceEstimate};

use super::{check_dense, gradient_method, variance::fit_json};
use crate::config::{ExperimentConfig, UnitaryStart};
use crate::error::{RunError, RunResult};
use crate::pool::{keyed_angle, par_variance};
use crate::record::{ExperimentRecord, RunOutput};
use crate::train::{gradient_descent, TrainReport};

/// Sample stream reserved for the training start point.
const TRAIN_STREAM: u64 = u64::MAX;

#[derive(Clone, Debug)]
pub struct ToricPoint {
    pub n: usize,
    pub grad_variance: VarianceEstimate,
    pub train: TrainReport,
    /// ⟨B_0⟩ after training.
    pub term: f64,
    /// Mean stabilizer value after training.
    pub energy: f64,
    /// Entropy of the system qubits divided by n.
    pub entropy: f64,
}

#[derive(Clone, Debug)]
pub struct ToricStudy {
    pub unitary: Vec<ToricPoint>,
    pub dissipative: Vec<ToricPoint>,
}

/// Σ_i S_i / (number of terms), embedded in `total` qubits.
pub fn mean_stabilizer(lat: &ToricLattice, total: usize) -> RunResult<ObservableDecomposition> {
    let scale = -1.0 / lat.n_terms() as f64;
    let terms = lat.hamiltonian(total).terms().iter().map(|(a, p)| (a * scale, p.clone())).collect();
    Ok(ObservableDecomposition::new(terms)?)
}

/// A_0, the local observable whose gradient variance is reported.
pub fn variance_term(lat: &ToricLattice, total: usize) -> ObservableDecomposition {
    ObservableDecomposition::single(lat.stabilizer(StabilizerKind::Plaquette, 0, total))
}

/// B_0, the single term reported after training. It is +1 on |0…0⟩, so the
/// unitary value measures noise concentration only.
pub fn trained_term(lat: &ToricLattice, total: usize) -> ObservableDecomposition {
    ObservableDecomposition::single(lat.stabilizer(StabilizerKind::Vertex, 0, total))
}

fn lattice(n: usize) -> RunResult<ToricLattice> {
    ToricLattice::with_qubits(n).map_err(|_| RunError::config(format!("ansatz.qubits: toric sizes must be even and >= 4, got {n}")))
}

fn summarize(lat: &ToricLattice, rho: &DensityState) -> RunResult<(f64, f64, f64)> {
    let n = lat.n();
    let term = rho.expectation(&trained_term(lat, rho.n()));
    let energy = lat.normalized_energy(rho);
    let sys = if rho.n() == n { rho.clone() } else { rho.partial_trace(&(0..n).collect::<Vec<_>>())? };
    Ok((term, energy, sys.entropy() / n as f64))
}

fn fd_gradient(cost: &dyn Fn(&[f64]) -> RunResult<f64>, theta: &[f64], h: f64) -> RunResult<Vec<f64>> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|mu| {
            t[mu] = theta[mu] + h;
            let plus = cost(&t)?;
            t[mu] = theta[mu] - h;
            let minus = cost(&t)?;
            t[mu] = theta[mu];
            Ok((plus - minus) / (2.0 * h))
        })
        .collect()
}

/// Start of unitary training. The warm start turns |0…0⟩ into a plaquette
/// eigenstate with one A rotation and one mixer layer.
pub fn unitary_start(cfg: &ExperimentConfig, n_params: usize) -> Vec<f64> {
    match cfg.toric.unitary_start {
        UnitaryStart::Warm => {
            let mut t = vec![0.0; n_params];
            t[0] = std::f64::consts::FRAC_PI_2;
            t[2] = std::f64::consts::FRAC_PI_4;
            t
        }
        UnitaryStart::Random => (0..n_params).map(|k| keyed_angle(cfg.seed, TRAIN_STREAM, k as u64)).collect(),
    }
}

fn unitary_point(cfg: &ExperimentConfig, n: usize) -> RunResult<ToricPoint> {
    check_dense(n)?;
    let lat = lattice(n)?;
    let layers = if cfg.toric.unitary_layers == 0 { lat.width() } else { cfg.toric.unitary_layers };
    let an = toric_unitary_ansatz(&lat, layers, cfg.noise.p())?;
    let local = CostSpec::new(an.program.clone(), variance_term(&lat, n), DensityState::zero(n))?;
    let method = gradient_method(cfg.optimizer.gradient, cfg.optimizer.fd_step);
    let n_params = an.program.n_params();
    let seed = cfg.seed;
    let grad_variance = par_variance(cfg.samples, seed, |i, _| {
        let theta: Vec<f64> = (0..n_params).map(|k| keyed_angle(seed, i as u64, k as u64)).collect();
        Ok(local.gradient(&theta, an.grad_param, method)?)
    })?;
    let spec = CostSpec::new(an.program.clone(), mean_stabilizer(&lat, n)?, DensityState::zero(n))?;
    let theta0 = unitary_start(cfg, n_params);
    let train = gradient_descent(
        &theta0,
        cfg.optimizer.step,
        cfg.optimizer.iterations,
        |t| Ok(-spec.cost(t)?),
        |t| Ok(spec.gradient_vector(t, method)?.into_iter().map(|g| -g).collect()),
    )?;
    let rho = an.program.evaluate_density(&train.theta, &DensityState::zero(n))?;
    let (term, energy, entropy) = summarize(&lat, &rho)?;
    Ok(ToricPoint { n, grad_variance, train, term, energy, entropy })
}

fn dissipative_point(cfg: &ExperimentConfig, n: usize) -> RunResult<ToricPoint> {
    let lat = lattice(n)?;
    let jumps = cfg.toric.jumps;
    let untied = ToricDissipative { lattice: lat, jumps, p: cfg.noise.p(), mode: AncillaMode::Shared, tied: false };
    let total = untied.total_qubits();
    check_dense(total)?;
    let obs = mean_stabilizer(&lat, total)?;
    let local = variance_term(&lat, total);
    let method = gradient_method(cfg.optimizer.gradient, cfg.optimizer.fd_step);
    let prefix = untied.jump_range(0..jumps - 1)?;
    let last = untied.jump_range(jumps - 1..jumps)?;
    let grad_param = untied.slots(jumps - 1).0;
    let n_params = untied.n_params();
    let seed = cfg.seed;
    let start = untied.initial_state();
    let grad_variance = par_variance(cfg.samples, seed, |i, _| {
        let theta: Vec<f64> = (0..n_params).map(|k| keyed_angle(seed, i as u64, k as u64)).collect();
        let mut rho = start.clone();
        prefix.evaluate(&theta, &mut rho)?;
        let spec = CostSpec::new(last.clone(), local.clone(), rho)?;
        Ok(spec.gradient(&theta, grad_param, method)?)
    })?;

    let tied = ToricDissipative { tied: true, ..untied };
    let program = tied.build()?.program;
    let spec = CostSpec::new(program.clone(), obs, start.clone())?;
    let cost = |t: &[f64]| -> RunResult<f64> { Ok(-spec.cost(t)?) };
    let theta0 = vec![cfg.toric.dissipative_start; 2];
    let train = gradient_descent(&theta0, cfg.optimizer.step, cfg.toric.dissipative_iterations, cost, |t| {
        fd_gradient(&cost, t, cfg.optimizer.fd_step)
    })?;
    let rho = program.evaluate_density(&train.theta, &start)?;
    let (term, energy, entropy) = summarize(&lat, &rho)?;
    Ok(ToricPoint { n, grad_variance, train, term, energy, entropy })
}

pub fn study(cfg: &ExperimentConfig) -> RunResult<ToricStudy> {
    let mut unitary = Vec::new();
    let mut dissipative = Vec::new();
    for &n in &cfg.ansatz.qubits {
        unitary.push(unitary_point(cfg, n)?);
        dissipative.push(dissipative_point(cfg, n)?);
    }
    Ok(ToricStudy { unitary, dissipative })
}

/// Fits of ln(variance) and ln(term) against n.
pub fn fits(points: &[ToricPoint]) -> (Option<ScalingFit>, Option<ScalingFit>) {
    let var: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.grad_variance.variance)).collect();
    let term: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.term)).collect();
    (scaling_fit(&var).ok(), scaling_fit(&term).ok())
}

pub fn record(cfg: &ExperimentConfig, s: &ToricStudy) -> ExperimentRecord {
    let mut rec = ExperimentRecord::new(
        cfg,
        &["ansatz", "n", "grad_variance", "grad_stderr", "samples", "term", "energy", "entropy_per_qubit", "train_iterations"],
    );
    for (label, pts) in [("unitary", &s.unitary), ("dissipative", &s.dissipative)] {
        for p in pts {
            rec.push(vec![
                label.into(),
                p.n.into(),
                p.grad_variance.variance.into(),
                p.grad_variance.stderr.into(),
                p.grad_variance.samples.into(),
                p.term.into(),
                p.energy.into(),
                p.entropy.into(),
                p.train.iterations.into(),
            ]);
        }
    }
    rec
}

pub fn run(cfg: &ExperimentConfig) -> RunResult<RunOutput> {
    let s = study(cfg)?;
    let (uv, ut) = fits(&s.unitary);
    let (dv, dt) = fits(&s.dissipative);
    let curves = |pts: &[ToricPoint]| pts.iter().map(|p| json!({"n": p.n, "theta": p.train.theta, "costs": p.train.costs, "diverged": p.train.diverged})).collect::<Vec<_>>();
    Ok(RunOutput {
        record: record(cfg, &s),
        config: cfg.resolved(),
        summary: json!({
            "unitary": {"variance_fit": fit_json(&uv), "term_fit": fit_json(&ut), "training": curves(&s.unitary)},
            "dissipative": {"variance_fit": fit_json(&dv), "term_fit": fit_json(&dt), "training": curves(&s.dissipative)},
        }),
        wall_clock_s: 0.0,
    })
}
