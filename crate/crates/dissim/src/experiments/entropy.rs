//! Entropy bounds against dense simulation, and optionally the trained toric entropy scaling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use dissim_core::ensembles::{ginibre, haar_unitary};
use dissim_core::entropy::{depolarizing_layer, layered_bound, single_layer_bound, EntropyBoundParams};
use dissim_core::linalg::{c, gates};
use dissim_core::state::{DensityState, SimState};

use super::check_dense;
use crate::config::ExperimentConfig;
use crate::error::RunResult;
use crate::pool::par_samples;
use crate::record::{Cell, ExperimentRecord, RunOutput};

/// Slack allowed for eigenvalue round-off in the entropy.
pub const ENTROPY_SLACK: f64 = 1e-9;

/// GG†/Tr with G an n-qubit Ginibre matrix of `rank` columns.
pub fn random_density(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityState {
    let g = ginibre(1 << n, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityState::from_operator(m / c(tr, 0.0)).expect("square power-of-two matrix")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleLayerCase {
    pub n: usize,
    pub n_c: usize,
    pub p: f64,
    pub s0: f64,
    pub entropy: f64,
    pub bound: f64,
}

impl SingleLayerCase {
    pub fn holds(&self) -> bool {
        self.entropy >= self.bound - ENTROPY_SLACK
    }
}

/// Random state, random p and n_c ≤ n, one layer of depolarizing noise on the unprotected qubits.
pub fn single_layer_cases(cfg: &ExperimentConfig) -> RunResult<Vec<SingleLayerCase>> {
    let max_n = cfg.entropy.max_qubits;
    check_dense(max_n)?;
    par_samples(cfg.entropy.configs, cfg.seed, |_, rng| {
        let n = rng.random_range(1..=max_n);
        let n_c = rng.random_range(0..=n);
        let p: f64 = rng.random();
        let rank = rng.random_range(1..=1usize << n);
        let mut rho = random_density(n, rank, rng);
        let s0 = rho.entropy().max(0.0);
        depolarizing_layer(&mut rho, n_c, p);
        let bound = single_layer_bound(&EntropyBoundParams { n, n_c, p, layers: 1, s0 })?;
        Ok(SingleLayerCase { n, n_c, p, s0, entropy: rho.entropy(), bound })
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayeredCase {
    pub n: usize,
    pub n_c: usize,
    pub p: f64,
    pub layers: usize,
    pub entropy: f64,
    pub bound: f64,
}

/// Random single-qubit gates and a CNOT chain, then depolarizing noise on the
/// first n − n_c qubits, repeated; the entropy is recorded after every layer.
pub fn layered_cases(cfg: &ExperimentConfig) -> RunResult<Vec<LayeredCase>> {
    let max_n = cfg.entropy.max_qubits;
    check_dense(max_n)?;
    let max_l = cfg.entropy.max_layers;
    let grid: Vec<(usize, usize)> = (1..=max_n).flat_map(|n| [(n, 0), (n, n / 2)]).collect();
    let per = par_samples(grid.len(), cfg.seed, |i, rng| {
        let (n, n_c) = grid[i];
        let p = rng.random_range(0.02..0.3);
        let mut rho = DensityState::zero(n);
        let cnot = gates::cnot();
        let mut out = Vec::with_capacity(max_l);
        for layer in 1..=max_l {
            for q in 0..n {
                rho.apply_unitary(&haar_unitary(2, rng), &[q]);
            }
            for q in 1..n {
                rho.apply_unitary(&cnot, &[q - 1, q]);
            }
            depolarizing_layer(&mut rho, n_c, p);
            let bound = layered_bound(&EntropyBoundParams { n, n_c, p, layers: layer, s0: 0.0 })?;
            out.push(LayeredCase { n, n_c, p, layers: layer, entropy: rho.entropy(), bound });
        }
        Ok(out)
    })?;
    Ok(per.into_iter().flatten().collect())
}

pub fn run(cfg: &ExperimentConfig) -> RunResult<RunOutput> {
    let single = single_layer_cases(cfg)?;
    let layered = layered_cases(cfg)?;
    let mut rec =
        ExperimentRecord::new(cfg, &["kind", "n", "n_c", "p", "layers", "s0", "entropy", "bound", "holds"]);
    for s in &single {
        rec.push(vec![
            "single".into(),
            s.n.into(),
            s.n_c.into(),
            s.p.into(),
            1usize.into(),
            s.s0.into(),
            s.entropy.into(),
            s.bound.into(),
            usize::from(s.holds()).into(),
        ]);
    }
    for l in &layered {
        let holds = l.entropy >= l.bound - ENTROPY_SLACK;
        rec.push(vec![
            "layered".into(),
            l.n.into(),
            l.n_c.into(),
            l.p.into(),
            l.layers.into(),
            0.0.into(),
            l.entropy.into(),
            l.bound.into(),
            usize::from(holds).into(),
        ]);
    }
    let mut summary = json!({
        "single_layer_violations": single.iter().filter(|s| !s.holds()).count(),
        "layered_violations": layered.iter().filter(|l| l.entropy < l.bound - ENTROPY_SLACK).count(),
    });
    if cfg.entropy.toric {
        let study = super::toric::study(cfg)?;
        for (label, pts) in [("toric_unitary", &study.unitary), ("toric_dissipative", &study.dissipative)] {
            for p in pts {
                rec.push(vec![
                    Cell::from(label),
                    p.n.into(),
                    0usize.into(),
                    cfg.noise.p().into(),
                    0usize.into(),
                    0.0.into(),
                    (p.entropy * p.n as f64).into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                ]);
            }
            summary[label] = json!(pts.iter().map(|p| json!({"n": p.n, "entropy_per_qubit": p.entropy})).collect::<Vec<_>>());
        }
    }
    Ok(RunOutput { record: rec, config: cfg.resolved(), summary, wall_clock_s: 0.0 })
}
