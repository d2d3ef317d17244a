//! Stationary output overlap of the computation-history chain over a (T, κ) grid.

use rayon::prelude::*;
use serde_json::json;

use dissim_core::variance::linear_fit;
use dissim_core::vwc::{build_chain, output_overlap, stationary_distribution, Readout};

use crate::config::{ExperimentConfig, ReadoutChoice};
use crate::error::{RunError, RunResult};
use crate::record::{ExperimentRecord, RunOutput};

#[derive(Clone, Debug, PartialEq)]
pub struct VwcPoint {
    pub gates: usize,
    pub kappa: f64,
    pub overlap: f64,
    pub residual: f64,
}

pub fn grid(cfg: &ExperimentConfig) -> RunResult<Vec<VwcPoint>> {
    let readout = match cfg.vwc.readout {
        ReadoutChoice::Register => Readout::Register,
        ReadoutChoice::ClockConditioned => Readout::ClockConditioned,
    };
    let cells: Vec<(f64, usize)> =
        cfg.vwc.kappa.iter().flat_map(|&k| cfg.vwc.gates.iter().map(move |&t| (k, t))).collect();
    cells
        .into_par_iter()
        .map(|(kappa, gates)| {
            let chain = build_chain(gates, kappa)?;
            let st = stationary_distribution(&chain)?;
            if st.residual >= dissim_core::vwc::STATIONARY_TOL {
                return Err(RunError::Numerical(format!("stationary residual {:e} at T={gates}, κ={kappa}", st.residual)));
            }
            Ok(VwcPoint { gates, kappa, overlap: output_overlap(&chain, &st, readout), residual: st.residual })
        })
        .collect()
}

/// Slope and R² of ln(overlap) against T for one κ.
pub fn log_fit(points: &[VwcPoint], kappa: f64) -> Option<(f64, f64)> {
    let sel: Vec<&VwcPoint> = points.iter().filter(|p| p.kappa == kappa && p.overlap > 0.0).collect();
    let xs: Vec<f64> = sel.iter().map(|p| p.gates as f64).collect();
    let ys: Vec<f64> = sel.iter().map(|p| p.overlap.ln()).collect();
    linear_fit(&xs, &ys).ok().map(|(s, _, r2)| (s, r2))
}

pub fn run(cfg: &ExperimentConfig) -> RunResult<RunOutput> {
    let pts = grid(cfg)?;
    let mut rec = ExperimentRecord::new(cfg, &["T", "kappa", "overlap", "residual"]);
    for p in &pts {
        rec.push(vec![p.gates.into(), p.kappa.into(), p.overlap.into(), p.residual.into()]);
    }
    let fits: Vec<serde_json::Value> = cfg
        .vwc
        .kappa
        .iter()
        .map(|&k| {
            let f = log_fit(&pts, k);
            json!({"kappa": k, "log_slope": f.map(|f| f.0), "r2": f.map(|f| f.1)})
        })
        .collect();
    let history_error = pts
        .iter()
        .filter(|p| p.kappa == 0.0)
        .map(|p| (p.overlap - 1.0 / (p.gates + 1) as f64).abs())
        .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))));
    Ok(RunOutput {
        record: rec,
        config: cfg.resolved(),
        summary: json!({"fits": fits, "max_error_vs_1_over_T_plus_1": history_error}),
        wall_clock_s: 0.0,
    })
}
