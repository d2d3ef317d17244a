//! Experiment drivers. Each returns a record plus a JSON summary.

pub mod bounds;
pub mod design;
pub mod entropy;
pub mod steady;
pub mod toric;
pub mod variance;
pub mod vwc;

use std::time::Instant;

use dissim_core::gradients::GradientMethod;

use crate::config::{Backend, Experiment, ExperimentConfig, GradientChoice};
use crate::error::{RunError, RunResult};
use crate::record::RunOutput;

/// Largest register held as a dense density matrix.
pub const DENSE_MAX_QUBITS: usize = 10;
/// Largest register held in factored form.
pub const MIXTURE_MAX_QUBITS: usize = 16;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ResolvedBackend {
    Dense,
    Mixture,
}

/// Backend for `n` qubits, or a budget error.
pub fn budget_backend(choice: Backend, n: usize) -> RunResult<ResolvedBackend> {
    let b = match choice {
        Backend::Dense => ResolvedBackend::Dense,
        Backend::Mixture | Backend::Auto => ResolvedBackend::Mixture,
    };
    let limit = match b {
        ResolvedBackend::Dense => DENSE_MAX_QUBITS,
        ResolvedBackend::Mixture => MIXTURE_MAX_QUBITS,
    };
    if n > limit {
        return Err(RunError::Budget(format!("{n} qubits exceed the {b:?} limit of {limit}")));
    }
    Ok(b)
}

pub fn check_dense(n: usize) -> RunResult<()> {
    budget_backend(Backend::Dense, n).map(|_| ())
}

pub fn gradient_method(choice: GradientChoice, fd_step: f64) -> GradientMethod {
    match choice {
        GradientChoice::Commutator => GradientMethod::Commutator,
        GradientChoice::ParameterShift => GradientMethod::ParameterShift,
        GradientChoice::FiniteDifference => GradientMethod::FiniteDifference { h: fd_step },
    }
}

/// Validate, dispatch and time one experiment.
pub fn run(cfg: &ExperimentConfig) -> RunResult<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let pool = crate::pool::thread_pool()?;
    let mut out = pool.install(|| match cfg.experiment {
        Experiment::UnitaryBp => variance::run(cfg),
        Experiment::ToricNibp => toric::run(cfg),
        Experiment::SteadyState => steady::run(cfg),
        Experiment::Vwc => vwc::run(cfg),
        Experiment::Entropy => entropy::run(cfg),
        Experiment::DesignCheck => design::run(cfg),
        Experiment::Bounds => bounds::run(cfg),
    })?;
    out.wall_clock_s = start.elapsed().as_secs_f64();
    if let Some(path) = &cfg.output {
        out.write(path, cfg.format)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_limits() {
        assert_eq!(budget_backend(Backend::Auto, 12).unwrap(), ResolvedBackend::Mixture);
        assert_eq!(budget_backend(Backend::Dense, 12).unwrap_err().exit_code(), 3);
        assert_eq!(budget_backend(Backend::Mixture, 17).unwrap_err().exit_code(), 3);
    }
}
