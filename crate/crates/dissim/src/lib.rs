//! Experiment runner for dissipative circuit simulations: configuration,
//! seeded parallel sampling, experiment drivers and CSV/JSON records.

pub mod config;
pub mod error;
pub mod experiments;
pub mod pool;
pub mod record;
pub mod train;

pub use config::ExperimentConfig;
pub use error::{RunError, RunResult};
pub use experiments::run;
pub use record::{ExperimentRecord, RunOutput};
