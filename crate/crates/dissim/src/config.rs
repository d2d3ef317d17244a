//! Experiment configuration. Every field has a default; unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{RunError, RunResult};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[default]
    UnitaryBp,
    ToricNibp,
    SteadyState,
    Vwc,
    Entropy,
    DesignCheck,
    Bounds,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    #[default]
    Brickwork,
    Qaoa,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleChoice {
    Haar,
    #[default]
    Clifford,
    Clifford1,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GradientChoice {
    #[default]
    Commutator,
    ParameterShift,
    FiniteDifference,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Auto,
    Dense,
    Mixture,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    #[default]
    Depolarizing,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DesignMode {
    #[default]
    Exact,
    Sampled,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryStart {
    /// θ_A = π/2 and θ_M = π/4 in the first layer, every other angle 0.
    #[default]
    Warm,
    /// Uniform angles from the training stream.
    Random,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutChoice {
    #[default]
    Register,
    ClockConditioned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzConfig {
    pub kind: AnsatzKind,
    pub qubits: Vec<usize>,
    pub d: usize,
    /// Total layers for brickwork and QAOA; layers per jump (L) for random dissipative circuits.
    pub layers: usize,
    /// Jumps (M).
    pub jumps: usize,
    pub q: f64,
    /// Fraction of reset qubits; absent for a purely unitary circuit.
    pub reset_fraction: Option<f64>,
    pub reset_every: usize,
    pub ensemble: EnsembleChoice,
    pub correlated: bool,
    pub correlation_period: usize,
    pub obs_site: usize,
    pub gradient: GradientChoice,
    pub fd_step: f64,
    pub backend: Backend,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig {
            kind: AnsatzKind::Brickwork,
            qubits: vec![4, 6, 8],
            d: 1,
            layers: 40,
            jumps: 1,
            q: 1.0,
            reset_fraction: None,
            reset_every: 5,
            ensemble: EnsembleChoice::Clifford,
            correlated: false,
            correlation_period: 5,
            obs_site: 1,
            gradient: GradientChoice::Commutator,
            fd_step: 1e-5,
            backend: Backend::Auto,
        }
    }
}

impl AnsatzConfig {
    /// Reset stride 1/fraction, which must be an integer.
    pub fn reset_stride(&self) -> RunResult<Option<usize>> {
        let Some(f) = self.reset_fraction else { return Ok(None) };
        if !(f > 0.0 && f <= 1.0) {
            return Err(RunError::config(format!("ansatz.reset_fraction: {f} outside (0, 1]")));
        }
        let stride = (1.0 / f).round();
        if ((1.0 / f) - stride).abs() > 1e-9 {
            return Err(RunError::config(format!("ansatz.reset_fraction: 1/{f} is not an integer stride")));
        }
        Ok(Some(stride as usize))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub rate: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { kind: NoiseKind::Depolarizing, rate: 0.1 }
    }
}

impl NoiseConfig {
    pub fn p(&self) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Depolarizing => self.rate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub step: f64,
    pub iterations: usize,
    pub gradient: GradientChoice,
    pub fd_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { step: 0.05, iterations: 300, gradient: GradientChoice::FiniteDifference, fd_step: 1e-5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToricConfig {
    /// Unitary layers; 0 means the ladder width.
    pub unitary_layers: usize,
    /// Dissipative jumps.
    pub jumps: usize,
    /// Gradient-descent iterations for the dissipative ansatz (tied angles).
    pub dissipative_iterations: usize,
    /// Starting angle of the tied dissipative parameters.
    pub dissipative_start: f64,
    /// Starting point of unitary training.
    pub unitary_start: UnitaryStart,
}

impl Default for ToricConfig {
    fn default() -> Self {
        ToricConfig {
            unitary_layers: 0,
            jumps: 10,
            dissipative_iterations: 5,
            dissipative_start: std::f64::consts::PI,
            unitary_start: UnitaryStart::Warm,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VwcConfig {
    pub gates: Vec<usize>,
    pub kappa: Vec<f64>,
    pub readout: ReadoutChoice,
}

impl Default for VwcConfig {
    fn default() -> Self {
        VwcConfig { gates: (1..=10).collect(), kappa: vec![0.0], readout: ReadoutChoice::Register }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadyStateConfig {
    pub p: f64,
    pub max_jumps: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SteadyStateConfig {
    fn default() -> Self {
        SteadyStateConfig {
            p: 0.0,
            max_jumps: 60,
            tol: dissim_core::steady_state::DEFAULT_TOL,
            max_iter: dissim_core::steady_state::DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyConfig {
    /// Random (state, p, n) draws for the single-layer bound.
    pub configs: usize,
    pub max_qubits: usize,
    pub max_layers: usize,
    /// Also run the trained toric entropy-scaling series.
    pub toric: bool,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig { configs: 500, max_qubits: 5, max_layers: 20, toric: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DesignConfig {
    pub ensemble: EnsembleChoice,
    pub mode: DesignMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    /// Gate extent K.
    pub k: usize,
    pub c_const: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { k: 1, c_const: dissim_core::bounds::DEFAULT_C }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub samples: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub ansatz: AnsatzConfig,
    pub noise: NoiseConfig,
    pub optimizer: OptimizerConfig,
    pub toric: ToricConfig,
    pub vwc: VwcConfig,
    pub steady_state: SteadyStateConfig,
    pub entropy: EntropyConfig,
    pub design: DesignConfig,
    pub bounds: BoundsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::UnitaryBp,
            seed: 7,
            samples: 200,
            output: None,
            format: Format::Csv,
            ansatz: AnsatzConfig::default(),
            noise: NoiseConfig::default(),
            optimizer: OptimizerConfig::default(),
            toric: ToricConfig::default(),
            vwc: VwcConfig::default(),
            steady_state: SteadyStateConfig::default(),
            entropy: EntropyConfig::default(),
            design: DesignConfig::default(),
            bounds: BoundsConfig::default(),
        }
    }
}

fn check(ok: bool, field: &str, msg: &str) -> RunResult<()> {
    if ok {
        Ok(())
    } else {
        Err(RunError::config(format!("{field}: {msg}")))
    }
}

impl ExperimentConfig {
    /// Parse a TOML document; errors carry line and column.
    pub fn from_toml(text: &str) -> RunResult<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(RunError::config)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> RunResult<()> {
        let a = &self.ansatz;
        check(!a.qubits.is_empty(), "ansatz.qubits", "must not be empty")?;
        check(a.qubits.iter().all(|&n| n >= 2), "ansatz.qubits", "every size must be at least 2")?;
        check(a.d >= 1, "ansatz.d", "must be positive")?;
        check(a.layers >= 1, "ansatz.layers", "must be positive")?;
        check(a.jumps >= 1, "ansatz.jumps", "must be positive")?;
        check((0.0..=1.0).contains(&a.q), "ansatz.q", "must lie in [0, 1]")?;
        check(a.reset_every >= 1, "ansatz.reset_every", "must be positive")?;
        check(a.correlation_period >= 1, "ansatz.correlation_period", "must be positive")?;
        check(a.fd_step > 0.0, "ansatz.fd_step", "must be positive")?;
        a.reset_stride()?;
        check((0.0..=1.0).contains(&self.noise.rate), "noise.rate", "must lie in [0, 1]")?;
        check(self.samples >= 2, "samples", "need at least two samples")?;
        check(self.optimizer.step > 0.0, "optimizer.step", "must be positive")?;
        check(self.optimizer.fd_step > 0.0, "optimizer.fd_step", "must be positive")?;
        check(self.toric.jumps >= 1, "toric.jumps", "must be positive")?;
        check(!self.vwc.gates.is_empty(), "vwc.gates", "must not be empty")?;
        check(self.vwc.gates.iter().all(|&t| t >= 1), "vwc.gates", "gate counts must be positive")?;
        check(self.vwc.kappa.iter().all(|&k| k >= 0.0 && k.is_finite()), "vwc.kappa", "rates must be finite and nonnegative")?;
        check((0.0..=1.0).contains(&self.steady_state.p), "steady_state.p", "must lie in [0, 1]")?;
        check(self.steady_state.tol > 0.0, "steady_state.tol", "must be positive")?;
        check(self.entropy.max_qubits >= 1, "entropy.max_qubits", "must be positive")?;
        check(self.bounds.k >= 1, "bounds.k", "must be positive")?;
        check(self.bounds.c_const > 0.0, "bounds.c_const", "must be positive")?;
        Ok(())
    }

    /// Resolved config with every default filled in.
    pub fn resolved(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON of the resolved config,
    /// with `output` and `format` left out.
    pub fn hash(&self) -> String {
        let mut v = self.resolved();
        if let Some(m) = v.as_object_mut() {
            m.remove("output");
            m.remove("format");
        }
        let digest = Sha256::digest(v.to_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
