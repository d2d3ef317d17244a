use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use dissim::config::{Experiment, ExperimentConfig, Format};
use dissim::error::{RunError, RunResult};

#[derive(Parser)]
#[command(name = "dissim", version, about = "Dissipative circuit experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct AnsatzFlags {
    /// brickwork or qaoa.
    #[arg(long)]
    ansatz: Option<String>,
    /// Comma list or range, e.g. 4,6,8 or 4..10.
    #[arg(long)]
    qubits: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    jumps: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, conflicts_with = "reset_stride")]
    reset_fraction: Option<f64>,
    /// Reset every `stride`-th qubit; same as --reset-fraction 1/stride.
    #[arg(long)]
    reset_stride: Option<usize>,
    #[arg(long)]
    reset_every: Option<usize>,
    /// haar, clifford or clifford1.
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    correlated: bool,
    #[arg(long)]
    correlation_period: Option<usize>,
    #[arg(long)]
    obs_site: Option<usize>,
    /// commutator, parameter_shift or finite_difference.
    #[arg(long)]
    gradient: Option<String>,
    /// auto, dense or mixture.
    #[arg(long)]
    backend: Option<String>,
    /// Depolarizing rate; 0 disables noise.
    #[arg(long)]
    noise_rate: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Gradient variance against system size.
    Variance {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ansatz: AnsatzFlags,
    },
    /// Toric-ladder variance, training and entropy study.
    Toric {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ansatz: AnsatzFlags,
        #[arg(long)]
        toric_jumps: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Bell-pump steady state.
    SteadyState {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        max_jumps: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Output overlap of the computation-history chain.
    Vwc {
        #[command(flatten)]
        common: Common,
        /// Gate counts, e.g. 1..10 or 2,4,8.
        #[arg(long = "T")]
        gates: Option<String>,
        #[arg(long)]
        kappa: Option<String>,
        /// register or clock_conditioned.
        #[arg(long)]
        readout: Option<String>,
    },
    /// Entropy bounds against simulation.
    Entropy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        configs: Option<usize>,
        #[arg(long)]
        max_qubits: Option<usize>,
        #[arg(long)]
        max_layers: Option<usize>,
        /// Also run the toric entropy-scaling series.
        #[arg(long)]
        toric: bool,
    },
    /// Ensemble moment identities.
    DesignCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ensemble: Option<String>,
        /// exact or sampled.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Sampled variances against the analytic lower bounds.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ansatz: AnsatzFlags,
        #[arg(long)]
        k: Option<usize>,
    },
}

fn parse_enum<T: DeserializeOwned>(field: &str, s: &str) -> RunResult<T> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| RunError::config(format!("{field}: unknown value {s:?}")))
}

fn parse_list<T: std::str::FromStr>(field: &str, s: &str) -> RunResult<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| RunError::config(format!("{field}: cannot parse {x:?}"))))
        .collect()
}

/// `a..b` (inclusive, as written on the command line), `a..=b`, or a comma list.
fn parse_sizes(field: &str, s: &str) -> RunResult<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let lo: usize = a.trim().parse().map_err(|_| RunError::config(format!("{field}: bad range {s:?}")))?;
        let hi: usize = b.trim().parse().map_err(|_| RunError::config(format!("{field}: bad range {s:?}")))?;
        if lo > hi {
            return Err(RunError::config(format!("{field}: empty range {s:?}")));
        }
        return Ok((lo..=hi).collect());
    }
    parse_list(field, s)
}

fn apply_common(cfg: &mut ExperimentConfig, c: &Common) -> RunResult<()> {
    if let Some(v) = &c.output {
        cfg.output = Some(v.clone());
    }
    if let Some(v) = &c.format {
        cfg.format = parse_enum::<Format>("format", v)?;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.samples {
        cfg.samples = v;
    }
    Ok(())
}

fn apply_ansatz(cfg: &mut ExperimentConfig, f: &AnsatzFlags) -> RunResult<()> {
    let a = &mut cfg.ansatz;
    if let Some(v) = &f.ansatz {
        a.kind = parse_enum("ansatz.kind", v)?;
    }
    if let Some(v) = &f.qubits {
        a.qubits = parse_sizes("ansatz.qubits", v)?;
    }
    if let Some(v) = f.d {
        a.d = v;
    }
    if let Some(v) = f.layers {
        a.layers = v;
    }
    if let Some(v) = f.jumps {
        a.jumps = v;
    }
    if let Some(v) = f.q {
        a.q = v;
    }
    if let Some(v) = f.reset_fraction {
        a.reset_fraction = Some(v);
    }
    if let Some(v) = f.reset_stride {
        if v == 0 {
            return Err(RunError::config("ansatz.reset_stride: must be positive"));
        }
        a.reset_fraction = Some(1.0 / v as f64);
    }
    if let Some(v) = f.reset_every {
        a.reset_every = v;
    }
    if let Some(v) = &f.ensemble {
        a.ensemble = parse_enum("ansatz.ensemble", v)?;
    }
    if f.correlated {
        a.correlated = true;
    }
    if let Some(v) = f.correlation_period {
        a.correlation_period = v;
    }
    if let Some(v) = f.obs_site {
        a.obs_site = v;
    }
    if let Some(v) = &f.gradient {
        a.gradient = parse_enum("ansatz.gradient", v)?;
        cfg.optimizer.gradient = a.gradient;
    }
    if let Some(v) = &f.backend {
        a.backend = parse_enum("ansatz.backend", v)?;
    }
    if let Some(v) = f.noise_rate {
        cfg.noise.rate = v;
    }
    Ok(())
}

fn load(common: &Common, experiment: Experiment) -> RunResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.experiment = experiment;
    apply_common(&mut cfg, common)?;
    Ok(cfg)
}

fn build(cmd: Cmd) -> RunResult<ExperimentConfig> {
    Ok(match cmd {
        Cmd::Variance { common, ansatz } => {
            let mut cfg = load(&common, Experiment::UnitaryBp)?;
            apply_ansatz(&mut cfg, &ansatz)?;
            cfg
        }
        Cmd::Toric { common, ansatz, toric_jumps, iterations, step } => {
            let mut cfg = load(&common, Experiment::ToricNibp)?;
            apply_ansatz(&mut cfg, &ansatz)?;
            if let Some(v) = toric_jumps {
                cfg.toric.jumps = v;
            }
            if let Some(v) = iterations {
                cfg.optimizer.iterations = v;
            }
            if let Some(v) = step {
                cfg.optimizer.step = v;
            }
            cfg
        }
        Cmd::SteadyState { common, p, max_jumps, tol } => {
            let mut cfg = load(&common, Experiment::SteadyState)?;
            if let Some(v) = p {
                cfg.steady_state.p = v;
            }
            if let Some(v) = max_jumps {
                cfg.steady_state.max_jumps = v;
            }
            if let Some(v) = tol {
                cfg.steady_state.tol = v;
            }
            cfg
        }
        Cmd::Vwc { common, gates, kappa, readout } => {
            let mut cfg = load(&common, Experiment::Vwc)?;
            if let Some(v) = gates {
                cfg.vwc.gates = parse_sizes("vwc.gates", &v)?;
            }
            if let Some(v) = kappa {
                cfg.vwc.kappa = parse_list("vwc.kappa", &v)?;
            }
            if let Some(v) = readout {
                cfg.vwc.readout = parse_enum("vwc.readout", &v)?;
            }
            cfg
        }
        Cmd::Entropy { common, configs, max_qubits, max_layers, toric } => {
            let mut cfg = load(&common, Experiment::Entropy)?;
            if let Some(v) = configs {
                cfg.entropy.configs = v;
            }
            if let Some(v) = max_qubits {
                cfg.entropy.max_qubits = v;
            }
            if let Some(v) = max_layers {
                cfg.entropy.max_layers = v;
            }
            if toric {
                cfg.entropy.toric = true;
            }
            cfg
        }
        Cmd::DesignCheck { common, ensemble, mode } => {
            let mut cfg = load(&common, Experiment::DesignCheck)?;
            if let Some(v) = ensemble {
                cfg.design.ensemble = parse_enum("design.ensemble", &v)?;
            }
            if let Some(v) = mode {
                cfg.design.mode = parse_enum("design.mode", &v)?;
            }
            cfg
        }
        Cmd::Bounds { common, ansatz, k } => {
            let mut cfg = load(&common, Experiment::Bounds)?;
            apply_ansatz(&mut cfg, &ansatz)?;
            if let Some(v) = k {
                cfg.bounds.k = v;
            }
            cfg
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(cli.cmd).and_then(|cfg| {
        let out = dissim::run(&cfg)?;
        if cfg.output.is_none() {
            match cfg.format {
                Format::Csv => print!("{}", out.record.to_csv_string()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.sidecar()).expect("serializes")),
            }
        }
        eprintln!("{}", out.summary);
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dissim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
