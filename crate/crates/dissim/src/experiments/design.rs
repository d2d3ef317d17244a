//! Moment identities of the gate ensembles, exact by enumeration or sampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use dissim_core::ensembles::{
    clifford1_enumerate, first_moment_exact, first_moment_sampled, haar_unitary, pauli_mixing_exact,
    single_layer_second_moment,
};
use dissim_core::linalg::{c, CMat};
use dissim_core::pauli::PauliString;

use crate::config::{DesignMode, EnsembleChoice, ExperimentConfig};
use crate::error::{RunError, RunResult};
use crate::pool::clifford2;
use crate::record::{ExperimentRecord, RunOutput};

/// Tolerance of every exact identity.
pub const EXACT_TOL: f64 = 1e-12;
/// Standard errors allowed in sampled mode.
pub const SAMPLED_Z: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DesignCheck {
    pub name: String,
    pub deviation: f64,
    /// EXACT_TOL in exact mode, SAMPLED_Z·stderr in sampled mode.
    pub tolerance: f64,
}

impl DesignCheck {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

fn pauli(s: &str) -> RunResult<PauliString> {
    Ok(PauliString::parse(s)?)
}

fn projector(psi: &[f64]) -> CMat {
    let d = psi.len();
    CMat::from_fn(d, d, |i, j| c(psi[i] * psi[j], 0.0))
}

fn exact(name: impl Into<String>, deviation: f64) -> DesignCheck {
    DesignCheck { name: name.into(), deviation, tolerance: EXACT_TOL }
}

fn exact_checks(ensemble: EnsembleChoice) -> RunResult<Vec<DesignCheck>> {
    let mut out = Vec::new();
    match ensemble {
        EnsembleChoice::Clifford1 => {
            let el = clifford1_enumerate();
            for label in ["X", "Y", "Z"] {
                out.push(exact(format!("first_moment {label}"), first_moment_exact(&el, &pauli(label)?.matrix())));
            }
            out.push(exact("first_moment |0><0|", first_moment_exact(&el, &projector(&[1.0, 0.0]))));
            for (a, b) in [("I", "I"), ("X", "X"), ("Y", "Y"), ("Z", "Z"), ("X", "Z"), ("Y", "X")] {
                out.push(exact(format!("pauli_mixing {a},{b}"), pauli_mixing_exact(&el, &pauli(a)?, &pauli(b)?)?));
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let cases = [
                ("Z", projector(&[1.0, 0.0])),
                ("I", projector(&[1.0, 0.0])),
                ("X", projector(&[0.6, 0.8])),
                ("ZZ", projector(&[h, 0.0, 0.0, h])),
                ("XI", projector(&[h, 0.0, 0.0, h])),
                ("ZIX", projector(&[0.5, 0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.5])),
            ];
            for (p, b) in cases {
                let (lhs, rhs) = single_layer_second_moment(&pauli(p)?, &b)?;
                out.push(exact(format!("single_layer_second_moment {p}"), (lhs - rhs).abs()));
            }
        }
        EnsembleChoice::Clifford => {
            let table = clifford2();
            let el = table.elements();
            for label in ["XI", "IZ", "ZZ", "XY"] {
                out.push(exact(format!("first_moment {label}"), first_moment_exact(el, &pauli(label)?.matrix())));
            }
            for (a, b) in [("ZI", "ZI"), ("XY", "XY"), ("XI", "ZI"), ("II", "II")] {
                out.push(exact(format!("pauli_mixing {a},{b}"), pauli_mixing_exact(el, &pauli(a)?, &pauli(b)?)?));
            }
        }
        EnsembleChoice::Haar => {
            return Err(RunError::config("design.mode: exact checks need a finite ensemble (clifford1 or clifford)"))
        }
    }
    Ok(out)
}

fn sampled_checks(cfg: &ExperimentConfig) -> RunResult<Vec<DesignCheck>> {
    let samples = cfg.samples;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cl1 = clifford1_enumerate();
    let table = clifford2();
    let (dim, sampler): (usize, Box<dyn Fn(&mut ChaCha8Rng) -> CMat>) = match cfg.design.ensemble {
        EnsembleChoice::Haar => (2, Box::new(|r| haar_unitary(2, r))),
        EnsembleChoice::Clifford1 => (2, Box::new(move |r| cl1[r.random_range(0..cl1.len())].clone())),
        EnsembleChoice::Clifford => (4, Box::new(move |r| table.sample(r))),
    };
    let ops: Vec<&str> = if dim == 2 { vec!["X", "Z"] } else { vec!["XI", "ZZ"] };
    let mut out = Vec::new();
    for label in ops {
        let m = first_moment_sampled(&sampler, &pauli(label)?.matrix(), samples, &mut rng);
        out.push(DesignCheck {
            name: format!("first_moment {label}"),
            deviation: m.deviation,
            tolerance: SAMPLED_Z * m.stderr,
        });
    }
    // E[Tr(Z U|0⟩⟨0|U†)²] = 1/(d+1) for a 2-design
    let z = if dim == 2 { pauli("Z")? } else { pauli("ZI")? };
    let zm = z.matrix();
    let mut rho0 = CMat::zeros(dim, dim);
    rho0[(0, 0)] = c(1.0, 0.0);
    let vals: Vec<f64> = (0..samples)
        .map(|_| {
            let u = sampler(&mut rng);
            let t = (&zm * &u * &rho0 * u.adjoint()).trace().re;
            t * t
        })
        .collect();
    let est = dissim_core::variance::VarianceEstimate::from_values(&vals, cfg.seed)?;
    out.push(DesignCheck {
        name: "second_moment Tr(Z U|0><0|U†)^2".into(),
        deviation: (est.mean - 1.0 / (dim as f64 + 1.0)).abs(),
        tolerance: SAMPLED_Z * est.mean_stderr,
    });
    Ok(out)
}

pub fn checks(cfg: &ExperimentConfig) -> RunResult<Vec<DesignCheck>> {
    match cfg.design.mode {
        DesignMode::Exact => exact_checks(cfg.design.ensemble),
        DesignMode::Sampled => sampled_checks(cfg),
    }
}

pub fn run(cfg: &ExperimentConfig) -> RunResult<RunOutput> {
    let cs = checks(cfg)?;
    let mut rec = ExperimentRecord::new(cfg, &["check", "deviation", "tolerance", "passed"]);
    for ch in &cs {
        rec.push(vec![ch.name.as_str().into(), ch.deviation.into(), ch.tolerance.into(), usize::from(ch.passed()).into()]);
    }
    let max_dev = cs.iter().map(|c| c.deviation).fold(0.0, f64::max);
    Ok(RunOutput {
        record: rec,
        config: cfg.resolved(),
        summary: json!({
            "max_deviation": max_dev,
            "all_passed": cs.iter().all(DesignCheck::passed),
        }),
        wall_clock_s: 0.0,
    })
}
