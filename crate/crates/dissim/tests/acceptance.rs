//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::cell::OnceCell;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dissim::config::{DesignMode, EnsembleChoice, ExperimentConfig, GradientChoice};
use dissim::experiments::{bounds, design, entropy, steady, toric, variance, vwc};
use dissim_core::channels::{random_channel, random_unital_qubit_channel, KrausChannel};
use dissim_core::circuit::{brickwork_ansatz, qaoa_ansatz, ParamPlan, ResetPlan};
use dissim_core::gradients::CostSpec;
use dissim_core::pauli::{ObservableDecomposition, Pauli, PauliString};
use dissim_core::state::DensityState;
use dissim_core::variance::{scaling_fit, Regime, ScalingFit, VarianceEstimate};

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fit_str(f: &Option<ScalingFit>) -> String {
    match f {
        Some(f) => format!("slope {:.3} R² {:.3} {:?}", f.slope, f.r2, f.regime),
        None => "no fit".into(),
    }
}

fn regime_is(f: &Option<ScalingFit>, r: Regime) -> bool {
    f.as_ref().is_some_and(|f| f.regime == r)
}

fn z_obs(n: usize, site: usize) -> ObservableDecomposition {
    ObservableDecomposition::single(PauliString::single(n, site, Pauli::Z).unwrap())
}

fn unitary_bp() -> Outcome {
    let mut out = Vec::new();
    let mut ok = true;
    for dissipative in [false, true] {
        for correlated in [false, true] {
            let mut cfg = ExperimentConfig::default();
            cfg.ansatz.qubits = vec![4, 6, 8, 10];
            cfg.ansatz.layers = 40;
            cfg.ansatz.obs_site = 1;
            cfg.samples = 200;
            cfg.ansatz.correlated = correlated;
            cfg.ansatz.correlation_period = 5;
            if correlated {
                cfg.ansatz.gradient = GradientChoice::FiniteDifference;
            }
            if dissipative {
                cfg.ansatz.reset_fraction = Some(0.5);
                cfg.ansatz.reset_every = 5;
            }
            let s = variance::gradient_variance_series(&cfg).map_err(|e| e.to_string())?;
            let want = if dissipative { Regime::Plateau } else { Regime::Exponential };
            ok &= regime_is(&s.fit, want);
            out.push(format!("{}: {}", s.label, fit_str(&s.fit)));
        }
    }
    verdict(ok, out.join("; "))
}

fn term_fit(pts: &[toric::ToricPoint]) -> Option<ScalingFit> {
    let series: Vec<(f64, f64)> = pts.iter().map(|p| (p.n as f64, p.term)).collect();
    scaling_fit(&series).ok()
}

fn toric_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.ansatz.qubits = vec![4, 6, 8];
    cfg.noise.rate = 0.1;
    cfg.samples = 50;
    cfg.optimizer.iterations = 10;
    cfg
}

fn nibp(study: &toric::ToricStudy) -> Outcome {
    let (uv, _) = toric::fits(&study.unitary);
    let (dv, _) = toric::fits(&study.dissipative);
    let (ut, dt) = (term_fit(&study.unitary), term_fit(&study.dissipative));
    let ok = regime_is(&uv, Regime::Exponential)
        && regime_is(&ut, Regime::Exponential)
        && regime_is(&dv, Regime::Plateau)
        && regime_is(&dt, Regime::Plateau);
    verdict(
        ok,
        format!(
            "unitary variance {}, term {}; dissipative variance {}, term {}",
            fit_str(&uv),
            fit_str(&ut),
            fit_str(&dv),
            fit_str(&dt)
        ),
    )
}

fn bound_sidedness() -> Outcome {
    let grid = [
        (4, 1.0, 0.1, 1),
        (4, 0.5, 0.2, 2),
        (5, 1.0, 0.2, 2),
        (5, 0.5, 0.1, 1),
        (6, 1.0, 0.1, 2),
        (6, 0.5, 0.2, 1),
    ];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (n, q, p, l) in grid {
        let mut cfg = ExperimentConfig::default();
        cfg.samples = 2000;
        cfg.ansatz.d = 1;
        cfg.bounds.k = 1;
        cfg.ansatz.q = q;
        cfg.noise.rate = p;
        cfg.ansatz.layers = l;
        cfg.ansatz.obs_site = 0;
        let pt = bounds::point(&cfg, n).map_err(|e| e.to_string())?;
        ok &= pt.cost_consistent() && pt.grad_consistent();
        worst = worst.max(pt.cost_bound.bound / pt.cost.variance).max(pt.grad_bound.bound / pt.grad.variance);
    }
    verdict(ok, format!("{} configurations, largest bound/variance ratio {worst:.3e}", grid.len()))
}

fn design_oracles() -> Outcome {
    let mut cfg = ExperimentConfig::default();
    cfg.design.ensemble = EnsembleChoice::Clifford1;
    cfg.design.mode = DesignMode::Exact;
    let checks = design::checks(&cfg).map_err(|e| e.to_string())?;
    let max = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    let has = |prefix: &str| checks.iter().any(|c| c.name.starts_with(prefix));
    let ok = checks.iter().all(|c| c.deviation < 1e-12) && has("first_moment") && has("pauli_mixing") && has("single_layer_second_moment");
    verdict(ok, format!("{} identities, max deviation {max:.2e}", checks.len()))
}

fn gradient_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let mut layers = rng.random_range(2..=6);
        if n == 2 && layers % 2 == 0 {
            layers += 1;
        }
        // the studied brick of the final layer starts at site 0 for odd layers, 1 for even
        let site = 1 - layers % 2;
        let reset = if rng.random_bool(0.5) {
            Some(ResetPlan::strided(n, 2, rng.random_range(1..=3), rng.random_range(0.2..=1.0)).unwrap())
        } else {
            None
        };
        let an = if rng.random_bool(0.5) {
            brickwork_ansatz(n, layers, reset.as_ref(), ParamPlan::Independent, site)
        } else {
            qaoa_ansatz(n, layers, reset.as_ref(), ParamPlan::Independent, site)
        }
        .map_err(|e| e.to_string())?;
        let spec = CostSpec::new(an.program, z_obs(n, site), DensityState::zero(n)).map_err(|e| e.to_string())?;
        let theta: Vec<f64> = (0..spec.program.n_params()).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let g = spec.gradient_commutator(&theta, an.grad_param).map_err(|e| e.to_string())?;
        let fd = spec.gradient_finite_difference(&theta, an.grad_param, 1e-5).map_err(|e| e.to_string())?;
        worst = worst.max((g - fd).abs() / g.abs());
    }

    // bricks on (6, 7) in the first of two layers cannot reach Z_1
    let an = brickwork_ansatz(8, 2, None, ParamPlan::Independent, 1).map_err(|e| e.to_string())?;
    let spec = CostSpec::new(an.program, z_obs(8, 1), DensityState::zero(8)).map_err(|e| e.to_string())?;
    let theta = vec![0.9; spec.program.n_params()];
    let outside = (12..16).map(|mu| spec.gradient_commutator(&theta, mu)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let cone_zero = outside.iter().all(|&g| g == 0.0);

    let an = brickwork_ansatz(6, 10, None, ParamPlan::Independent, 1).map_err(|e| e.to_string())?;
    let spec = CostSpec::new(an.program, z_obs(6, 1), DensityState::zero(6)).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let grads: Vec<f64> = (0..200)
        .map(|_| {
            let theta: Vec<f64> = (0..spec.program.n_params()).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
            spec.gradient_commutator(&theta, an.grad_param).unwrap()
        })
        .collect();
    let est = VarianceEstimate::from_values(&grads, 12).map_err(|e| e.to_string())?;
    let mean_ok = est.mean.abs() <= 5.0 * est.mean_stderr;
    verdict(
        worst < 1e-6 && cone_zero && mean_ok,
        format!(
            "max relative error {worst:.2e}; light-cone gradients {outside:?}; mean {:.2e} vs 5·stderr {:.2e}",
            est.mean,
            5.0 * est.mean_stderr
        ),
    )
}

fn bloch(m: &dissim_core::linalg::CMat) -> f64 {
    let rho = DensityState::from_operator(m.clone()).unwrap();
    rho.to_coherence().traceless().iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn channel_theory() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut recon: f64 = 0.0;
    for _ in 0..1000 {
        let ch = random_channel(1, rng.random_range(1..=4), &mut rng);
        let nf = ch.normal_form().map_err(|e| e.to_string())?;
        recon = recon.max((nf.reconstruct_ptm() - ch.ptm()).abs().max());
    }
    let mut ad: f64 = 0.0;
    for q in [0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
        let nf = KrausChannel::amplitude_damping(q).unwrap().normal_form().map_err(|e| e.to_string())?;
        let s = (1.0f64 - q).sqrt();
        let want_c = [0.0, 0.0, q];
        let want_d = [s, s, 1.0 - q];
        for i in 0..3 {
            ad = ad.max((nf.c[i] - want_c[i]).abs()).max((nf.d[i] - want_d[i]).abs());
        }
    }
    let mut violations = 0;
    for _ in 0..1000 {
        let ch = random_unital_qubit_channel(rng.random_range(1..=4), &mut rng);
        let g = dissim_core::ensembles::ginibre(2, 2, &mut rng);
        let m = &g * g.adjoint();
        let m = m.clone() / dissim_core::linalg::c(m.trace().re, 0.0);
        let out = ch.apply(&m);
        let pin = DensityState::from_operator(m.clone()).unwrap().purity();
        let pout = DensityState::from_operator(out.clone()).unwrap().purity();
        if pout > pin + 1e-12 || bloch(&out) > bloch(&m) + 1e-12 {
            violations += 1;
        }
    }
    verdict(
        recon < 1e-8 && ad < 1e-12 && violations == 0,
        format!("normal-form error {recon:.2e}; amplitude damping error {ad:.2e}; unital violations {violations}/1000"),
    )
}

fn steady_state() -> Outcome {
    let cfg = ExperimentConfig::default();
    let s = steady::bell_study(&cfg).map_err(|e| e.to_string())?;
    let r2 = s.decay.map(|d| d.1).unwrap_or(f64::NAN);
    let reached = s.reached.is_some_and(|m| m <= 60);
    verdict(
        s.closed.residual < 1e-10 && s.agreement < 1e-8 && r2 > 0.98 && reached,
        format!(
            "residual {:.2e}; agreement {:.2e}; decay R² {r2:.5}; 1e-3 reached at M = {:?}",
            s.closed.residual, s.agreement, s.reached
        ),
    )
}

fn vwc_overlap() -> Outcome {
    let mut cfg = ExperimentConfig::default();
    cfg.vwc.gates = (1..=12).collect();
    cfg.vwc.kappa = vec![0.0];
    let exact = vwc::grid(&cfg).map_err(|e| e.to_string())?;
    let err = exact.iter().map(|p| (p.overlap - 1.0 / (p.gates as f64 + 1.0)).abs()).fold(0.0, f64::max);
    cfg.vwc.gates = (2..=10).collect();
    cfg.vwc.kappa = vec![0.1];
    let noisy = vwc::grid(&cfg).map_err(|e| e.to_string())?;
    let (slope, r2) = vwc::log_fit(&noisy, 0.1).unwrap_or((f64::NAN, f64::NAN));
    verdict(
        err < 1e-12 && r2 > 0.98 && slope < 0.0,
        format!("κ=0 max error {err:.2e}; κ=0.1 log-slope {slope:.4} R² {r2:.4}"),
    )
}

fn entropy_bounds(study: &toric::ToricStudy) -> Outcome {
    let cfg = ExperimentConfig::default();
    let single = entropy::single_layer_cases(&cfg).map_err(|e| e.to_string())?;
    let layered = entropy::layered_cases(&cfg).map_err(|e| e.to_string())?;
    let single_bad = single.iter().filter(|c| !c.holds()).count();
    let layered_bad = layered.iter().filter(|c| c.entropy < c.bound - entropy::ENTROPY_SLACK).count();
    let u: Vec<f64> = study.unitary.iter().map(|p| p.entropy).collect();
    let d: Vec<f64> = study.dissipative.iter().map(|p| p.entropy).collect();
    let d_fit = scaling_fit(&study.dissipative.iter().map(|p| (p.n as f64, p.entropy)).collect::<Vec<_>>()).ok();
    let increasing = u.windows(2).all(|w| w[1] > w[0]);
    let trend = increasing && regime_is(&d_fit, Regime::Plateau) && d[0] > u[0];
    verdict(
        single.len() >= 500 && single_bad == 0 && layered_bad == 0 && trend,
        format!(
            "single-layer {single_bad}/{} violations; layered {layered_bad}/{} violations; S/n unitary {u:.3?}, dissipative {d:.3?}",
            single.len(),
            layered.len()
        ),
    )
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    // positional numbers select criteria, e.g. `-- 4 5`
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut report = |id: usize, name: &str, f: &dyn Fn() -> Outcome| {
        if !only.is_empty() && !only.contains(&id) {
            return;
        }
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("PASS {id} {name}: {d} ({secs:.1} s)"),
            Err(d) => {
                failed += 1;
                println!("FAIL {id} {name}: {d} ({secs:.1} s)");
            }
        }
    };
    report(1, "unitary barren plateau", &unitary_bp);
    let cell = OnceCell::new();
    let study = || cell.get_or_init(|| toric::study(&toric_config()).map_err(|e| e.to_string())).clone();
    report(2, "noise-induced barren plateau", &|| nibp(&study()?));
    report(3, "bound one-sidedness", &bound_sidedness);
    report(4, "exact design oracles", &design_oracles);
    report(5, "gradient consistency", &gradient_consistency);
    report(6, "channel theory", &channel_theory);
    report(7, "steady state", &steady_state);
    report(8, "computation-history overlap", &vwc_overlap);
    report(9, "entropy", &|| entropy_bounds(&study()?));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
