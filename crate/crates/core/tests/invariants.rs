use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dissim_core::channels::{random_channel, random_unital_qubit_channel, KrausChannel};
use dissim_core::circuit::{
    build_dissipative_circuit, BrickStyle, CircuitProgram, DissipativeSpec, Layer, LayerKind, NoiseModel, Op,
};
use dissim_core::ensembles::{ginibre, haar_unitary, GateEnsemble};
use dissim_core::entropy::{layered_bound, EntropyBoundParams};
use dissim_core::lattice::{place_reset_sites, Lattice};
use dissim_core::linalg::{c, is_hermitian, max_abs_diff, CMat};
use dissim_core::pauli::{ObservableDecomposition, PauliString};
use dissim_core::state::{DensityState, MixtureState, SimState};
use dissim_core::steady_state::{assemble_jump_map, steady_state_closed_form};
use dissim_core::vwc::{build_chain, stationary_distribution};

fn random_density(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityState {
    let g = ginibre(1 << n, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityState::from_operator(m / c(tr, 0.0)).unwrap()
}

fn hs_distance(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn random_observable(n: usize, rng: &mut ChaCha8Rng) -> ObservableDecomposition {
    use rand::Rng;
    let mut idx: Vec<usize> = (0..4).map(|_| rng.random_range(1..1usize << (2 * n))).collect();
    idx.sort_unstable();
    idx.dedup();
    let terms = idx
        .into_iter()
        .map(|i| (rng.random_range(-1.0..1.0), PauliString::from_basis_index(n, i)))
        .collect();
    ObservableDecomposition::new(terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unital_channels_do_not_raise_purity(seed in any::<u64>(), terms in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_unital_qubit_channel(terms, &mut rng);
        prop_assert!(ch.is_trace_preserving() && ch.is_completely_positive(1e-10) && ch.is_unital(1e-10));
        let rho = random_density(1, 2, &mut rng);
        let out = DensityState::from_matrix(ch.apply(rho.matrix())).unwrap();
        prop_assert!(out.purity() <= rho.purity() + 1e-10);
        let v: Vec<f64> = rho.to_coherence().traceless().to_vec();
        let w: Vec<f64> = out.to_coherence().traceless().to_vec();
        let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assert!(norm(&w) <= norm(&v) + 1e-10);
    }

    #[test]
    fn depolarizing_contracts_distances(seed in any::<u64>(), p in 0.01f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = KrausChannel::depolarizing(p).unwrap();
        let a = random_density(1, 2, &mut rng);
        let b = random_density(1, 1, &mut rng);
        let before = hs_distance(a.matrix(), b.matrix());
        let after = hs_distance(&ch.apply(a.matrix()), &ch.apply(b.matrix()));
        prop_assert!(after <= (1.0 - p) * before + 1e-10);
    }

    #[test]
    fn channels_keep_states_physical(seed in any::<u64>(), n in 1usize..4, rank in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_channel(1, rank, &mut rng);
        prop_assert!(ch.is_trace_preserving() && ch.is_completely_positive(1e-10));
        let mut rho = random_density(n, 2, &mut rng);
        let site = (seed as usize) % n;
        rho.checked_channel(&ch, &[site]).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-10 && rho.trace().im.abs() < 1e-12);
        prop_assert!(is_hermitian(rho.matrix(), 1e-12));
    }

    #[test]
    fn expectation_matches_coherence_product(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(n, 3, &mut rng);
        let o = random_observable(n, &mut rng);
        prop_assert!((rho.expectation(&o) - rho.to_coherence().dot(&o)).abs() < 1e-9);
    }

    #[test]
    fn mixture_tracks_dense_through_resets_and_noise(seed in any::<u64>(), q in 0.0f64..=1.0, p in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 4;
        let spec = DissipativeSpec {
            lattice: place_reset_sites(n, 2, 1).unwrap(),
            depth: 2,
            jumps: 3,
            q,
            noise: if p > 0.0 { NoiseModel::Depolarizing(p) } else { NoiseModel::None },
            style: BrickStyle::Alternating,
            probe: None,
        };
        let prog = build_dissipative_circuit(&spec, &GateEnsemble::Haar, &mut rng).unwrap();
        let mut dense = DensityState::zero(n);
        let mut mix = MixtureState::zero(n);
        prog.evaluate(&[], &mut dense).unwrap();
        prog.evaluate(&[], &mut mix).unwrap();
        prop_assert!(max_abs_diff(dense.matrix(), mix.to_density().matrix()) < 1e-10);
        prop_assert!(mix.rank() <= 1 << n);
    }

    #[test]
    fn layered_bound_monotone(n in 1usize..8, l in 1usize..30, p in 0.0f64..0.99, dp in 0.0f64..0.01) {
        let at = |layers, p| layered_bound(&EntropyBoundParams { n, n_c: 0, p, layers, s0: 0.0 }).unwrap();
        prop_assert!(at(l + 1, p) >= at(l, p));
        prop_assert!(at(l, p + dp) >= at(l, p));
    }

    #[test]
    fn history_chain_is_stationary(t in 1usize..7, kappa in 0.0f64..2.0) {
        let chain = build_chain(t, kappa).unwrap();
        let st = stationary_distribution(&chain).unwrap();
        prop_assert!(st.residual < 1e-12);
        prop_assert!((chain.residual(&st.pi) - st.residual).abs() < 1e-13);
        prop_assert!(st.pi.iter().all(|&x| x >= -1e-14));
        prop_assert!((st.pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn noiseless_unitary_circuits_stay_pure() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = DissipativeSpec {
        lattice: Lattice::chain(5).unwrap(),
        depth: 3,
        jumps: 2,
        q: 0.0,
        noise: NoiseModel::None,
        style: BrickStyle::Full,
        probe: None,
    };
    let prog = build_dissipative_circuit(&spec, &GateEnsemble::Haar, &mut rng).unwrap();
    let rho = prog.evaluate_density(&[], &DensityState::zero(5)).unwrap();
    assert!((rho.purity() - 1.0).abs() < 1e-12);
}

#[test]
fn full_reset_jump_reaches_all_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 3;
    let reset = std::sync::Arc::new(KrausChannel::amplitude_damping(1.0).unwrap());
    let mut prog = CircuitProgram::new(n, 1, 1, 0);
    prog.push(Layer::new(
        LayerKind::Reset,
        (0..n).map(|s| Op::Channel { channel: reset.clone(), sites: vec![s] }).collect(),
    ))
    .unwrap();
    prog.push(Layer::new(
        LayerKind::SingleQubit,
        (0..n).map(|s| Op::Gate { u: std::sync::Arc::new(dissim_core::linalg::identity(2)), sites: vec![s] }).collect(),
    ))
    .unwrap();
    for _ in 0..5 {
        let rho0 = random_density(n, 4, &mut rng);
        let out = prog.evaluate_density(&[], &rho0).unwrap();
        assert!(max_abs_diff(out.matrix(), DensityState::zero(n).matrix()) < 1e-14);
    }
}

#[test]
fn steady_states_of_random_jumps_are_physical() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for q in [0.3, 0.7, 1.0] {
        let n = 3;
        let reset = std::sync::Arc::new(KrausChannel::amplitude_damping(q).unwrap());
        let mut prog = CircuitProgram::new(n, 1, 1, 0);
        prog.push(Layer::new(LayerKind::Reset, vec![Op::Channel { channel: reset, sites: vec![0] }])).unwrap();
        let ops = vec![
            Op::Gate { u: std::sync::Arc::new(haar_unitary(4, &mut rng)), sites: vec![0, 1] },
            Op::Gate { u: std::sync::Arc::new(haar_unitary(4, &mut rng)), sites: vec![1, 2] },
        ];
        prog.push(Layer::new(LayerKind::TwoQubit, ops)).unwrap();
        let map = assemble_jump_map(&prog, &[]).unwrap();
        let (v, report) = steady_state_closed_form(&map).unwrap();
        assert!(report.residual < 1e-10);
        let rho = DensityState::from_coherence(&v).unwrap();
        let once = prog.evaluate_density(&[], &rho).unwrap();
        assert!(max_abs_diff(once.matrix(), rho.matrix()) < 1e-9);
    }
}
