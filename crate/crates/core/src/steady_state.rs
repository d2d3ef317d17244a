//! Affine coherence-vector map of one jump and its fixed point.
//!
//! Vectors live in the traceless block: entry P−1 holds Tr(P ρ) for the
//! basis index P ≥ 1 of a non-identity Pauli string.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::channels::KrausChannel;
use crate::circuit::{CircuitProgram, Generator, Layer, LayerKind, Op};
use crate::error::{invalid, Error, Result};
use crate::linalg::{c, gates, kron, RMat, C64, ZERO};
use crate::pauli::{Pauli, PauliString};
use crate::state::{CoherenceVector, DensityState};

pub const MAX_DENSE_QUBITS: usize = 5;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
const STAGNATION_RATIO: f64 = 1.0 - 1e-9;
const STAGNATION_RUN: usize = 50;
const SINGULAR_TOL: f64 = 1e-10;

/// v ↦ Ω v + d on traceless coherence vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineJumpMap {
    pub n: usize,
    pub omega: RMat,
    pub offset: DVector<f64>,
}

impl AffineJumpMap {
    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.omega * v + &self.offset
    }

    pub fn apply_coherence(&self, v: &CoherenceVector) -> CoherenceVector {
        let t = DVector::from_column_slice(v.traceless());
        CoherenceVector::from_traceless(self.n, self.apply(&t).as_slice())
    }

    /// ‖v − (Ω v + d)‖₂.
    pub fn residual(&self, v: &DVector<f64>) -> f64 {
        (self.apply(v) - v).norm()
    }

    /// Eigenvalues of Ω.
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.omega
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| c(z.re, z.im))
            .collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Ω and c of one layer: Ω_ij = Tr(P_i Φ(P_j))/2^n, c_i = Tr(P_i Φ(I))/2^n.
pub fn layer_map(n: usize, layer: &Layer, theta: &[f64]) -> AffineJumpMap {
    let count = 1usize << (2 * n);
    let scale = 1.0 / (1usize << n) as f64;
    let evolve = |idx: usize| -> CoherenceVector {
        let p = PauliString::from_basis_index(n, idx);
        let mut s = DensityState::from_operator(p.matrix()).expect("Pauli matrix");
        for op in &layer.ops {
            op.apply(theta, 0.0, &mut s);
        }
        s.to_coherence()
    };
    let mut omega = RMat::zeros(count - 1, count - 1);
    for j in 1..count {
        let col = evolve(j);
        for i in 1..count {
            omega[(i - 1, j - 1)] = col.v[i] * scale;
        }
    }
    let id = evolve(0);
    let offset = DVector::from_iterator(count - 1, id.v[1..].iter().map(|x| x * scale));
    AffineJumpMap { n, omega, offset }
}

/// Compose the layers of one jump: Ω = Ω_L⋯Ω_1, d_j = Ω_j d_{j−1} + c_j.
pub fn assemble_jump_map(program: &CircuitProgram, theta: &[f64]) -> Result<AffineJumpMap> {
    let n = program.n_qubits();
    program.check_theta(theta)?;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Unsupported(alloc::format!("dense jump map limited to {MAX_DENSE_QUBITS} qubits")));
    }
    match program.layers().first() {
        Some(l) if l.kind == LayerKind::Reset => {}
        _ => return Err(invalid("a jump must start with a reset layer")),
    }
    let dim = (1usize << (2 * n)) - 1;
    let mut omega = RMat::identity(dim, dim);
    let mut offset = DVector::zeros(dim);
    for layer in program.layers() {
        let m = layer_map(n, layer, theta);
        offset = &m.omega * offset + &m.offset;
        omega = &m.omega * omega;
    }
    Ok(AffineJumpMap { n, omega, offset })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    DenseClosedForm,
    FixedPointIteration,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub method: SolveMethod,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn singular_error(map: &AffineJumpMap) -> Error {
    let worst = map
        .eigenvalues()
        .into_iter()
        .min_by(|a, b| (a - c(1.0, 0.0)).norm().total_cmp(&(b - c(1.0, 0.0)).norm()))
        .unwrap_or(c(1.0, 0.0));
    Error::Singular { re: worst.re, im: worst.im, distance: (worst - c(1.0, 0.0)).norm() }
}

/// v∞ = (I − Ω)⁻¹ d by LU, with the residual recomputed afterwards.
pub fn steady_state_closed_form(map: &AffineJumpMap) -> Result<(CoherenceVector, SolveReport)> {
    if map.n > MAX_DENSE_QUBITS {
        return Err(Error::Unsupported("closed form needs the dense map".into()));
    }
    let dim = map.dim();
    let a = RMat::identity(dim, dim) - &map.omega;
    let lu = a.lu();
    let diag = lu.u().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x.abs()), hi.max(x.abs())));
    if !(lo > SINGULAR_TOL * hi.max(1.0)) {
        return Err(singular_error(map));
    }
    let v = lu.solve(&map.offset).ok_or_else(|| singular_error(map))?;
    let residual = map.residual(&v);
    if !residual.is_finite() || residual > 1e-8 {
        return Err(singular_error(map));
    }
    Ok((
        CoherenceVector::from_traceless(map.n, v.as_slice()),
        SolveReport { method: SolveMethod::DenseClosedForm, iterations: 1, residual, converged: true },
    ))
}

/// Traceless coherence vector of |0…0⟩.
pub fn zero_state_vector(n: usize) -> DVector<f64> {
    let cv = DensityState::zero(n).to_coherence();
    DVector::from_column_slice(cv.traceless())
}

/// Richardson iteration v ← Ω v + d from `start` (|0…0⟩ when None).
/// Exhausting `max_iter` or a residual that stops shrinking yields a
/// non-converged report rather than an error.
pub fn steady_state_fixed_point(
    map: &AffineJumpMap,
    tol: f64,
    max_iter: usize,
    start: Option<&DVector<f64>>,
) -> (CoherenceVector, SolveReport) {
    let mut v = start.cloned().unwrap_or_else(|| zero_state_vector(map.n));
    let mut next = map.apply(&v);
    let mut prev_res = f64::INFINITY;
    let mut stalled = 0;
    let mut report = SolveReport {
        method: SolveMethod::FixedPointIteration,
        iterations: 0,
        residual: (&next - &v).norm(),
        converged: false,
    };
    for it in 1..=max_iter {
        v = next;
        next = map.apply(&v);
        let res = (&next - &v).norm();
        report.iterations = it;
        report.residual = res;
        if !res.is_finite() {
            break;
        }
        if res < tol {
            report.converged = true;
            break;
        }
        stalled = if res > STAGNATION_RATIO * prev_res { stalled + 1 } else { 0 };
        if stalled >= STAGNATION_RUN {
            break;
        }
        prev_res = res;
    }
    (CoherenceVector::from_traceless(map.n, v.as_slice()), report)
}

/// 1 − F between two states; the pure formula is used when either is pure.
pub fn infidelity(a: &DensityState, b: &DensityState) -> f64 {
    let pure_vector = |s: &DensityState| {
        let (vals, vecs) = crate::linalg::eigh(s.matrix());
        (vals.last().copied().unwrap_or(0.0) > 1.0 - 1e-12)
            .then(|| vecs.column(vals.len() - 1).iter().copied().collect::<Vec<C64>>())
    };
    if let Some(psi) = pure_vector(b) {
        return (1.0 - a.fidelity_pure(&psi)).max(0.0);
    }
    if let Some(psi) = pure_vector(a) {
        return (1.0 - b.fidelity_pure(&psi)).max(0.0);
    }
    (1.0 - a.fidelity(b)).max(0.0)
}

/// Infidelity to `target` after M = 0…m_max repetitions of the jump program.
pub fn layered_convergence(
    program: &CircuitProgram,
    theta: &[f64],
    rho0: &DensityState,
    target: &DensityState,
    m_max: usize,
) -> Result<Vec<(usize, f64)>> {
    let mut s = rho0.clone();
    let mut out = Vec::with_capacity(m_max + 1);
    out.push((0, infidelity(&s, target)));
    for m in 1..=m_max {
        program.evaluate(theta, &mut s)?;
        out.push((m, infidelity(&s, target)));
    }
    Ok(out)
}

/// cos²(θ/2) = 0.85: each pump keeps 85% of the wrong-parity weight.
pub fn bell_pump_angle() -> f64 {
    2.0 * libm::acos(libm::sqrt(0.85))
}

/// (|00⟩ + |11⟩)/√2 on qubits 0 and 1, ancilla (qubit 2) in |0⟩.
pub fn bell_target() -> Vec<C64> {
    let r = core::f64::consts::FRAC_1_SQRT_2;
    let mut v = alloc::vec![ZERO; 8];
    v[0] = c(r, 0.0);
    v[6] = c(r, 0.0);
    v
}

/// Three-qubit Bell pump, slots (θ_ZZ, θ_XX). One period: reset the ancilla,
/// copy the ZZ parity to it with CNOTs, apply the ancilla-controlled R_X(θ_ZZ)
/// on qubit 0; reset again, copy the XX parity in the Hadamard frame and
/// apply the ancilla-controlled R_Z(θ_XX). Depolarizing noise `p` follows
/// every two-qubit gate.
pub fn bell_pump_program(p: f64) -> Result<CircuitProgram> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("noise rate outside [0, 1]"));
    }
    let reset = Arc::new(KrausChannel::amplitude_damping(1.0)?);
    let reset_layer = || {
        Layer::new(
            LayerKind::Reset,
            alloc::vec![Op::Channel { channel: reset.clone(), sites: alloc::vec![2] }],
        )
    };
    let noise = |ops: &mut Vec<Op>, a: usize, b: usize| {
        if p > 0.0 {
            ops.push(Op::Depolarize { site: a, p });
            ops.push(Op::Depolarize { site: b, p });
        }
    };
    let h = gates::h();
    let id = crate::linalg::identity(2);
    let cnot = Arc::new(gates::cnot());
    let cnot_x = Arc::new(kron(&h, &id) * gates::cnot() * kron(&h, &id));
    let mut prog = CircuitProgram::new(3, 4, 1, 2);
    for (parity, gen, slot) in [
        (cnot, Generator::controlled_half_pauli(Pauli::X), 0usize),
        (cnot_x, Generator::controlled_half_pauli(Pauli::Z), 1),
    ] {
        prog.push(reset_layer())?;
        let mut ops = Vec::new();
        for q in [0, 1] {
            ops.push(Op::Gate { u: parity.clone(), sites: alloc::vec![q, 2] });
            noise(&mut ops, q, 2);
        }
        ops.push(Op::Rotation { param: slot, generator: Arc::new(gen), sites: alloc::vec![2, 0] });
        noise(&mut ops, 2, 0);
        prog.push(Layer::new(LayerKind::Other, ops))?;
    }
    Ok(prog)
}
