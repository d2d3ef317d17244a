//! Layered dissipative circuits: reset schedule, brickwork builders and evaluation.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use crate::channels::KrausChannel;
use crate::ensembles::GateEnsemble;
use crate::error::{invalid, Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{c, eigh, gates, kron, CMat, C64};
use crate::pauli::{Pauli, PauliString};
use crate::state::{check_sites, DensityState, SimState};

/// 1 iff a reset precedes two-qubit layer `l` (1-based) for jump depth `depth`.
pub fn chi(l: usize, depth: usize) -> Result<bool> {
    if l == 0 || depth == 0 {
        return Err(invalid("chi needs l >= 1 and L >= 1"));
    }
    Ok(l % depth == 0)
}

/// Hermitian generator H of a parameterized gate exp(−iθH).
#[derive(Clone, Debug)]
pub struct Generator {
    h: CMat,
    vals: Vec<f64>,
    vecs: CMat,
}

impl Generator {
    pub fn new(h: CMat) -> Result<Self> {
        if !h.is_square() || !h.nrows().is_power_of_two() {
            return Err(invalid("generator must be square with power-of-two size"));
        }
        if !crate::linalg::is_hermitian(&h, 1e-12) {
            return Err(invalid("generator is not Hermitian"));
        }
        let (vals, vecs) = eigh(&h);
        let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm <= 0.0 || norm > 1.0 + 1e-12 {
            return Err(invalid(alloc::format!("generator norm {norm} outside (0, 1]")));
        }
        Ok(Generator { h, vals, vecs })
    }

    /// A/2 for a single Pauli A, so exp(−iθH) = R_A(θ).
    pub fn half_pauli(p: Pauli) -> Self {
        Self::new(p.matrix() * c(0.5, 0.0)).expect("Pauli generator")
    }

    /// |1⟩⟨1| ⊗ A/2: controlled R_A(θ), control first.
    pub fn controlled_half_pauli(p: Pauli) -> Self {
        let mut proj = CMat::zeros(2, 2);
        proj[(1, 1)] = c(1.0, 0.0);
        Self::new(kron(&proj, &(p.matrix() * c(0.5, 0.0)))).expect("controlled generator")
    }

    pub fn matrix(&self) -> &CMat {
        &self.h
    }

    pub fn n_qubits(&self) -> usize {
        self.h.nrows().trailing_zeros() as usize
    }

    pub fn norm(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn unitary(&self, theta: f64) -> CMat {
        let phases = nalgebra::DVector::from_iterator(
            self.vals.len(),
            self.vals.iter().map(|&l| C64::from_polar(1.0, -theta * l)),
        );
        &self.vecs * CMat::from_diagonal(&phases) * self.vecs.adjoint()
    }

    /// r when the spectrum is {−r, r}, the condition for the two-term shift rule.
    pub fn shift_frequency(&self) -> Option<f64> {
        let r = self.norm();
        self.vals
            .iter()
            .all(|v| (v.abs() - r).abs() < 1e-12)
            .then_some(r)
    }
}

/// One circuit instruction.
#[derive(Clone, Debug)]
pub enum Op {
    Gate { u: Arc<CMat>, sites: Vec<usize> },
    /// exp(−iθ_param H) on `sites`.
    Rotation { param: usize, generator: Arc<Generator>, sites: Vec<usize> },
    /// exp(−iθ_param · scale · P) for a register-wide Pauli string.
    PauliRotation { param: usize, scale: f64, pauli: PauliString },
    Channel { channel: Arc<KrausChannel>, sites: Vec<usize> },
    Depolarize { site: usize, p: f64 },
}

impl Op {
    pub fn sites(&self) -> Vec<usize> {
        match self {
            Op::Gate { sites, .. } | Op::Rotation { sites, .. } | Op::Channel { sites, .. } => {
                sites.clone()
            }
            Op::PauliRotation { pauli, .. } => pauli.support().into_iter().collect(),
            Op::Depolarize { site, .. } => alloc::vec![*site],
        }
    }

    pub fn param(&self) -> Option<usize> {
        match self {
            Op::Rotation { param, .. } | Op::PauliRotation { param, .. } => Some(*param),
            _ => None,
        }
    }

    /// Local generator and its sites for parameterized ops.
    pub fn local_generator(&self) -> Option<(CMat, Vec<usize>)> {
        match self {
            Op::Rotation { generator, sites, .. } => Some((generator.matrix().clone(), sites.clone())),
            Op::PauliRotation { scale, pauli, .. } => {
                let sites: Vec<usize> = pauli.support().into_iter().collect();
                Some((pauli.restrict(&sites).matrix() * c(*scale, 0.0), sites))
            }
            _ => None,
        }
    }

    fn shift_frequency(&self) -> Option<f64> {
        match self {
            Op::Rotation { generator, .. } => generator.shift_frequency(),
            Op::PauliRotation { scale, .. } => Some(scale.abs()),
            _ => None,
        }
    }

    /// Apply with parameter vector `theta` plus an extra angle on this op.
    pub fn apply<S: SimState>(&self, theta: &[f64], extra: f64, state: &mut S) {
        match self {
            Op::Gate { u, sites } => state.apply_unitary(u, sites),
            Op::Rotation { param, generator, sites } => {
                state.apply_unitary(&generator.unitary(theta[*param] + extra), sites)
            }
            Op::PauliRotation { param, scale, pauli } => {
                state.pauli_rotation(pauli, (theta[*param] + extra) * scale)
            }
            Op::Channel { channel, sites } => state.apply_channel(channel, sites),
            Op::Depolarize { site, p } => state.depolarize(*site, *p),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Reset,
    TwoQubit,
    Noise,
    SingleQubit,
    Other,
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub kind: LayerKind,
    pub ops: Vec<Op>,
}

impl Layer {
    pub fn new(kind: LayerKind, ops: Vec<Op>) -> Self {
        Layer { kind, ops }
    }
}

/// Ordered layers acting on `n` qubits with a parameter vector θ.
#[derive(Clone, Debug)]
pub struct CircuitProgram {
    n: usize,
    depth: usize,
    jumps: usize,
    layers: Vec<Layer>,
    theta: Vec<f64>,
}

impl CircuitProgram {
    pub fn new(n: usize, depth: usize, jumps: usize, n_params: usize) -> Self {
        CircuitProgram {
            n,
            depth,
            jumps,
            layers: Vec::new(),
            theta: alloc::vec![0.0; n_params],
        }
    }

    pub fn push(&mut self, layer: Layer) -> Result<()> {
        for op in &layer.ops {
            let sites = op.sites();
            check_sites(self.n, &sites)?;
            match op {
                Op::Gate { u, sites } if u.nrows() != 1usize << sites.len() => {
                    return Err(Error::Dimension { expected: 1 << sites.len(), actual: u.nrows() });
                }
                Op::Rotation { generator, sites, .. } if generator.n_qubits() != sites.len() => {
                    return Err(Error::Dimension { expected: generator.n_qubits(), actual: sites.len() });
                }
                Op::Channel { channel, sites } if channel.n_qubits() != sites.len() => {
                    return Err(Error::Dimension { expected: channel.n_qubits(), actual: sites.len() });
                }
                Op::PauliRotation { pauli, .. } if pauli.n() != self.n => {
                    return Err(Error::Dimension { expected: self.n, actual: pauli.n() });
                }
                Op::Depolarize { p, .. } if !(0.0..=1.0).contains(p) => {
                    return Err(invalid("depolarizing rate outside [0, 1]"));
                }
                _ => {}
            }
            if let Some(k) = op.param() {
                if k >= self.theta.len() {
                    return Err(invalid(alloc::format!("parameter slot {k} beyond {}", self.theta.len())));
                }
            }
        }
        self.layers.push(layer);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn jumps(&self) -> usize {
        self.jumps
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn set_theta(&mut self, theta: Vec<f64>) -> Result<()> {
        self.check_theta(&theta)?;
        self.theta = theta;
        Ok(())
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.theta.len() {
            return Err(Error::Dimension { expected: self.theta.len(), actual: theta.len() });
        }
        Ok(())
    }

    pub fn ops(&self) -> impl Iterator<Item = &Op> {
        self.layers.iter().flat_map(|l| l.ops.iter())
    }

    pub fn count_layers(&self, kind: LayerKind) -> usize {
        self.layers.iter().filter(|l| l.kind == kind).count()
    }

    /// Flat op indices carrying parameter `mu`.
    pub fn occurrences(&self, mu: usize) -> Vec<usize> {
        self.ops()
            .enumerate()
            .filter(|(_, op)| op.param() == Some(mu))
            .map(|(i, _)| i)
            .collect()
    }

    /// Apply every layer with parameters `theta`.
    pub fn evaluate<S: SimState>(&self, theta: &[f64], state: &mut S) -> Result<()> {
        self.check_theta(theta)?;
        if state.n_qubits() != self.n {
            return Err(Error::Dimension { expected: self.n, actual: state.n_qubits() });
        }
        for op in self.ops() {
            op.apply(theta, 0.0, state);
        }
        Ok(())
    }

    pub fn evaluate_density(&self, theta: &[f64], rho0: &DensityState) -> Result<DensityState> {
        let mut s = rho0.clone();
        self.evaluate(theta, &mut s)?;
        Ok(s)
    }

    /// Apply flat ops in `range`, adding `shift` to the angle of flat op `shifted`.
    pub fn apply_range<S: SimState>(
        &self,
        theta: &[f64],
        state: &mut S,
        range: core::ops::Range<usize>,
        shifted: Option<(usize, f64)>,
    ) {
        for (i, op) in self.ops().enumerate().skip(range.start).take(range.len()) {
            let extra = match shifted {
                Some((j, d)) if j == i => d,
                _ => 0.0,
            };
            op.apply(theta, extra, state);
        }
    }

    pub fn n_ops(&self) -> usize {
        self.layers.iter().map(|l| l.ops.len()).sum()
    }

    /// Frequency r for the shift rule at flat op `idx`, if its generator has spectrum {−r, r}.
    pub fn shift_frequency(&self, idx: usize) -> Option<f64> {
        self.ops().nth(idx).and_then(Op::shift_frequency)
    }

    /// Support of the backward-evolved observable after each flat op:
    /// entry i is the support seen by op i from the measurement side.
    pub fn op_light_cone(&self, support: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
        let ops: Vec<&Op> = self.ops().collect();
        let mut cone = support.clone();
        let mut out = alloc::vec![BTreeSet::new(); ops.len()];
        for (i, op) in ops.iter().enumerate().rev() {
            out[i] = cone.clone();
            let sites = op.sites();
            if sites.iter().any(|s| cone.contains(s)) {
                cone.extend(sites);
            }
        }
        out
    }

    /// Light cone per layer: entry j is supp(Φ*(O)) before layer j is undone,
    /// the last entry is after every layer has been undone.
    pub fn light_cone(&self, support: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
        let mut cone = support.clone();
        let mut out = Vec::with_capacity(self.layers.len() + 1);
        for layer in self.layers.iter().rev() {
            out.push(cone.clone());
            for op in layer.ops.iter().rev() {
                let sites = op.sites();
                if sites.iter().any(|s| cone.contains(s)) {
                    cone.extend(sites);
                }
            }
        }
        out.push(cone);
        out.reverse();
        out
    }
}

/// [R_Y(θ1)⊗R_Y(θ2)]·CNOT·[R_X(θ3)⊗R_X(θ4)].
pub fn hardware_efficient_brick(t: [f64; 4]) -> CMat {
    kron(&gates::ry(t[0]), &gates::ry(t[1]))
        * gates::cnot()
        * kron(&gates::rx(t[2]), &gates::rx(t[3]))
}

/// The brick as five ops on (a, b); `params` are the slots of θ1..θ4.
pub fn brick_ops(a: usize, b: usize, params: [usize; 4]) -> Vec<Op> {
    let rx = Arc::new(Generator::half_pauli(Pauli::X));
    let ry = Arc::new(Generator::half_pauli(Pauli::Y));
    alloc::vec![
        Op::Rotation { param: params[2], generator: rx.clone(), sites: alloc::vec![a] },
        Op::Rotation { param: params[3], generator: rx, sites: alloc::vec![b] },
        Op::Gate { u: Arc::new(gates::cnot()), sites: alloc::vec![a, b] },
        Op::Rotation { param: params[0], generator: ry.clone(), sites: alloc::vec![a] },
        Op::Rotation { param: params[1], generator: ry, sites: alloc::vec![b] },
    ]
}

/// Perfect or partial resets of fixed sites every `every` two-qubit layers.
#[derive(Clone, Debug, PartialEq)]
pub struct ResetPlan {
    pub every: usize,
    pub sites: Vec<usize>,
    pub q: f64,
}

impl ResetPlan {
    /// Sites 0, stride, 2·stride, … of an n-site chain.
    pub fn strided(n: usize, stride: usize, every: usize, q: f64) -> Result<Self> {
        if stride == 0 || every == 0 {
            return Err(invalid("reset stride and period must be positive"));
        }
        Ok(ResetPlan { every, sites: (0..n).step_by(stride).collect(), q })
    }

    fn layer(&self) -> Result<Layer> {
        let ch = Arc::new(KrausChannel::amplitude_damping(self.q)?);
        Ok(Layer::new(
            LayerKind::Reset,
            self.sites
                .iter()
                .map(|&s| Op::Channel { channel: ch.clone(), sites: alloc::vec![s] })
                .collect(),
        ))
    }
}

/// Parameter layout of a layered ansatz: independent per layer, or
/// repeating with period `period`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ParamPlan {
    Independent,
    Correlated { period: usize },
}

impl ParamPlan {
    fn block(&self, k: usize) -> usize {
        match *self {
            ParamPlan::Independent => k - 1,
            ParamPlan::Correlated { period } => (k - 1) % period,
        }
    }

    fn blocks(&self, layers: usize) -> usize {
        match *self {
            ParamPlan::Independent => layers,
            ParamPlan::Correlated { period } => period.min(layers),
        }
    }
}

/// A built ansatz with the slot whose gradient is studied.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub program: CircuitProgram,
    pub grad_param: usize,
}

/// 1-d brickwork of hardware-efficient bricks with open ends. Layer k (1-based)
/// acts on pairs (0,1),(2,3),… for odd k and (1,2),(3,4),… for even k.
/// The studied parameter is θ1 of the final brick on (obs_site, obs_site+1),
/// which must exist in the final layer.
pub fn brickwork_ansatz(
    n: usize,
    layers: usize,
    reset: Option<&ResetPlan>,
    plan: ParamPlan,
    obs_site: usize,
) -> Result<Ansatz> {
    if n < 2 || layers == 0 {
        return Err(invalid("brickwork needs n >= 2 and at least one layer"));
    }
    if let ParamPlan::Correlated { period: 0 } = plan {
        return Err(invalid("correlation period must be positive"));
    }
    let lat = Lattice::chain(n)?;
    let slots = n / 2;
    let blocks = plan.blocks(layers);
    let depth = reset.map_or(layers, |r| r.every);
    let mut prog = CircuitProgram::new(n, depth, layers.div_ceil(depth), blocks * slots * 4);
    let mut grad = None;
    for k in 1..=layers {
        if let Some(r) = reset {
            if chi(k, r.every)? {
                prog.push(r.layer()?)?;
            }
        }
        let block = plan.block(k);
        let mut ops = Vec::new();
        for (j, (a, b)) in lat.axis_pairs(0, (k - 1) % 2).into_iter().enumerate() {
            let base = (block * slots + j) * 4;
            if k == layers && a == obs_site {
                grad = Some(base);
            }
            ops.extend(brick_ops(a, b, [base, base + 1, base + 2, base + 3]));
        }
        prog.push(Layer::new(LayerKind::TwoQubit, ops))?;
    }
    let grad_param = grad.ok_or_else(|| invalid("no final-layer brick starts at the observable site"))?;
    Ok(Ansatz { program: prog, grad_param })
}

/// One QAOA-style chain layer: R_ZZ on (0,1),(2,3),…, then on (1,2),(3,4),…,
/// then R_X and R_Y on every qubit, with consecutive slots from `first_param`.
pub fn qaoa_chain_layer(n: usize, first_param: usize) -> Result<Vec<Layer>> {
    let lat = Lattice::chain(n)?;
    let zz = Arc::new(Generator::new(kron(&gates::z(), &gates::z()) * c(0.5, 0.0))?);
    let rx = Arc::new(Generator::half_pauli(Pauli::X));
    let ry = Arc::new(Generator::half_pauli(Pauli::Y));
    let mut slot = first_param;
    let mut next = || {
        slot += 1;
        slot - 1
    };
    let mut out = Vec::new();
    for parity in 0..2 {
        let ops = lat
            .axis_pairs(0, parity)
            .into_iter()
            .map(|(a, b)| Op::Rotation { param: next(), generator: zz.clone(), sites: alloc::vec![a, b] })
            .collect();
        out.push(Layer::new(LayerKind::TwoQubit, ops));
    }
    for g in [&rx, &ry] {
        let ops = (0..n)
            .map(|q| Op::Rotation { param: next(), generator: g.clone(), sites: alloc::vec![q] })
            .collect();
        out.push(Layer::new(LayerKind::SingleQubit, ops));
    }
    Ok(out)
}

pub fn qaoa_params_per_layer(n: usize) -> usize {
    (n - 1) + 2 * n
}

/// QAOA chain ansatz; the studied parameter is the final R_Y on `obs_site`.
pub fn qaoa_ansatz(
    n: usize,
    layers: usize,
    reset: Option<&ResetPlan>,
    plan: ParamPlan,
    obs_site: usize,
) -> Result<Ansatz> {
    if n < 2 || layers == 0 || obs_site >= n {
        return Err(invalid("qaoa needs n >= 2, a layer and a valid observable site"));
    }
    let per = qaoa_params_per_layer(n);
    let depth = reset.map_or(layers, |r| r.every);
    let mut prog = CircuitProgram::new(n, depth, layers.div_ceil(depth), plan.blocks(layers) * per);
    for k in 1..=layers {
        if let Some(r) = reset {
            if chi(k, r.every)? {
                prog.push(r.layer()?)?;
            }
        }
        for layer in qaoa_chain_layer(n, plan.block(k) * per)? {
            prog.push(layer)?;
        }
    }
    let grad_param = plan.block(layers) * per + (n - 1) + n + obs_site;
    Ok(Ansatz { program: prog, grad_param })
}

/// Two-qubit layer pattern of the random dissipative circuit.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BrickStyle {
    /// Every axis, both parities, in every layer.
    Full,
    /// Every axis, parity alternating with the layer index.
    Alternating,
}

#[derive(Clone, Debug)]
pub enum NoiseModel {
    None,
    Depolarizing(f64),
    Channel(Arc<KrausChannel>),
}

impl NoiseModel {
    /// Contraction profile |D| of the single-qubit noise and its maximum.
    pub fn d_max(&self) -> Result<f64> {
        match self {
            NoiseModel::None => Ok(1.0),
            NoiseModel::Depolarizing(p) => Ok((1.0 - p).abs()),
            NoiseModel::Channel(ch) => Ok(ch.contraction_profile()?.1),
        }
    }
}

/// Parameterized exp(−iθX/2) on `site`, inserted after the two-qubit layer
/// `layers_from_end` steps before measurement (1 = final step).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Probe {
    pub site: usize,
    pub layers_from_end: usize,
}

/// Configuration of the random dissipative circuit family.
#[derive(Clone, Debug)]
pub struct DissipativeSpec {
    pub lattice: Lattice,
    pub depth: usize,
    pub jumps: usize,
    pub q: f64,
    pub noise: NoiseModel,
    pub style: BrickStyle,
    pub probe: Option<Probe>,
}

/// Sample one circuit: per step k, reset if χ(k), two-qubit layer, noise,
/// single-qubit layer. Random gates come from `ensemble`.
pub fn build_dissipative_circuit<R: Rng + ?Sized>(
    spec: &DissipativeSpec,
    ensemble: &GateEnsemble,
    rng: &mut R,
) -> Result<CircuitProgram> {
    let n = spec.lattice.n_sites();
    if spec.depth == 0 || spec.jumps == 0 {
        return Err(invalid("need L >= 1 and M >= 1"));
    }
    let total = spec.depth * spec.jumps;
    if let Some(p) = spec.probe {
        if p.layers_from_end == 0 || p.layers_from_end > total || p.site >= n {
            return Err(invalid("probe position outside the circuit"));
        }
    }
    let noise_op: Option<Arc<KrausChannel>> = match &spec.noise {
        NoiseModel::None => None,
        NoiseModel::Depolarizing(p) => {
            KrausChannel::depolarizing(*p)?;
            None
        }
        NoiseModel::Channel(ch) => {
            if ch.n_qubits() != 1 || !ch.is_unital(1e-10) {
                return Err(invalid("circuit noise must be a unital single-qubit channel"));
            }
            Some(ch.clone())
        }
    };
    let reset = Arc::new(KrausChannel::amplitude_damping(spec.q)?);
    let mut prog = CircuitProgram::new(n, spec.depth, spec.jumps, usize::from(spec.probe.is_some()));
    for k in 1..=total {
        if chi(k, spec.depth)? && !spec.lattice.reset_sites().is_empty() {
            let ops = spec
                .lattice
                .reset_sites()
                .iter()
                .map(|&s| Op::Channel { channel: reset.clone(), sites: alloc::vec![s] })
                .collect();
            prog.push(Layer::new(LayerKind::Reset, ops))?;
        }
        let mut ops = Vec::new();
        let parities: &[usize] = match spec.style {
            BrickStyle::Full => &[0, 1],
            BrickStyle::Alternating => {
                if (k - 1) % 2 == 0 {
                    &[0]
                } else {
                    &[1]
                }
            }
        };
        for axis in 0..spec.lattice.dim() {
            for &parity in parities {
                for (a, b) in spec.lattice.axis_pairs(axis, parity) {
                    ops.push(Op::Gate { u: Arc::new(ensemble.sample_two(rng)), sites: alloc::vec![a, b] });
                }
            }
        }
        if let Some(p) = spec.probe {
            if k == total + 1 - p.layers_from_end {
                ops.push(Op::Rotation {
                    param: 0,
                    generator: Arc::new(Generator::half_pauli(Pauli::X)),
                    sites: alloc::vec![p.site],
                });
            }
        }
        prog.push(Layer::new(LayerKind::TwoQubit, ops))?;
        match (&spec.noise, &noise_op) {
            (NoiseModel::Depolarizing(p), _) => {
                let ops = (0..n).map(|s| Op::Depolarize { site: s, p: *p }).collect();
                prog.push(Layer::new(LayerKind::Noise, ops))?;
            }
            (_, Some(ch)) => {
                let ops = (0..n)
                    .map(|s| Op::Channel { channel: ch.clone(), sites: alloc::vec![s] })
                    .collect();
                prog.push(Layer::new(LayerKind::Noise, ops))?;
            }
            _ => {}
        }
        let ops = (0..n)
            .map(|s| Op::Gate { u: Arc::new(ensemble.sample_one(rng)), sites: alloc::vec![s] })
            .collect();
        prog.push(Layer::new(LayerKind::SingleQubit, ops))?;
    }
    Ok(prog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_unitary, max_abs_diff};
    use crate::pauli::ObservableDecomposition;
    use crate::state::MixtureState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chi_examples() {
        assert!(chi(4, 2).unwrap());
        assert!(!chi(3, 2).unwrap());
        assert!((1..10).all(|l| chi(l, 1).unwrap()));
        assert!(chi(0, 2).is_err());
    }

    #[test]
    fn brick_examples() {
        assert!(max_abs_diff(&hardware_efficient_brick([0.0; 4]), &gates::cnot()) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let t = [rng.random(), rng.random(), rng.random(), rng.random()].map(|x: f64| 6.0 * x);
            assert!(is_unitary(&hardware_efficient_brick(t), 1e-12));
            let mut prog = CircuitProgram::new(2, 1, 1, 4);
            prog.push(Layer::new(LayerKind::TwoQubit, brick_ops(0, 1, [0, 1, 2, 3]))).unwrap();
            let rho = prog.evaluate_density(&t, &DensityState::zero(2)).unwrap();
            let u = hardware_efficient_brick(t);
            let dense = &u * DensityState::zero(2).matrix() * u.adjoint();
            assert!(max_abs_diff(rho.matrix(), &dense) < 1e-12);
        }
    }

    #[test]
    fn qaoa_layer_examples() {
        let layers = qaoa_chain_layer(4, 0).unwrap();
        let pairs: Vec<Vec<usize>> = layers[0].ops.iter().flat_map(|o| o.sites()).collect::<Vec<_>>().chunks(2).map(|c| c.to_vec()).collect();
        assert_eq!(pairs, [[0, 1], [2, 3]]);
        assert_eq!(layers[1].ops.iter().map(|o| o.sites()).collect::<Vec<_>>(), [[1, 2]]);
        let mut prog = CircuitProgram::new(4, 1, 1, qaoa_params_per_layer(4));
        for l in layers {
            prog.push(l).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r0 = crate::state::tests_support::random_state(4, 3, &mut rng);
        let same = prog.evaluate_density(&alloc::vec![0.0; prog.n_params()], &r0).unwrap();
        assert!(max_abs_diff(same.matrix(), r0.matrix()) < 1e-14);
        let theta: Vec<f64> = (0..prog.n_params()).map(|_| rng.random::<f64>() * 6.0).collect();
        let out = prog.evaluate_density(&theta, &r0).unwrap();
        assert!((out.purity() - r0.purity()).abs() < 1e-12);
    }

    #[test]
    fn dissipative_circuit_structure() {
        let lat = Lattice::chain(6).unwrap().with_reset_sites([0, 2, 4].into_iter().collect()).unwrap();
        let spec = DissipativeSpec {
            lattice: lat,
            depth: 5,
            jumps: 8,
            q: 1.0,
            noise: NoiseModel::None,
            style: BrickStyle::Alternating,
            probe: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let prog = build_dissipative_circuit(&spec, &GateEnsemble::Haar, &mut rng).unwrap();
        assert_eq!(prog.count_layers(LayerKind::TwoQubit), 40);
        assert_eq!(prog.count_layers(LayerKind::Reset), 8);
        // Eq-(2) order within a step
        let kinds: Vec<LayerKind> = prog.layers().iter().map(|l| l.kind).take(12).collect();
        assert_eq!(kinds[..4], [LayerKind::TwoQubit, LayerKind::SingleQubit, LayerKind::TwoQubit, LayerKind::SingleQubit]);
        assert_eq!(kinds[8..11], [LayerKind::Reset, LayerKind::TwoQubit, LayerKind::SingleQubit]);
    }

    #[test]
    fn full_brickwork_covers_every_axis() {
        let lat = Lattice::hypercube(2, 4).unwrap();
        let spec = DissipativeSpec {
            lattice: lat.clone(),
            depth: 1,
            jumps: 1,
            q: 0.0,
            noise: NoiseModel::Depolarizing(0.1),
            style: BrickStyle::Full,
            probe: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let prog = build_dissipative_circuit(&spec, &GateEnsemble::Haar, &mut rng).unwrap();
        let two = prog.layers().iter().find(|l| l.kind == LayerKind::TwoQubit).unwrap();
        let mut covered = BTreeSet::new();
        for op in &two.ops {
            let s = op.sites();
            let (a, b) = (lat.coords(s[0]).unwrap(), lat.coords(s[1]).unwrap());
            assert_eq!(lat.manhattan_distance(s[0], s[1]).unwrap(), 1);
            covered.insert((s[0].min(s[1]), s[0].max(s[1])));
            assert!(a[0] == b[0] || a[1] == b[1]);
        }
        // every nearest-neighbour bond of the open 4x4 grid appears once
        assert_eq!(covered.len(), 24);
        assert_eq!(two.ops.len(), 24);
    }

    #[test]
    fn q_zero_resets_are_identity() {
        let lat = Lattice::chain(4).unwrap().with_reset_sites([0, 2].into_iter().collect()).unwrap();
        let mk = |q| DissipativeSpec {
            lattice: lat.clone(),
            depth: 2,
            jumps: 2,
            q,
            noise: NoiseModel::Depolarizing(0.05),
            style: BrickStyle::Alternating,
            probe: None,
        };
        let a = build_dissipative_circuit(&mk(0.0), &GateEnsemble::Haar, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let mut b = CircuitProgram::new(4, 2, 2, 0);
        for l in a.layers().iter().filter(|l| l.kind != LayerKind::Reset) {
            b.push(l.clone()).unwrap();
        }
        let r0 = DensityState::basis(4, 5);
        let x = a.evaluate_density(&[], &r0).unwrap();
        let y = b.evaluate_density(&[], &r0).unwrap();
        assert!(max_abs_diff(x.matrix(), y.matrix()) < 1e-14);
    }

    #[test]
    fn purity_preserved_without_noise_or_reset() {
        let an = brickwork_ansatz(4, 6, None, ParamPlan::Independent, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let theta: Vec<f64> = (0..an.program.n_params()).map(|_| rng.random::<f64>() * 6.0).collect();
        let out = an.program.evaluate_density(&theta, &DensityState::zero(4)).unwrap();
        assert!((out.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_reset_jump_maps_to_zero_state() {
        let mut prog = CircuitProgram::new(3, 1, 1, 0);
        let ch = Arc::new(KrausChannel::amplitude_damping(1.0).unwrap());
        prog.push(Layer::new(
            LayerKind::Reset,
            (0..3).map(|s| Op::Channel { channel: ch.clone(), sites: alloc::vec![s] }).collect(),
        ))
        .unwrap();
        prog.push(Layer::new(LayerKind::TwoQubit, Vec::new())).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r0 = crate::state::tests_support::random_state(3, 8, &mut rng);
        let out = prog.evaluate_density(&[], &r0).unwrap();
        assert!(max_abs_diff(out.matrix(), DensityState::zero(3).matrix()) < 1e-14);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let prog = CircuitProgram::new(2, 1, 1, 0);
        let r0 = DensityState::basis(2, 3);
        assert_eq!(prog.evaluate_density(&[], &r0).unwrap(), r0);
    }

    #[test]
    fn light_cone_examples() {
        let an = brickwork_ansatz(6, 1, None, ParamPlan::Independent, 0).unwrap();
        let cone = an.program.light_cone(&[0].into_iter().collect());
        assert!(cone[0].iter().all(|s| *s <= 1));
        let an = brickwork_ansatz(8, 3, None, ParamPlan::Independent, 0).unwrap();
        let cone = an.program.light_cone(&[0].into_iter().collect());
        assert_eq!(cone[0], (0..4).collect());
    }

    #[test]
    fn correlated_plan_repeats_parameters() {
        let an = brickwork_ansatz(6, 40, None, ParamPlan::Correlated { period: 5 }, 1).unwrap();
        assert_eq!(an.program.n_params(), 5 * 3 * 4);
        assert_eq!(an.program.occurrences(an.grad_param).len(), 8);
        let ind = brickwork_ansatz(6, 40, None, ParamPlan::Independent, 1).unwrap();
        assert_eq!(ind.program.occurrences(ind.grad_param).len(), 1);
    }

    #[test]
    fn backends_agree_on_reset_brickwork() {
        let plan = ResetPlan::strided(6, 2, 5, 1.0).unwrap();
        let an = brickwork_ansatz(6, 12, Some(&plan), ParamPlan::Independent, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let theta: Vec<f64> = (0..an.program.n_params()).map(|_| rng.random::<f64>() * 6.0).collect();
        let dense = an.program.evaluate_density(&theta, &DensityState::zero(6)).unwrap();
        let mut mix = MixtureState::zero(6);
        an.program.evaluate(&theta, &mut mix).unwrap();
        assert!(max_abs_diff(dense.matrix(), mix.to_density().matrix()) < 1e-12);
        let z1 = ObservableDecomposition::single(PauliString::single(6, 1, Pauli::Z).unwrap());
        assert!((dense.expectation(&z1) - mix.expectation(&z1)).abs() < 1e-12);
    }
}
