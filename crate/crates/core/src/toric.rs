//! Toric-code ladder of height 2: Hamiltonian, noisy rotation ansatz and
//! stabilizer-pumping jumps.
//!
//! Sites are row-major, site(r, c) = r·w + c with columns periodic. The
//! plaquette A_x = XXXX and vertex B_x = ZZZZ act on columns {x, x+1 mod w}.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::channels::KrausChannel;
use crate::circuit::{Ansatz, CircuitProgram, Generator, Layer, LayerKind, Op};
use crate::error::{invalid, Result};
use crate::linalg::{c, gates, kron, CMat};
use crate::pauli::{ObservableDecomposition, Pauli, PauliString};
use crate::state::DensityState;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StabilizerKind {
    Plaquette,
    Vertex,
}

impl StabilizerKind {
    fn pauli(self) -> Pauli {
        match self {
            StabilizerKind::Plaquette => Pauli::X,
            StabilizerKind::Vertex => Pauli::Z,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ToricLattice {
    w: usize,
}

impl ToricLattice {
    pub fn new(w: usize) -> Result<Self> {
        if w < 2 {
            return Err(invalid("toric ladder needs width >= 2"));
        }
        Ok(ToricLattice { w })
    }

    /// Lattice with n = 2w qubits.
    pub fn with_qubits(n: usize) -> Result<Self> {
        if n % 2 != 0 {
            return Err(invalid("toric ladder needs an even qubit count"));
        }
        Self::new(n / 2)
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn n(&self) -> usize {
        2 * self.w
    }

    pub fn site(&self, r: usize, col: usize) -> usize {
        r * self.w + col % self.w
    }

    /// Sites of stabilizer x; the first one receives the pump correction.
    pub fn stabilizer_sites(&self, x: usize) -> [usize; 4] {
        [self.site(0, x), self.site(0, x + 1), self.site(1, x), self.site(1, x + 1)]
    }

    /// Stabilizer string embedded in a register of `total` qubits.
    pub fn stabilizer(&self, kind: StabilizerKind, x: usize, total: usize) -> PauliString {
        PauliString::on_sites(total, &self.stabilizer_sites(x), kind.pauli()).expect("sites in range")
    }

    /// All 2w stabilizers, plaquettes first. Widths of 2 repeat each term.
    pub fn stabilizers(&self, total: usize) -> Vec<(StabilizerKind, PauliString)> {
        let mut out = Vec::with_capacity(2 * self.w);
        for kind in [StabilizerKind::Plaquette, StabilizerKind::Vertex] {
            for x in 0..self.w {
                out.push((kind, self.stabilizer(kind, x, total)));
            }
        }
        out
    }

    pub fn n_terms(&self) -> usize {
        2 * self.w
    }

    /// H = −Σ A_x − Σ B_x with repeated terms merged.
    pub fn hamiltonian(&self, total: usize) -> ObservableDecomposition {
        let mut terms: Vec<(f64, PauliString)> = Vec::new();
        for (_, p) in self.stabilizers(total) {
            match terms.iter_mut().find(|(_, q)| *q == p) {
                Some(t) => t.0 -= 1.0,
                None => terms.push((-1.0, p)),
            }
        }
        ObservableDecomposition::new(terms).expect("distinct stabilizers")
    }

    /// −⟨H⟩ / (number of terms); 1 in the ground space.
    pub fn normalized_energy(&self, rho: &DensityState) -> f64 {
        let total = rho.n();
        let s: f64 = self
            .stabilizers(total)
            .iter()
            .map(|(_, p)| crate::state::SimState::expectation_pauli(rho, p))
            .sum();
        s / self.n_terms() as f64
    }
}

/// Rank over GF(2) of the symplectic vectors of `paulis` (n ≤ 64).
pub fn gf2_rank(paulis: &[PauliString]) -> usize {
    let mut rows: Vec<u128> = paulis
        .iter()
        .map(|p| {
            let (x, z, _) = p.masks();
            (x as u128) | ((z as u128) << 64)
        })
        .collect();
    let mut rank = 0;
    for bit in 0..128 {
        let mask = 1u128 << bit;
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i] & mask != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        for i in 0..rows.len() {
            if i != rank && rows[i] & mask != 0 {
                rows[i] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

fn noisy(ops: &mut Vec<Op>, sites: &[usize], p: f64) {
    if p > 0.0 {
        ops.extend(sites.iter().map(|&s| Op::Depolarize { site: s, p }));
    }
}

/// One ansatz layer: exp(−iθ_A A_x/2) for every plaquette, exp(−iθ_B B_x/2)
/// for every vertex, then the mixer exp(−iθ_M Z_q/2) on every qubit.
/// Depolarizing noise at rate `p` follows each rotation on its qubits.
pub fn toric_unitary_layer(lat: &ToricLattice, slots: [usize; 3], p: f64) -> Vec<Layer> {
    let n = lat.n();
    let mut out = Vec::with_capacity(3);
    for (kind, slot) in [(StabilizerKind::Plaquette, slots[0]), (StabilizerKind::Vertex, slots[1])] {
        let mut ops = Vec::new();
        for x in 0..lat.width() {
            ops.push(Op::PauliRotation { param: slot, scale: 0.5, pauli: lat.stabilizer(kind, x, n) });
            noisy(&mut ops, &lat.stabilizer_sites(x), p);
        }
        out.push(Layer::new(LayerKind::Other, ops));
    }
    let mut ops = Vec::new();
    for q in 0..n {
        ops.push(Op::PauliRotation {
            param: slots[2],
            scale: 0.5,
            pauli: PauliString::single(n, q, Pauli::Z).expect("site in range"),
        });
        noisy(&mut ops, &[q], p);
    }
    out.push(Layer::new(LayerKind::SingleQubit, ops));
    out
}

/// Rotation ansatz with `layers` layers (default w) and three slots per layer.
/// The studied parameter is the first plaquette angle.
pub fn toric_unitary_ansatz(lat: &ToricLattice, layers: usize, p: f64) -> Result<Ansatz> {
    if layers == 0 {
        return Err(invalid("need at least one layer"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("noise rate outside [0, 1]"));
    }
    let mut prog = CircuitProgram::new(lat.n(), layers, 1, 3 * layers);
    for l in 0..layers {
        for layer in toric_unitary_layer(lat, [3 * l, 3 * l + 1, 3 * l + 2], p) {
            prog.push(layer)?;
        }
    }
    Ok(Ansatz { program: prog, grad_param: 0 })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AncillaMode {
    /// One ancilla reused sequentially by every pump.
    Shared,
    /// One ancilla per stabilizer, pumps run in parallel rounds.
    PerStabilizer,
}

/// Stabilizer-pumping ansatz.
#[derive(Clone, Debug)]
pub struct ToricDissipative {
    pub lattice: ToricLattice,
    pub jumps: usize,
    pub p: f64,
    pub mode: AncillaMode,
    /// Share (θ_X, θ_Z) across all jumps instead of one pair per jump.
    pub tied: bool,
}

fn proj(v: [f64; 2]) -> CMat {
    let k = CMat::from_column_slice(2, 1, &[c(v[0], 0.0), c(v[1], 0.0)]);
    &k * k.adjoint()
}

/// Gates of one pump: parity transfer from the four system qubits to the
/// ancilla, then the ancilla-controlled correction on the first qubit.
/// Every transfer is G(θ) = (S on control)·CR_X(θ), so G(π) = CNOT; plaquettes
/// use the Hadamard frame on the system side.
struct PumpGates {
    parity_gen: Arc<Generator>,
    parity_fix: Arc<CMat>,
    correction_gen: Arc<Generator>,
    s: Arc<CMat>,
}

impl PumpGates {
    fn new(kind: StabilizerKind) -> Self {
        let h = gates::h();
        let s = gates::s();
        let x_half = Pauli::X.matrix() * c(0.5, 0.0);
        match kind {
            StabilizerKind::Vertex => PumpGates {
                parity_gen: Arc::new(Generator::controlled_half_pauli(Pauli::X)),
                parity_fix: Arc::new(s.clone()),
                correction_gen: Arc::new(Generator::controlled_half_pauli(Pauli::X)),
                s: Arc::new(s),
            },
            StabilizerKind::Plaquette => {
                let r = core::f64::consts::FRAC_1_SQRT_2;
                let minus = proj([r, -r]);
                PumpGates {
                    parity_gen: Arc::new(Generator::new(kron(&minus, &x_half)).expect("generator")),
                    parity_fix: Arc::new(&h * &s * &h),
                    correction_gen: Arc::new(Generator::controlled_half_pauli(Pauli::Z)),
                    s: Arc::new(s),
                }
            }
        }
    }

    fn transfer(&self, sys: usize, anc: usize, slot: usize, p: f64, ops: &mut Vec<Op>) {
        ops.push(Op::Rotation { param: slot, generator: self.parity_gen.clone(), sites: alloc::vec![sys, anc] });
        ops.push(Op::Gate { u: self.parity_fix.clone(), sites: alloc::vec![sys] });
        noisy(ops, &[sys, anc], p);
    }

    fn correct(&self, anc: usize, sys: usize, slot: usize, p: f64, ops: &mut Vec<Op>) {
        ops.push(Op::Rotation { param: slot, generator: self.correction_gen.clone(), sites: alloc::vec![anc, sys] });
        ops.push(Op::Gate { u: self.s.clone(), sites: alloc::vec![anc] });
        noisy(ops, &[anc, sys], p);
    }
}

impl ToricDissipative {
    pub fn total_qubits(&self) -> usize {
        match self.mode {
            AncillaMode::Shared => self.lattice.n() + 1,
            AncillaMode::PerStabilizer => self.lattice.n() + self.lattice.n_terms(),
        }
    }

    pub fn n_params(&self) -> usize {
        if self.tied {
            2
        } else {
            2 * self.jumps
        }
    }

    /// Slots (θ_X, θ_Z) of jump j.
    pub fn slots(&self, j: usize) -> (usize, usize) {
        if self.tied {
            (0, 1)
        } else {
            (2 * j, 2 * j + 1)
        }
    }

    /// Layers of jump `j`.
    pub fn jump_layers(&self, j: usize) -> Result<Vec<Layer>> {
        let lat = &self.lattice;
        let n = lat.n();
        let (sx, sz) = self.slots(j);
        let reset = Arc::new(KrausChannel::amplitude_damping(1.0)?);
        let mut out = Vec::new();
        let kinds = [(StabilizerKind::Plaquette, sx), (StabilizerKind::Vertex, sz)];
        match self.mode {
            AncillaMode::Shared => {
                for (kind, slot) in kinds {
                    let g = PumpGates::new(kind);
                    // a correction on site(0, x) also flips stabilizer x−1, pumped next
                    for x in (0..lat.width()).rev() {
                        out.push(Layer::new(
                            LayerKind::Reset,
                            alloc::vec![Op::Channel { channel: reset.clone(), sites: alloc::vec![n] }],
                        ));
                        let sites = lat.stabilizer_sites(x);
                        let mut ops = Vec::new();
                        for &q in &sites {
                            g.transfer(q, n, slot, self.p, &mut ops);
                        }
                        g.correct(n, sites[0], slot, self.p, &mut ops);
                        out.push(Layer::new(LayerKind::Other, ops));
                    }
                }
            }
            AncillaMode::PerStabilizer => {
                let w = lat.width();
                let ancilla = |kind: StabilizerKind, x: usize| match kind {
                    StabilizerKind::Plaquette => n + x,
                    StabilizerKind::Vertex => n + w + x,
                };
                out.push(Layer::new(
                    LayerKind::Reset,
                    (n..n + 2 * w)
                        .map(|a| Op::Channel { channel: reset.clone(), sites: alloc::vec![a] })
                        .collect(),
                ));
                for (kind, slot) in kinds {
                    let g = PumpGates::new(kind);
                    for round in 0..4 {
                        let mut ops = Vec::new();
                        for x in 0..w {
                            g.transfer(lat.stabilizer_sites(x)[round], ancilla(kind, x), slot, self.p, &mut ops);
                        }
                        out.push(Layer::new(LayerKind::TwoQubit, ops));
                    }
                    let mut ops = Vec::new();
                    for x in 0..w {
                        g.correct(ancilla(kind, x), lat.stabilizer_sites(x)[0], slot, self.p, &mut ops);
                    }
                    out.push(Layer::new(LayerKind::TwoQubit, ops));
                }
            }
        }
        Ok(out)
    }

    /// All jumps; the studied parameter is θ_X of the final jump.
    pub fn build(&self) -> Result<Ansatz> {
        if self.jumps == 0 {
            return Err(invalid("need at least one jump"));
        }
        let program = self.jump_range(0..self.jumps)?;
        Ok(Ansatz { program, grad_param: self.slots(self.jumps - 1).0 })
    }

    /// Jumps in `range` only, addressed by the full parameter vector.
    pub fn jump_range(&self, range: core::ops::Range<usize>) -> Result<CircuitProgram> {
        if range.end > self.jumps {
            return Err(invalid("jump range beyond the configured jumps"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid("noise rate outside [0, 1]"));
        }
        let mut prog = CircuitProgram::new(self.total_qubits(), 1, range.len(), self.n_params());
        for j in range {
            for layer in self.jump_layers(j)? {
                prog.push(layer)?;
            }
        }
        Ok(prog)
    }

    /// Fully mixed system with ancillas in |0⟩.
    pub fn initial_state(&self) -> DensityState {
        let n = self.lattice.n();
        let anc = self.total_qubits() - n;
        let m = kron(
            DensityState::maximally_mixed(n).matrix(),
            DensityState::zero(anc).matrix(),
        );
        DensityState::from_operator(m).expect("square power-of-two matrix")
    }
}
