//! Dense density matrices, coherence vectors and low-rank mixtures.

use alloc::vec::Vec;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::kernels::{self, PauliAction};
use crate::linalg::{c, eigh, CMat, C64, ONE, ZERO};
use crate::pauli::{ObservableDecomposition, PauliString};

pub const STATE_TOL: f64 = 1e-9;
pub const ENTROPY_CLAMP: f64 = 1e-12;

pub(crate) fn check_sites(n: usize, sites: &[usize]) -> Result<()> {
    for (i, &s) in sites.iter().enumerate() {
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, n });
        }
        if sites[..i].contains(&s) {
            return Err(Error::SiteCollision(s));
        }
    }
    Ok(())
}

fn action(p: &PauliString) -> PauliAction {
    let (x, z, ny) = p.masks();
    PauliAction::new(x, z, ny, p.sign())
}

/// Operations shared by every state backend used in circuit evaluation.
///
/// Site lists are assumed valid; callers check them once at construction.
pub trait SimState: Clone {
    fn n_qubits(&self) -> usize;
    fn apply_unitary(&mut self, u: &CMat, sites: &[usize]);
    fn apply_channel(&mut self, ch: &KrausChannel, sites: &[usize]);
    fn depolarize(&mut self, site: usize, p: f64);
    /// exp(−i t P).
    fn pauli_rotation(&mut self, p: &PauliString, t: f64);
    fn expectation_pauli(&self, p: &PauliString) -> f64;
    fn expectation(&self, o: &ObservableDecomposition) -> f64 {
        o.terms()
            .iter()
            .map(|(a, p)| a * self.expectation_pauli(p))
            .sum()
    }
    /// Weighted states whose weighted sum is i[ρ, H] for H acting on `sites`.
    fn commutator_parts(&self, h: &CMat, sites: &[usize]) -> Vec<(f64, Self)>;
    fn to_density(&self) -> DensityState;
}

/// Hermitian 2^n x 2^n matrix, stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    n: usize,
    rho: CMat,
}

impl DensityState {
    /// |0…0⟩⟨0…0|.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let dim = 1usize << n;
        let mut rho = CMat::zeros(dim, dim);
        rho[(index, index)] = ONE;
        DensityState { n, rho }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        DensityState {
            n,
            rho: CMat::identity(dim, dim) * c(1.0 / dim as f64, 0.0),
        }
    }

    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let dim = psi.len();
        if !dim.is_power_of_two() || dim == 0 {
            return Err(crate::error::invalid("state vector length must be a power of two"));
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(crate::error::invalid("state vector is not normalized"));
        }
        Ok(DensityState {
            n: dim.trailing_zeros() as usize,
            rho: &v * v.adjoint(),
        })
    }

    /// Checks trace, hermiticity and positivity.
    pub fn from_matrix(rho: CMat) -> Result<Self> {
        let s = Self::from_operator(rho)?;
        s.validate(STATE_TOL)?;
        Ok(s)
    }

    /// Wraps any square power-of-two matrix (used for operators in the Heisenberg picture).
    pub fn from_operator(rho: CMat) -> Result<Self> {
        if !rho.is_square() || !rho.nrows().is_power_of_two() {
            return Err(crate::error::invalid("matrix must be square with power-of-two size"));
        }
        Ok(DensityState {
            n: rho.nrows().trailing_zeros() as usize,
            rho,
        })
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::Numerical(alloc::format!("trace {tr} differs from 1")));
        }
        if !crate::linalg::is_hermitian(&self.rho, tol) {
            return Err(Error::Numerical("matrix is not Hermitian".into()));
        }
        let (vals, _) = eigh(&self.rho);
        if vals[0] < -tol {
            return Err(Error::Numerical(alloc::format!("negative eigenvalue {}", vals[0])));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn into_matrix(self) -> CMat {
        self.rho
    }

    pub fn trace(&self) -> C64 {
        crate::linalg::trace(&self.rho)
    }

    fn row_bit(&self, q: usize) -> usize {
        self.n - 1 - q
    }

    fn col_bit(&self, q: usize) -> usize {
        2 * self.n - 1 - q
    }

    pub fn checked_unitary(&mut self, u: &CMat, sites: &[usize]) -> Result<()> {
        check_sites(self.n, sites)?;
        if u.nrows() != 1usize << sites.len() {
            return Err(Error::Dimension {
                expected: 1usize << sites.len(),
                actual: u.nrows(),
            });
        }
        SimState::apply_unitary(self, u, sites);
        Ok(())
    }

    pub fn checked_channel(&mut self, ch: &KrausChannel, sites: &[usize]) -> Result<()> {
        check_sites(self.n, sites)?;
        if ch.n_qubits() != sites.len() {
            return Err(Error::Dimension {
                expected: ch.n_qubits(),
                actual: sites.len(),
            });
        }
        SimState::apply_channel(self, ch, sites);
        Ok(())
    }

    /// Left-multiply by an arbitrary local operator.
    pub fn left_multiply(&mut self, a: &CMat, sites: &[usize]) {
        let pos: Vec<usize> = sites.iter().map(|&q| self.row_bit(q)).collect();
        kernels::apply_local(self.rho.as_mut_slice(), 2 * self.n, a, &pos);
    }

    /// Right-multiply by an arbitrary local operator.
    pub fn right_multiply(&mut self, a: &CMat, sites: &[usize]) {
        let pos: Vec<usize> = sites.iter().map(|&q| self.col_bit(q)).collect();
        kernels::apply_local(self.rho.as_mut_slice(), 2 * self.n, &a.transpose(), &pos);
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        let (vals, _) = eigh(&self.rho);
        vals.iter()
            .filter(|&&l| l > ENTROPY_CLAMP)
            .map(|&l| -l * libm::log2(l))
            .sum()
    }

    /// ⟨ψ|ρ|ψ⟩ for a normalized pure target.
    pub fn fidelity_pure(&self, psi: &[C64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(psi);
        (v.adjoint() * &self.rho * &v)[(0, 0)].re
    }

    /// Uhlmann fidelity (Tr√(√ρ σ √ρ))².
    pub fn fidelity(&self, other: &DensityState) -> f64 {
        let (vals, vecs) = eigh(&self.rho);
        let sq = nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&l| c(libm::sqrt(l.max(0.0)), 0.0)),
        );
        let root = &vecs * CMat::from_diagonal(&sq) * vecs.adjoint();
        let m = &root * &other.rho * &root;
        let (mv, _) = eigh(&((&m + m.adjoint()) * c(0.5, 0.0)));
        let s: f64 = mv.iter().map(|&l| libm::sqrt(l.max(0.0))).sum();
        (s * s).min(1.0)
    }

    /// Reduced state on `keep`, in the listed order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityState> {
        check_sites(self.n, keep)?;
        let n = self.n;
        let dim = 1usize << n;
        let k = keep.len();
        let kmask: usize = keep.iter().map(|&q| 1usize << (n - 1 - q)).sum();
        let squeeze = |x: usize| -> usize {
            keep.iter()
                .fold(0, |acc, &q| (acc << 1) | ((x >> (n - 1 - q)) & 1))
        };
        let mut out = CMat::zeros(1usize << k, 1usize << k);
        for col in 0..dim {
            for r in 0..dim {
                if (r & !kmask) == (col & !kmask) {
                    out[(squeeze(r), squeeze(col))] += self.rho[(r, col)];
                }
            }
        }
        Ok(DensityState { n: k, rho: out })
    }

    pub fn to_coherence(&self) -> CoherenceVector {
        let count = 1usize << (2 * self.n);
        let v = (0..count)
            .map(|i| self.expectation_pauli(&PauliString::from_basis_index(self.n, i)))
            .collect();
        CoherenceVector { n: self.n, v }
    }

    /// Reconstruct ρ, flagging vectors that are not physical.
    pub fn from_coherence(cv: &CoherenceVector) -> Result<DensityState> {
        let s = Self::from_coherence_unchecked(cv);
        let (vals, _) = eigh(&s.rho);
        if vals[0] < -1e-8 {
            return Err(Error::Numerical(alloc::format!(
                "coherence vector is not physical: eigenvalue {}",
                vals[0]
            )));
        }
        Ok(s)
    }

    pub fn from_coherence_unchecked(cv: &CoherenceVector) -> DensityState {
        let n = cv.n;
        let dim = 1usize << n;
        let mut rho = CMat::zeros(dim, dim);
        let scale = 1.0 / dim as f64;
        for (i, &x) in cv.v.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let act = action(&PauliString::from_basis_index(n, i));
            for k in 0..dim {
                rho[(k ^ act.x, k)] += act.phase(k) * (x * scale);
            }
        }
        DensityState { n, rho }
    }
}

impl SimState for DensityState {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn apply_unitary(&mut self, u: &CMat, sites: &[usize]) {
        let rows: Vec<usize> = sites.iter().map(|&q| self.row_bit(q)).collect();
        let cols: Vec<usize> = sites.iter().map(|&q| self.col_bit(q)).collect();
        let data = self.rho.as_mut_slice();
        kernels::apply_local(data, 2 * self.n, u, &rows);
        kernels::apply_local(data, 2 * self.n, &u.map(|x| x.conj()), &cols);
    }

    fn apply_channel(&mut self, ch: &KrausChannel, sites: &[usize]) {
        let mut pos: Vec<usize> = sites.iter().map(|&q| self.row_bit(q)).collect();
        pos.extend(sites.iter().map(|&q| self.col_bit(q)));
        kernels::apply_local(self.rho.as_mut_slice(), 2 * self.n, ch.superop(), &pos);
    }

    fn depolarize(&mut self, site: usize, p: f64) {
        let (rb, cb) = (self.row_bit(site), self.col_bit(site));
        kernels::depolarize(self.rho.as_mut_slice(), 2 * self.n, rb, cb, p);
    }

    fn pauli_rotation(&mut self, p: &PauliString, t: f64) {
        kernels::pauli_rotation_density(self.rho.as_mut_slice(), self.n, &action(p), t);
    }

    fn expectation_pauli(&self, p: &PauliString) -> f64 {
        kernels::pauli_expectation_density(self.rho.as_slice(), self.n, &action(p)).re
    }

    fn commutator_parts(&self, h: &CMat, sites: &[usize]) -> Vec<(f64, Self)> {
        let mut rh = self.clone();
        rh.right_multiply(h, sites);
        let mut hr = self.clone();
        hr.left_multiply(h, sites);
        let rho = (rh.rho - hr.rho) * crate::linalg::I;
        alloc::vec![(1.0, DensityState { n: self.n, rho })]
    }

    fn to_density(&self) -> DensityState {
        self.clone()
    }
}

/// Real Pauli-basis vector v_P = Tr(P ρ), with v_I = 1 for states.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceVector {
    pub n: usize,
    pub v: Vec<f64>,
}

impl CoherenceVector {
    /// Build from the traceless block, prepending v_I = 1.
    pub fn from_traceless(n: usize, rest: &[f64]) -> Self {
        let mut v = Vec::with_capacity(rest.len() + 1);
        v.push(1.0);
        v.extend_from_slice(rest);
        CoherenceVector { n, v }
    }

    pub fn traceless(&self) -> &[f64] {
        &self.v[1..]
    }

    /// (1 + ‖v_traceless‖²)/2^n.
    pub fn purity(&self) -> f64 {
        let s: f64 = self.traceless().iter().map(|x| x * x).sum();
        (self.v[0] * self.v[0] + s) / (1usize << self.n) as f64
    }

    pub fn dot(&self, o: &ObservableDecomposition) -> f64 {
        o.terms()
            .iter()
            .map(|(a, p)| a * self.v[p.basis_index()])
            .sum()
    }
}

/// ρ = W W† with W a 2^n x r block of column vectors.
///
/// Pure states have rank one; channels grow the rank, which is compressed
/// back to the numerical rank once the column count has grown enough to pay for it.
#[derive(Clone, Debug)]
pub struct MixtureState {
    n: usize,
    cols: usize,
    /// Column count after the last compression.
    floor: usize,
    w: Vec<C64>,
}

const RANK_TOL: f64 = 1e-14;

impl MixtureState {
    pub fn from_pure(psi: &[C64]) -> Self {
        MixtureState {
            n: psi.len().trailing_zeros() as usize,
            cols: 1,
            floor: 1,
            w: psi.to_vec(),
        }
    }

    pub fn zero(n: usize) -> Self {
        let mut w = alloc::vec![ZERO; 1usize << n];
        w[0] = ONE;
        MixtureState { n, cols: 1, floor: 1, w }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        let mut w = alloc::vec![ZERO; dim * dim];
        let s = c(1.0 / libm::sqrt(dim as f64), 0.0);
        for i in 0..dim {
            w[i * dim + i] = s;
        }
        MixtureState { n, cols: dim, floor: dim, w }
    }

    /// Stored columns; an upper bound on the rank until `compress` runs.
    pub fn rank(&self) -> usize {
        self.cols
    }

    fn live_rows(&self) -> usize {
        let dim = 1usize << self.n;
        (0..dim)
            .filter(|&r| (0..self.cols).any(|j| self.w[j * dim + r] != ZERO))
            .count()
    }

    fn row_positions(&self, sites: &[usize]) -> Vec<usize> {
        sites.iter().map(|&q| self.n - 1 - q).collect()
    }

    fn apply_kraus(&mut self, kraus: &[CMat], sites: &[usize]) {
        let pos = self.row_positions(sites);
        let mut out = Vec::with_capacity(self.w.len() * kraus.len());
        for k in kraus {
            let mut block = self.w.clone();
            kernels::apply_local(&mut block, self.n, k, &pos);
            out.extend_from_slice(&block);
        }
        self.cols *= kraus.len();
        self.w = out;
        if self.cols > 8 * self.floor.max(1) || self.cols > 2 * self.live_rows() {
            self.compress();
        }
    }

    /// Replace W by an equivalent block with orthogonal columns and no
    /// columns below the rank tolerance.
    pub fn compress(&mut self) {
        let dim = 1usize << self.n;
        let m = self.cols;
        let live: Vec<usize> = (0..dim)
            .filter(|&r| (0..m).any(|j| self.w[j * dim + r] != ZERO))
            .collect();
        let rl = live.len();
        if rl == 0 {
            self.cols = 0;
            self.floor = 0;
            self.w.clear();
            return;
        }
        let mut new_w = Vec::new();
        if rl < m {
            let a = CMat::from_fn(rl, m, |i, j| self.w[j * dim + live[i]]);
            let g = &a * a.adjoint();
            let (vals, vecs) = eigh(&g);
            let top = vals.last().copied().unwrap_or(0.0);
            for (k, &l) in vals.iter().enumerate().rev() {
                if l <= RANK_TOL * top || l <= 0.0 {
                    continue;
                }
                let s = libm::sqrt(l);
                let mut col = alloc::vec![ZERO; dim];
                for (i, &r) in live.iter().enumerate() {
                    col[r] = vecs[(i, k)] * s;
                }
                new_w.extend_from_slice(&col);
            }
        } else {
            let wm = CMat::from_column_slice(dim, m, &self.w);
            let g = wm.adjoint() * &wm;
            let (vals, vecs) = eigh(&g);
            let top = vals.last().copied().unwrap_or(0.0);
            for (k, &l) in vals.iter().enumerate().rev() {
                if l <= RANK_TOL * top || l <= 0.0 {
                    continue;
                }
                let col = &wm * vecs.column(k);
                new_w.extend(col.iter().copied());
            }
        }
        self.cols = new_w.len() / dim;
        self.floor = self.cols;
        self.w = new_w;
    }

    pub fn trace(&self) -> f64 {
        self.w.iter().map(|x| x.norm_sqr()).sum()
    }
}

impl SimState for MixtureState {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn apply_unitary(&mut self, u: &CMat, sites: &[usize]) {
        let pos = self.row_positions(sites);
        kernels::apply_local(&mut self.w, self.n, u, &pos);
    }

    fn apply_channel(&mut self, ch: &KrausChannel, sites: &[usize]) {
        self.apply_kraus(ch.kraus(), sites);
    }

    fn depolarize(&mut self, site: usize, p: f64) {
        let ch = KrausChannel::depolarizing(p).expect("validated rate");
        self.apply_kraus(ch.kraus(), &[site]);
    }

    fn pauli_rotation(&mut self, p: &PauliString, t: f64) {
        kernels::pauli_rotation_vectors(&mut self.w, self.n, &action(p), t);
    }

    fn expectation_pauli(&self, p: &PauliString) -> f64 {
        kernels::pauli_expectation_vectors(&self.w, self.n, &action(p)).re
    }

    fn commutator_parts(&self, h: &CMat, sites: &[usize]) -> Vec<(f64, Self)> {
        let pos = self.row_positions(sites);
        let mut hw = self.w.clone();
        kernels::apply_local(&mut hw, self.n, h, &pos);
        let build = |sign: f64| MixtureState {
            n: self.n,
            cols: self.cols,
            floor: self.floor,
            w: self
                .w
                .iter()
                .zip(&hw)
                .map(|(a, b)| a + b * c(0.0, sign))
                .collect(),
        };
        alloc::vec![(0.5, build(-1.0)), (-0.5, build(1.0))]
    }

    fn to_density(&self) -> DensityState {
        let dim = 1usize << self.n;
        let wm = CMat::from_column_slice(dim, self.cols, &self.w);
        DensityState {
            n: self.n,
            rho: &wm * wm.adjoint(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gates, kron, max_abs_diff};
    use crate::pauli::Pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::tests_support::random_state;

    #[test]
    fn channel_embedding_examples() {
        let mut s = DensityState::basis(2, 3);
        let before = s.clone();
        s.checked_channel(&KrausChannel::identity(1), &[1]).unwrap();
        assert_eq!(s, before);
        s.checked_channel(&KrausChannel::amplitude_damping(1.0).unwrap(), &[0]).unwrap();
        assert!(max_abs_diff(s.matrix(), DensityState::basis(2, 1).matrix()) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut r = random_state(3, 2, &mut rng);
        let dep = KrausChannel::depolarizing(1.0).unwrap();
        for q in 0..3 {
            r.checked_channel(&dep, &[q]).unwrap();
        }
        assert!(max_abs_diff(r.matrix(), DensityState::maximally_mixed(3).matrix()) < 1e-14);
        assert!(s.checked_channel(&dep, &[2]).is_err());
        assert!(s.checked_unitary(&gates::cnot(), &[0, 0]).is_err());
    }

    #[test]
    fn unitary_embedding_matches_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_state(3, 3, &mut rng);
        let u = crate::ensembles::haar_unitary(4, &mut rng);
        let mut s = r.clone();
        s.checked_unitary(&u, &[0, 1]).unwrap();
        let full = kron(&u, &crate::linalg::identity(2));
        let dense = &full * r.matrix() * full.adjoint();
        assert!(max_abs_diff(s.matrix(), &dense) < 1e-12);
        // reversed site order swaps the roles of the qubits
        let mut t = r.clone();
        t.checked_unitary(&u, &[2, 1]).unwrap();
        let swap = {
            let mut m = CMat::zeros(8, 8);
            for i in 0..8usize {
                let j = ((i & 1) << 2) | (i & 2) | (i >> 2);
                m[(j, i)] = ONE;
            }
            m
        };
        let full2 = &swap * &full * &swap;
        assert!(max_abs_diff(t.matrix(), &(&full2 * r.matrix() * full2.adjoint())) < 1e-12);
    }

    #[test]
    fn fast_paths_agree_with_generic_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_state(3, 8, &mut rng);
        let mut a = r.clone();
        let mut b = r.clone();
        a.depolarize(1, 0.3);
        b.checked_channel(&KrausChannel::depolarizing(0.3).unwrap(), &[1]).unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-14);
        for s in ["XYZ", "-ZIZ", "IYI", "ZZI"] {
            let p = PauliString::parse(s).unwrap();
            let mut a = r.clone();
            a.pauli_rotation(&p, 0.37);
            let u = crate::linalg::expm_hermitian(&p.matrix(), 0.37);
            let dense = &u * r.matrix() * u.adjoint();
            assert!(max_abs_diff(a.matrix(), &dense) < 1e-12, "{s}");
        }
    }

    #[test]
    fn expectation_and_purity() {
        let z0 = ObservableDecomposition::single(PauliString::single(1, 0, Pauli::Z).unwrap());
        assert!((DensityState::zero(1).expectation(&z0) - 1.0).abs() < 1e-15);
        assert!(DensityState::maximally_mixed(1).expectation(&z0).abs() < 1e-15);
        let mm = DensityState::maximally_mixed(3);
        assert!((mm.purity() - 0.125).abs() < 1e-14);
        assert!((mm.entropy() - 3.0).abs() < 1e-12);
        let pure = DensityState::basis(2, 2);
        assert!((pure.purity() - 1.0).abs() < 1e-14 && pure.entropy().abs() < 1e-12);
    }

    #[test]
    fn purity_agrees_with_coherence_formula() {
        // Two independent routes: Tr(ρ²) and (1 + ‖v‖²)/2^n.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for i in 0..100 {
            let n = 1 + i % 3;
            let r = random_state(n, 1 + i % 4, &mut rng);
            assert!((r.purity() - r.to_coherence().purity()).abs() < 1e-10);
        }
    }

    #[test]
    fn coherence_examples_and_round_trip() {
        assert_eq!(DensityState::zero(1).to_coherence().v, [1.0, 0.0, 0.0, 1.0]);
        assert_eq!(DensityState::maximally_mixed(1).to_coherence().v, [1.0, 0.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = random_state(2, 2, &mut rng);
        let back = DensityState::from_coherence(&r.to_coherence()).unwrap();
        assert!(max_abs_diff(back.matrix(), r.matrix()) < 1e-10);
        let bad = CoherenceVector::from_traceless(1, &[0.0, 0.0, 3.0]);
        assert!(DensityState::from_coherence(&bad).is_err());
    }

    #[test]
    fn expectation_matches_coherence_dot() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = random_state(3, 2, &mut rng);
        let o = ObservableDecomposition::new(alloc::vec![
            (0.7, PauliString::parse("XZI").unwrap()),
            (-1.2, PauliString::parse("IYY").unwrap()),
            (0.3, PauliString::parse("III").unwrap()),
        ])
        .unwrap();
        let dense = (crate::linalg::trace(&(o.matrix() * r.matrix()))).re;
        assert!((r.expectation(&o) - dense).abs() < 1e-12);
        assert!((r.to_coherence().dot(&o) - dense).abs() < 1e-9);
    }

    #[test]
    fn fidelities() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let bell = [c(s, 0.0), ZERO, ZERO, c(s, 0.0)];
        let b = DensityState::from_pure(&bell).unwrap();
        assert!((b.fidelity_pure(&bell) - 1.0).abs() < 1e-14);
        assert!((DensityState::maximally_mixed(2).fidelity_pure(&bell) - 0.25).abs() < 1e-14);
        assert!((b.fidelity(&b) - 1.0).abs() < 1e-10);
        assert!((b.fidelity(&DensityState::maximally_mixed(2)) - 0.25).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_state(1, 2, &mut rng);
        let b = random_state(2, 2, &mut rng);
        let ab = DensityState::from_matrix(kron(a.matrix(), b.matrix())).unwrap();
        assert!(max_abs_diff(ab.partial_trace(&[0]).unwrap().matrix(), a.matrix()) < 1e-12);
        assert!(max_abs_diff(ab.partial_trace(&[1, 2]).unwrap().matrix(), b.matrix()) < 1e-12);
    }

    #[test]
    fn mixture_backend_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut d = DensityState::zero(4);
        let mut m = MixtureState::zero(4);
        let reset = KrausChannel::amplitude_damping(1.0).unwrap();
        let partial = KrausChannel::amplitude_damping(0.4).unwrap();
        for step in 0..6 {
            for (a, b) in [(0, 1), (2, 3), (1, 2)] {
                let u = crate::ensembles::haar_unitary(4, &mut rng);
                d.apply_unitary(&u, &[a, b]);
                m.apply_unitary(&u, &[a, b]);
            }
            let ch = if step % 2 == 0 { &reset } else { &partial };
            for q in [0, 2] {
                d.apply_channel(ch, &[q]);
                m.apply_channel(ch, &[q]);
            }
            d.depolarize(3, 0.1);
            m.depolarize(3, 0.1);
        }
        assert!(max_abs_diff(d.matrix(), m.to_density().matrix()) < 1e-12);
        assert!((m.trace() - 1.0).abs() < 1e-12);
        let p = PauliString::parse("ZXIY").unwrap();
        assert!((d.expectation_pauli(&p) - m.expectation_pauli(&p)).abs() < 1e-12);
    }

    #[test]
    fn commutator_parts_sum_to_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut m = MixtureState::zero(3);
        m.apply_unitary(&crate::ensembles::haar_unitary(8, &mut rng), &[0, 1, 2]);
        m.apply_channel(&KrausChannel::amplitude_damping(0.3).unwrap(), &[1]);
        let d = m.to_density();
        let h = kron(&gates::x(), &gates::y()) * c(0.5, 0.0);
        let full = kron(&crate::linalg::identity(2), &h);
        let expect = (d.matrix() * &full - &full * d.matrix()) * crate::linalg::I;
        for parts in [
            d.commutator_parts(&h, &[1, 2]).into_iter().map(|(w, s)| (w, s.into_matrix())).collect::<Vec<_>>(),
            m.commutator_parts(&h, &[1, 2]).into_iter().map(|(w, s)| (w, s.to_density().into_matrix())).collect(),
        ] {
            let mut sum = CMat::zeros(8, 8);
            for (w, x) in parts {
                sum += x * c(w, 0.0);
            }
            assert!(max_abs_diff(&sum, &expect) < 1e-12);
        }
    }
}
