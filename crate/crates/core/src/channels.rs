//! Quantum channels as Kraus sets with cached transfer matrices.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, identity, kron, max_abs_diff, trace, CMat, RMat, C64, ONE, ZERO};
use crate::pauli::PauliString;

pub const CPTP_TOL: f64 = 1e-10;

/// Kraus representation with its Pauli transfer matrix and superoperator.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    n: usize,
    kraus: Vec<CMat>,
    ptm: RMat,
    superop: CMat,
    trace_preserving: bool,
}

fn pauli_basis(n: usize) -> Vec<CMat> {
    (0..1usize << (2 * n))
        .map(|i| PauliString::from_basis_index(n, i).matrix())
        .collect()
}

impl KrausChannel {
    /// Validates dimensions and trace preservation.
    pub fn new(n: usize, kraus: Vec<CMat>) -> Result<Self> {
        let ch = Self::build(n, kraus)?;
        if !ch.trace_preserving {
            return Err(Error::NotCptp(format!(
                "Σ K†K deviates from the identity by {:.3e}",
                ch.tp_defect()
            )));
        }
        Ok(ch)
    }

    fn build(n: usize, kraus: Vec<CMat>) -> Result<Self> {
        let dim = 1usize << n;
        if kraus.is_empty() {
            return Err(invalid("empty Kraus set"));
        }
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    actual: k.nrows().max(k.ncols()),
                });
            }
        }
        let mut superop = CMat::zeros(dim * dim, dim * dim);
        for k in &kraus {
            superop += kron(k, &k.map(|x| x.conj()));
        }
        let mut ch = KrausChannel {
            n,
            kraus,
            ptm: RMat::zeros(0, 0),
            superop,
            trace_preserving: false,
        };
        ch.trace_preserving = ch.tp_defect() <= CPTP_TOL;
        let basis = pauli_basis(n);
        let images: Vec<CMat> = basis.iter().map(|p| ch.apply(p)).collect();
        ch.ptm = RMat::from_fn(basis.len(), basis.len(), |i, j| {
            (trace(&(&basis[i] * &images[j])).re) / dim as f64
        });
        Ok(ch)
    }

    fn tp_defect(&self) -> f64 {
        let dim = 1usize << self.n;
        let mut s = CMat::zeros(dim, dim);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        max_abs_diff(&s, &identity(dim))
    }

    pub fn identity(n: usize) -> Self {
        Self::unitary(identity(1usize << n)).expect("identity is unitary")
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        if !u.is_square() || !u.nrows().is_power_of_two() {
            return Err(invalid("unitary must be square with power-of-two dimension"));
        }
        let n = u.nrows().trailing_zeros() as usize;
        if !crate::linalg::is_unitary(&u, CPTP_TOL) {
            return Err(Error::NotCptp("matrix is not unitary".into()));
        }
        Self::new(n, alloc::vec![u])
    }

    /// ρ ↦ (1−p)ρ + p·I/2.
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_probability("depolarizing rate", p)?;
        let a = libm::sqrt(1.0 - 0.75 * p);
        let b = libm::sqrt(p / 4.0);
        Self::new(
            1,
            alloc::vec![
                identity(2) * c(a, 0.0),
                crate::linalg::gates::x() * c(b, 0.0),
                crate::linalg::gates::y() * c(b, 0.0),
                crate::linalg::gates::z() * c(b, 0.0),
            ],
        )
    }

    /// Relaxation towards |0⟩ with strength q; q = 1 is a perfect reset.
    pub fn amplitude_damping(q: f64) -> Result<Self> {
        check_probability("damping strength", q)?;
        let k1 = crate::linalg::cmat(2, &[ZERO, c(libm::sqrt(q), 0.0), ZERO, ZERO]);
        let k2 = crate::linalg::cmat(2, &[ONE, ZERO, ZERO, c(libm::sqrt(1.0 - q), 0.0)]);
        Self::new(1, alloc::vec![k1, k2])
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// Kraus-rank-weighted superoperator Σ K ⊗ K̄ acting on row-major vec(ρ).
    pub fn superop(&self) -> &CMat {
        &self.superop
    }

    /// Cached transfer matrix in the orthonormal Pauli basis.
    pub fn ptm(&self) -> &RMat {
        &self.ptm
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Σ K m K†.
    pub fn apply(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(m.nrows(), m.ncols());
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    /// Kraus set {K†}; trace preserving only when the channel is unital.
    pub fn adjoint(&self) -> KrausChannel {
        Self::build(self.n, self.kraus.iter().map(|k| k.adjoint()).collect())
            .expect("adjoint of a valid Kraus set is well formed")
    }

    /// Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|).
    pub fn choi(&self) -> CMat {
        let dim = 1usize << self.n;
        let mut j = CMat::zeros(dim * dim, dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let mut e = CMat::zeros(dim, dim);
                e[(a, b)] = ONE;
                let img = self.apply(&e);
                for r in 0..dim {
                    for col in 0..dim {
                        j[(a * dim + r, b * dim + col)] = img[(r, col)];
                    }
                }
            }
        }
        j
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        let (vals, _) = crate::linalg::eigh(&self.choi());
        vals.first().is_none_or(|&v| v >= -tol)
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        let dim = 1usize << self.n;
        max_abs_diff(&self.apply(&identity(dim)), &identity(dim)) <= tol
    }

    pub fn normal_form(&self) -> Result<NormalForm> {
        if self.n != 1 {
            return Err(Error::Unsupported(format!(
                "normal form needs a single-qubit channel, got {} qubits",
                self.n
            )));
        }
        NormalForm::from_ptm(&self.ptm)
    }

    /// Signed contraction factors and D_max = max |D_Q|.
    pub fn contraction_profile(&self) -> Result<([f64; 3], f64)> {
        let nf = self.normal_form()?;
        let dmax = nf.d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Ok((nf.d, dmax))
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(invalid(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Transfer matrix of a valid channel.
pub fn ptm_from_kraus(ch: &KrausChannel) -> Result<RMat> {
    if !ch.is_trace_preserving() {
        return Err(Error::NotCptp("channel is not trace preserving".into()));
    }
    Ok(ch.ptm().clone())
}

/// a ∘ b: apply b first.
pub fn compose(a: &KrausChannel, b: &KrausChannel) -> Result<KrausChannel> {
    if a.n != b.n {
        return Err(Error::Dimension {
            expected: a.n,
            actual: b.n,
        });
    }
    let mut ks = Vec::with_capacity(a.kraus.len() * b.kraus.len());
    for ka in &a.kraus {
        for kb in &b.kraus {
            ks.push(ka * kb);
        }
    }
    KrausChannel::new(a.n, ks)
}

/// a ⊗ b with a on the more significant qubits.
pub fn tensor(a: &KrausChannel, b: &KrausChannel) -> Result<KrausChannel> {
    let mut ks = Vec::with_capacity(a.kraus.len() * b.kraus.len());
    for ka in &a.kraus {
        for kb in &b.kraus {
            ks.push(kron(ka, kb));
        }
    }
    KrausChannel::new(a.n + b.n, ks)
}

/// Single-qubit channel written as ρ ↦ U Ñ(V ρ V†) U† with Ñ diagonal plus shift.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub c: [f64; 3],
    pub d: [f64; 3],
    pub u: CMat,
    pub v: CMat,
}

impl NormalForm {
    fn from_ptm(m: &RMat) -> Result<Self> {
        let t = Matrix3::from_fn(|i, j| m[(i + 1, j + 1)]);
        let cvec = Vector3::new(m[(1, 0)], m[(2, 0)], m[(3, 0)]);
        let off: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| t[(i, j)].abs())
            .fold(0.0, f64::max);
        let (o1, sigma, o2) = if off < 1e-14 {
            (Matrix3::identity(), Vector3::new(t[(0, 0)], t[(1, 1)], t[(2, 2)]), Matrix3::identity())
        } else {
            let svd = t.svd(true, true);
            let mut o1 = svd.u.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
            let mut o2 = svd
                .v_t
                .ok_or_else(|| Error::Numerical("SVD failed".into()))?
                .transpose();
            let mut s = svd.singular_values;
            if o1.determinant() < 0.0 {
                o1.column_mut(2).neg_mut();
                s[2] = -s[2];
            }
            if o2.determinant() < 0.0 {
                o2.column_mut(2).neg_mut();
                s[2] = -s[2];
            }
            (o1, s, o2)
        };
        let ct = o1.transpose() * cvec;
        Ok(NormalForm {
            c: [ct[0], ct[1], ct[2]],
            d: [sigma[0], sigma[1], sigma[2]],
            u: rotation_to_unitary(&o1),
            v: rotation_to_unitary(&o2.transpose()),
        })
    }

    /// Transfer matrix of U Ñ(V · V†) U†.
    pub fn reconstruct_ptm(&self) -> RMat {
        let ru = KrausChannel::unitary(self.u.clone()).expect("unitary").ptm;
        let rv = KrausChannel::unitary(self.v.clone()).expect("unitary").ptm;
        let mut core = RMat::zeros(4, 4);
        core[(0, 0)] = 1.0;
        for i in 0..3 {
            core[(i + 1, 0)] = self.c[i];
            core[(i + 1, i + 1)] = self.d[i];
        }
        ru * core * rv
    }
}

/// SU(2) element whose adjoint action on Bloch vectors is the rotation `r`.
pub fn rotation_to_unitary(r: &Matrix3<f64>) -> CMat {
    let tr = r.trace();
    let (w, x, y, z);
    if tr > 0.0 {
        let s = 0.5 / libm::sqrt(tr + 1.0);
        w = 0.25 / s;
        x = (r[(2, 1)] - r[(1, 2)]) * s;
        y = (r[(0, 2)] - r[(2, 0)]) * s;
        z = (r[(1, 0)] - r[(0, 1)]) * s;
    } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
        let s = 2.0 * libm::sqrt(1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]);
        w = (r[(2, 1)] - r[(1, 2)]) / s;
        x = 0.25 * s;
        y = (r[(0, 1)] + r[(1, 0)]) / s;
        z = (r[(0, 2)] + r[(2, 0)]) / s;
    } else if r[(1, 1)] > r[(2, 2)] {
        let s = 2.0 * libm::sqrt(1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]);
        w = (r[(0, 2)] - r[(2, 0)]) / s;
        x = (r[(0, 1)] + r[(1, 0)]) / s;
        y = 0.25 * s;
        z = (r[(1, 2)] + r[(2, 1)]) / s;
    } else {
        let s = 2.0 * libm::sqrt(1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]);
        w = (r[(1, 0)] - r[(0, 1)]) / s;
        x = (r[(0, 2)] + r[(2, 0)]) / s;
        y = (r[(1, 2)] + r[(2, 1)]) / s;
        z = 0.25 * s;
    }
    let norm = libm::sqrt(w * w + x * x + y * y + z * z);
    let (w, x, y, z) = (w / norm, x / norm, y / norm, z / norm);
    crate::linalg::cmat(2, &[c(w, -z), c(-y, -x), c(y, -x), c(w, z)])
}

/// Random channel from a Haar-like isometry with the given Kraus rank.
pub fn random_channel<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> KrausChannel {
    let dim = 1usize << n;
    let g = crate::ensembles::ginibre(rank * dim, dim, rng);
    let q = g.qr().q();
    let kraus = (0..rank)
        .map(|i| q.view((i * dim, 0), (dim, dim)).into_owned())
        .collect();
    KrausChannel::new(n, kraus).expect("isometry blocks are trace preserving")
}

/// Random mixture of `terms` Haar unitaries on one qubit (always unital).
pub fn random_unital_qubit_channel<R: Rng + ?Sized>(terms: usize, rng: &mut R) -> KrausChannel {
    let w: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    let kraus = w
        .iter()
        .map(|wi| crate::ensembles::haar_unitary(2, rng) * C64::new(libm::sqrt(wi / total), 0.0))
        .collect();
    KrausChannel::new(1, kraus).expect("unitary mixture is trace preserving")
}
