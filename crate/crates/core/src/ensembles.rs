//! Random unitaries and exact design checks.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::sync::Arc;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::{c, gates, identity, kron, strip_global_phase, trace, CMat, C64};
use crate::pauli::PauliString;

pub const CLIFFORD1_ORDER: usize = 24;
pub const CLIFFORD2_ORDER: usize = 11520;

/// Matrix with iid standard complex Gaussian entries (unit variance).
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Haar-random unitary via QR of a Ginibre matrix with diagonal phase fix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|x| *x *= ph);
    }
    q
}

fn key(m: &CMat) -> Vec<i64> {
    m.iter()
        .flat_map(|x| [libm::round(x.re * 1e6) as i64, libm::round(x.im * 1e6) as i64])
        .collect()
}

/// Closure of the generated group modulo global phase, breadth first.
pub fn group_closure(generators: &[CMat]) -> Vec<CMat> {
    let dim = generators[0].nrows();
    let start = identity(dim);
    let mut seen = BTreeMap::new();
    seen.insert(key(&start), ());
    let mut out = alloc::vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(g) = queue.pop_front() {
        for h in generators {
            let next = strip_global_phase(&(h * &g), 1e-9);
            let k = key(&next);
            if seen.insert(k, ()).is_none() {
                out.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    out
}

/// The 24 single-qubit Cliffords modulo phase, generated by H and S.
pub fn clifford1_enumerate() -> Vec<CMat> {
    group_closure(&[gates::h(), gates::s()])
}

/// Two-qubit Clifford group modulo phase, enumerated once and shared.
#[derive(Clone, Debug)]
pub struct Clifford2Table {
    elements: Arc<Vec<CMat>>,
}

impl Clifford2Table {
    pub fn generate() -> Self {
        let i2 = identity(2);
        let gens = [
            kron(&gates::h(), &i2),
            kron(&i2, &gates::h()),
            kron(&gates::s(), &i2),
            kron(&i2, &gates::s()),
            gates::cnot(),
        ];
        Clifford2Table {
            elements: Arc::new(group_closure(&gens)),
        }
    }

    /// Rebuild from stored elements, checking size and unitarity.
    pub fn from_elements(elements: Vec<CMat>) -> Result<Self> {
        if elements.len() != CLIFFORD2_ORDER {
            return Err(invalid(alloc::format!(
                "expected {CLIFFORD2_ORDER} two-qubit Cliffords, got {}",
                elements.len()
            )));
        }
        if elements
            .iter()
            .any(|u| u.nrows() != 4 || !crate::linalg::is_unitary(u, 1e-9))
        {
            return Err(invalid("stored Clifford element is not a 4x4 unitary"));
        }
        Ok(Clifford2Table {
            elements: Arc::new(elements),
        })
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        self.elements[rng.random_range(0..self.elements.len())].clone()
    }
}

pub fn clifford2_sample<R: Rng + ?Sized>(table: &Clifford2Table, rng: &mut R) -> CMat {
    table.sample(rng)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EnsembleKind {
    Haar1,
    Haar2,
    Clifford1,
    Clifford2,
    Fixed,
}

/// Distribution of the random gates in a circuit family.
#[derive(Clone, Debug)]
pub enum GateEnsemble {
    Haar,
    Clifford { one: Arc<Vec<CMat>>, two: Clifford2Table },
    Fixed { one: CMat, two: CMat },
}

impl GateEnsemble {
    pub fn clifford(two: Clifford2Table) -> Self {
        GateEnsemble::Clifford {
            one: Arc::new(clifford1_enumerate()),
            two,
        }
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        match self {
            GateEnsemble::Haar => haar_unitary(2, rng),
            GateEnsemble::Clifford { one, .. } => one[rng.random_range(0..one.len())].clone(),
            GateEnsemble::Fixed { one, .. } => one.clone(),
        }
    }

    pub fn sample_two<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        match self {
            GateEnsemble::Haar => haar_unitary(4, rng),
            GateEnsemble::Clifford { two, .. } => two.sample(rng),
            GateEnsemble::Fixed { two, .. } => two.clone(),
        }
    }
}

fn max_entry(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Exact ‖E[U O U†] − Tr(O)/d·I‖ (largest entry) over a finite ensemble.
pub fn first_moment_exact(elements: &[CMat], o: &CMat) -> f64 {
    let d = o.nrows();
    let mut acc = CMat::zeros(d, d);
    for u in elements {
        acc += u * o * u.adjoint();
    }
    acc /= c(elements.len() as f64, 0.0);
    let target = identity(d) * (trace(o) / c(d as f64, 0.0));
    max_entry(&(acc - target))
}

/// Monte-Carlo deviation of the first moment with its entrywise standard error.
#[derive(Copy, Clone, Debug)]
pub struct MomentCheck {
    pub deviation: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MomentCheck {
    /// Every entry lies within `z` standard errors of its target.
    pub fn within(&self, z: f64) -> bool {
        self.deviation <= z * self.stderr
    }
}

pub fn first_moment_sampled<R: Rng + ?Sized>(
    sampler: impl Fn(&mut R) -> CMat,
    o: &CMat,
    samples: usize,
    rng: &mut R,
) -> MomentCheck {
    let d = o.nrows();
    let target = identity(d) * (trace(o) / c(d as f64, 0.0));
    let mut sum = CMat::zeros(d, d);
    let mut sum_sq = nalgebra::DMatrix::<f64>::zeros(d, d);
    for _ in 0..samples {
        let u = sampler(rng);
        let x = &u * o * u.adjoint() - &target;
        sum += &x;
        sum_sq += x.map(|e| e.norm_sqr());
    }
    let n = samples as f64;
    let (mut worst, mut worst_se) = (0.0, 0.0f64);
    for i in 0..d * d {
        let mean = sum[i] / n;
        let var = (sum_sq[i] / n - mean.norm_sqr()).max(0.0) * n / (n - 1.0);
        let se = libm::sqrt(var / n);
        // compare each entry against its own error bar
        if mean.norm() / se.max(1e-300) > worst / worst_se.max(1e-300) {
            worst = mean.norm();
            worst_se = se;
        }
    }
    MomentCheck {
        deviation: worst,
        stderr: worst_se,
        samples,
    }
}

/// Pauli-basis coefficients of a two-copy operator, normalized by d².
fn two_copy_coefficients(x: &CMat, n: usize) -> Vec<f64> {
    let d2 = (1usize << (2 * n)) as f64;
    let count = 1usize << (2 * n);
    let mut out = Vec::with_capacity(count * count);
    for a in 0..count {
        let pa = PauliString::from_basis_index(n, a).matrix();
        for b in 0..count {
            let pb = PauliString::from_basis_index(n, b).matrix();
            out.push(trace(&(kron(&pa, &pb) * x)).re / d2);
        }
    }
    out
}

/// Largest coefficient error of E[U⊗U (P1⊗P2) U†⊗U†] against the mixing identity.
pub fn pauli_mixing_exact(elements: &[CMat], p1: &PauliString, p2: &PauliString) -> Result<f64> {
    let n = p1.n();
    if p2.n() != n || elements.first().map(|u| u.nrows()) != Some(1usize << n) {
        return Err(invalid("Pauli sizes must match the ensemble dimension"));
    }
    let d = (1usize << n) as f64;
    let x = kron(&p1.unsigned().matrix(), &p2.unsigned().matrix());
    let dd = 1usize << (2 * n);
    let mut acc = CMat::zeros(dd, dd);
    for u in elements {
        let uu = kron(u, u);
        acc += &uu * &x * uu.adjoint();
    }
    acc /= c(elements.len() as f64, 0.0);
    let got = two_copy_coefficients(&acc, n);
    let count = 1usize << (2 * n);
    let same = p1.unsigned() == p2.unsigned();
    let expected: Vec<f64> = (0..count * count)
        .map(|i| {
            let (a, b) = (i / count, i % count);
            if !same {
                0.0
            } else if p1.is_identity() {
                if a == 0 && b == 0 { 1.0 } else { 0.0 }
            } else if a == b && a != 0 {
                1.0 / (d * d - 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(got
        .iter()
        .zip(&expected)
        .map(|(g, e)| (g - e).abs())
        .fold(0.0, f64::max))
}

/// Both sides of E[Tr(P U B U†)²] = 3^−|P| Σ_{supp Q = supp P} Tr(QB)²
/// with U a product of independent single-qubit Cliffords.
pub fn single_layer_second_moment(p: &PauliString, b: &CMat) -> Result<(f64, f64)> {
    let n = p.n();
    if b.nrows() != 1usize << n || n > 4 {
        return Err(invalid("operator size must match P and n <= 4"));
    }
    let cl = clifford1_enumerate();
    let pm = p.matrix();
    let total = CLIFFORD1_ORDER.pow(n as u32);
    let mut acc = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        let mut factors = Vec::with_capacity(n);
        for _ in 0..n {
            factors.push(cl[rest % CLIFFORD1_ORDER].clone());
            rest /= CLIFFORD1_ORDER;
        }
        let u = crate::linalg::kron_all(&factors);
        let t = trace(&(&pm * &u * b * u.adjoint()));
        acc += (t * t).re;
    }
    let lhs = acc / total as f64;
    let supp = p.support();
    let mut rhs = 0.0;
    for q in 0..1usize << (2 * n) {
        let qs = PauliString::from_basis_index(n, q);
        if qs.support() == supp {
            let t = trace(&(qs.matrix() * b));
            rhs += (t * t).re;
        }
    }
    rhs /= libm::pow(3.0, supp.len() as f64);
    Ok((lhs, rhs))
}

/// Conjugation maps every Pauli string to ± a Pauli string.
pub fn is_pauli_normalizer(u: &CMat, tol: f64) -> bool {
    let n = u.nrows().trailing_zeros() as usize;
    (1..1usize << (2 * n)).all(|i| {
        let p = PauliString::from_basis_index(n, i).matrix();
        let img = u * p * u.adjoint();
        (1..1usize << (2 * n)).any(|j| {
            let q = PauliString::from_basis_index(n, j).matrix();
            let overlap = trace(&(&q * &img)) / C64::new((1usize << n) as f64, 0.0);
            (overlap.norm() - 1.0).abs() < tol
        })
    })
}
