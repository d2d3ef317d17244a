//! Small dense helpers on complex matrices.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Build a square complex matrix from row-major entries.
pub fn cmat(dim: usize, rows: &[C64]) -> CMat {
    assert_eq!(rows.len(), dim * dim);
    CMat::from_row_slice(dim, dim, rows)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Kronecker product, first factor most significant.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMat]) -> CMat {
    let mut out = identity(1);
    for m in ms {
        out = kron(&out, m);
    }
    out
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().copied().sum()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &identity(u.nrows())) <= tol
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// exp(-i t H) for Hermitian H via its eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        h.nrows(),
        eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -t * l)),
    ));
    v * phases * v.adjoint()
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..m.nrows()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Spectral norm via singular values.
pub fn spectral_norm(m: &CMat) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Multiply by a global phase so the first entry with modulus above `tol`
/// in row-major order is real and positive.
pub fn strip_global_phase(m: &CMat, tol: f64) -> CMat {
    let mut out = m.clone();
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            let x = m[(r, col)];
            if x.norm() > tol {
                let ph = x.conj() / x.norm();
                out.iter_mut().for_each(|e| *e *= ph);
                return out;
            }
        }
    }
    out
}

/// Sum with pairwise reduction; fixed association order for a given length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2..=8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub mod gates {
    //! Standard gate matrices.
    use super::*;

    pub fn x() -> CMat {
        cmat(2, &[ZERO, ONE, ONE, ZERO])
    }
    pub fn y() -> CMat {
        cmat(2, &[ZERO, -I, I, ZERO])
    }
    pub fn z() -> CMat {
        cmat(2, &[ONE, ZERO, ZERO, -ONE])
    }
    pub fn h() -> CMat {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        cmat(2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
    }
    pub fn s() -> CMat {
        cmat(2, &[ONE, ZERO, ZERO, I])
    }
    pub fn cnot() -> CMat {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 1)] = ONE;
        m[(2, 3)] = ONE;
        m[(3, 2)] = ONE;
        m
    }
    /// exp(-i theta/2 X)
    pub fn rx(theta: f64) -> CMat {
        let (s, co) = libm::sincos(theta / 2.0);
        cmat(2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
    }
    /// exp(-i theta/2 Y)
    pub fn ry(theta: f64) -> CMat {
        let (s, co) = libm::sincos(theta / 2.0);
        cmat(2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
    }
    /// exp(-i theta/2 Z)
    pub fn rz(theta: f64) -> CMat {
        cmat(
            2,
            &[
                C64::from_polar(1.0, -theta / 2.0),
                ZERO,
                ZERO,
                C64::from_polar(1.0, theta / 2.0),
            ],
        )
    }
    /// exp(-i theta/2 Z⊗Z)
    pub fn rzz(theta: f64) -> CMat {
        let a = C64::from_polar(1.0, -theta / 2.0);
        let b = C64::from_polar(1.0, theta / 2.0);
        CMat::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![a, b, b, a]))
    }
    /// Control on the first qubit, target on the second.
    pub fn controlled(u: &CMat) -> CMat {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 1)] = ONE;
        for r in 0..2 {
            for col in 0..2 {
                m[(2 + r, 2 + col)] = u[(r, col)];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;

    #[test]
    fn expm_matches_closed_form_rotation() {
        let t = 0.731;
        let u = expm_hermitian(&(x() * c(0.5, 0.0)), t);
        assert!(max_abs_diff(&u, &rx(t)) < 1e-12);
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
    }

    #[test]
    fn phase_stripping_fixes_first_entry() {
        let m = h() * C64::from_polar(1.0, 1.1);
        let p = strip_global_phase(&m, 1e-9);
        assert!(p[(0, 0)].im.abs() < 1e-15 && p[(0, 0)].re > 0.0);
    }
}
