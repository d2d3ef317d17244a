//! In-place index-permutation kernels on flat complex arrays.
//!
//! A flat array of length 2^nbits is treated as a vector over bit strings.
//! A local operator of dimension 2^k acts on the bits listed in `positions`,
//! with `positions[0]` the most significant local bit.

use alloc::vec::Vec;

use crate::linalg::{CMat, C64, ZERO};

#[inline]
fn deposit(mut base: usize, sorted: &[usize]) -> usize {
    for &p in sorted {
        let low = base & ((1usize << p) - 1);
        base = ((base >> p) << (p + 1)) | low;
    }
    base
}

/// Apply a dense 2^k x 2^k operator to the given bit positions of every
/// consecutive chunk of length 2^nbits.
pub fn apply_local(data: &mut [C64], nbits: usize, op: &CMat, positions: &[usize]) {
    let k = positions.len();
    let dim = 1usize << k;
    debug_assert_eq!(op.nrows(), dim);
    debug_assert_eq!(data.len() % (1usize << nbits), 0);
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();
    let offsets: Vec<usize> = (0..dim)
        .map(|l| {
            (0..k)
                .map(|j| ((l >> (k - 1 - j)) & 1) << positions[j])
                .sum()
        })
        .collect();
    // row-major copy of the operator
    let m: Vec<C64> = (0..dim * dim).map(|i| op[(i / dim, i % dim)]).collect();
    let blocks = 1usize << (nbits - k);
    for data in data.chunks_mut(1usize << nbits) {
        apply_chunk(data, k, blocks, &sorted, &offsets, &m);
    }
}

fn apply_chunk(data: &mut [C64], k: usize, blocks: usize, sorted: &[usize], offsets: &[usize], m: &[C64]) {
    let dim = 1usize << k;
    match k {
        1 => {
            let (o1, m00, m01, m10, m11) = (offsets[1], m[0], m[1], m[2], m[3]);
            for b in 0..blocks {
                let i0 = deposit(b, sorted);
                let (a0, a1) = (data[i0], data[i0 + o1]);
                data[i0] = m00 * a0 + m01 * a1;
                data[i0 + o1] = m10 * a0 + m11 * a1;
            }
        }
        2 => {
            let o = [offsets[0], offsets[1], offsets[2], offsets[3]];
            for b in 0..blocks {
                let i0 = deposit(b, sorted);
                let a = [data[i0], data[i0 + o[1]], data[i0 + o[2]], data[i0 + o[3]]];
                for r in 0..4 {
                    let row = &m[4 * r..4 * r + 4];
                    data[i0 + o[r]] = row[0] * a[0] + row[1] * a[1] + row[2] * a[2] + row[3] * a[3];
                }
            }
        }
        _ => {
            let mut buf = alloc::vec![ZERO; dim];
            for b in 0..blocks {
                let i0 = deposit(b, sorted);
                for (l, &o) in offsets.iter().enumerate() {
                    buf[l] = data[i0 + o];
                }
                for r in 0..dim {
                    let row = &m[dim * r..dim * (r + 1)];
                    let mut acc = ZERO;
                    for (x, y) in row.iter().zip(&buf) {
                        acc += x * y;
                    }
                    data[i0 + offsets[r]] = acc;
                }
            }
        }
    }
}

/// Phase of a Pauli string on a basis state: P|k> = phase(k)|k ^ x>.
#[derive(Clone, Copy, Debug)]
pub struct PauliAction {
    pub x: usize,
    pub z: usize,
    pub base: C64,
}

impl PauliAction {
    pub fn new(x: usize, z: usize, n_y: usize, sign: f64) -> Self {
        let base = crate::pauli::Phase((n_y % 4) as u8).value() * sign;
        PauliAction { x, z, base }
    }

    #[inline]
    pub fn phase(&self, k: usize) -> C64 {
        if (k & self.z).count_ones() % 2 == 1 {
            -self.base
        } else {
            self.base
        }
    }
}

/// Depolarizing channel on one qubit of a column-major density matrix,
/// given its row bit `rb` and column bit `cb`.
pub fn depolarize(data: &mut [C64], nbits: usize, rb: usize, cb: usize, p: f64) {
    let keep = 1.0 - p;
    let (stay, swap) = (1.0 - p / 2.0, p / 2.0);
    let sorted = if rb < cb { [rb, cb] } else { [cb, rb] };
    let (or, oc) = (1usize << rb, 1usize << cb);
    for b in 0..(1usize << (nbits - 2)) {
        let i = deposit(b, &sorted);
        let (a, d) = (data[i], data[i + or + oc]);
        data[i] = a * stay + d * swap;
        data[i + or + oc] = a * swap + d * stay;
        data[i + or] *= keep;
        data[i + oc] *= keep;
    }
}

/// exp(-i t P) applied to every column of a column-major block of vectors of length 2^n.
pub fn pauli_rotation_vectors(data: &mut [C64], n: usize, act: &PauliAction, t: f64) {
    let (s, c) = libm::sincos(t);
    let dim = 1usize << n;
    let mis = crate::linalg::c(0.0, -s);
    if act.x == 0 {
        for col in data.chunks_mut(dim) {
            for (r, v) in col.iter_mut().enumerate() {
                *v *= C64::from_polar(1.0, -t * act.phase(r).re);
            }
        }
        return;
    }
    for col in data.chunks_mut(dim) {
        for r in 0..dim {
            let r2 = r ^ act.x;
            if r2 < r {
                continue;
            }
            let (a, b) = (col[r], col[r2]);
            // (P psi)[r] = phase(r ^ x) psi[r ^ x]
            col[r] = a * c + mis * act.phase(r2) * b;
            col[r2] = b * c + mis * act.phase(r) * a;
        }
    }
}

/// exp(-i t P) rho exp(i t P) on a column-major 2^n x 2^n matrix.
pub fn pauli_rotation_density(data: &mut [C64], n: usize, act: &PauliAction, t: f64) {
    let (s, c) = libm::sincos(t);
    let dim = 1usize << n;
    let x = act.x;
    if x == 0 {
        // diagonal generator: multiply entry (r, col) by e^{-it(phi_r - phi_col)}
        for col in 0..dim {
            let pc = act.phase(col).re;
            for r in 0..dim {
                let pr = act.phase(r).re;
                let ang = -t * (pr - pc);
                data[col * dim + r] *= C64::from_polar(1.0, ang);
            }
        }
        return;
    }
    let src = data.to_vec();
    let (cc, ss, cs) = (c * c, s * s, c * s);
    let ic = crate::linalg::c(0.0, cs);
    for col in 0..dim {
        let colx = col ^ x;
        let pcol = act.phase(col);
        for r in 0..dim {
            let rx = r ^ x;
            let prx = act.phase(rx);
            let rho = src[col * dim + r];
            let p_rho = prx * src[col * dim + rx];
            let rho_p = src[colx * dim + r] * pcol;
            let p_rho_p = prx * pcol * src[colx * dim + rx];
            data[col * dim + r] = rho * cc + p_rho_p * ss + ic * (rho_p - p_rho);
        }
    }
}

/// Tr(P rho) for a column-major density matrix.
pub fn pauli_expectation_density(data: &[C64], n: usize, act: &PauliAction) -> C64 {
    let dim = 1usize << n;
    let mut acc = ZERO;
    for k in 0..dim {
        acc += act.phase(k) * data[(k ^ act.x) * dim + k];
    }
    acc
}

/// Σ_cols <w|P|w> for a column-major block of vectors.
pub fn pauli_expectation_vectors(data: &[C64], n: usize, act: &PauliAction) -> C64 {
    let dim = 1usize << n;
    let mut acc = ZERO;
    for col in data.chunks(dim) {
        for r in 0..dim {
            let rx = r ^ act.x;
            acc += col[r].conj() * act.phase(rx) * col[rx];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, gates, kron, max_abs_diff};

    #[test]
    fn local_gate_matches_kronecker_embedding() {
        // 3-qubit vector, gate on qubits (2, 0): bit positions 0 and 2
        let v: Vec<C64> = (0..8).map(|i| c(i as f64 + 1.0, 0.5 * i as f64)).collect();
        let g = kron(&gates::h(), &gates::ry(0.3)) * gates::cnot();
        let mut out = v.clone();
        apply_local(&mut out, 3, &g, &[0, 2]);
        // dense: reorder qubits (2,1,0)->... build full operator by permutation
        let mut full = CMat::zeros(8, 8);
        for col in 0..8usize {
            for row in 0..8usize {
                let (b2c, b0c) = ((col >> 0) & 1, (col >> 2) & 1);
                let (b2r, b0r) = ((row >> 0) & 1, (row >> 2) & 1);
                if (col >> 1) & 1 != (row >> 1) & 1 {
                    continue;
                }
                full[(row, col)] = g[(b2r * 2 + b0r, b2c * 2 + b0c)];
            }
        }
        let dense = &full * CMat::from_column_slice(8, 1, &v);
        let got = CMat::from_column_slice(8, 1, &out);
        assert!(max_abs_diff(&dense, &got) < 1e-12);
    }
}
