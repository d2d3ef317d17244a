//! Hypercubic lattices, distances and reset-site placement.
//!
//! Sites are indexed row-major: the last axis varies fastest.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::pauli::ObservableDecomposition;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    shape: Vec<usize>,
    periodic: bool,
    reset_sites: BTreeSet<usize>,
}

impl Lattice {
    /// Open hypercube with `side` sites per axis.
    pub fn hypercube(dim: usize, side: usize) -> Result<Self> {
        Self::with_shape(alloc::vec![side; dim], false)
    }

    pub fn chain(n: usize) -> Result<Self> {
        Self::hypercube(1, n)
    }

    pub fn with_shape(shape: Vec<usize>, periodic: bool) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&s| s == 0) {
            return Err(crate::error::invalid("lattice shape must be nonempty and positive"));
        }
        Ok(Lattice {
            shape,
            periodic,
            reset_sites: BTreeSet::new(),
        })
    }

    pub fn with_reset_sites(mut self, sites: BTreeSet<usize>) -> Result<Self> {
        let n = self.n_sites();
        if let Some(&s) = sites.iter().find(|&&s| s >= n) {
            return Err(Error::SiteOutOfRange { site: s, n });
        }
        self.reset_sites = sites;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Sites per axis for hypercubic lattices (the first axis otherwise).
    pub fn side(&self) -> usize {
        self.shape[0]
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn n_sites(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn reset_sites(&self) -> &BTreeSet<usize> {
        &self.reset_sites
    }

    pub fn coords(&self, site: usize) -> Result<Vec<usize>> {
        let n = self.n_sites();
        if site >= n {
            return Err(Error::SiteOutOfRange { site, n });
        }
        let mut out = alloc::vec![0; self.dim()];
        let mut rest = site;
        for axis in (0..self.dim()).rev() {
            out[axis] = rest % self.shape[axis];
            rest /= self.shape[axis];
        }
        Ok(out)
    }

    pub fn site(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: coords.len(),
            });
        }
        let mut idx = 0;
        for (axis, &x) in coords.iter().enumerate() {
            if x >= self.shape[axis] {
                return Err(Error::SiteOutOfRange {
                    site: x,
                    n: self.shape[axis],
                });
            }
            idx = idx * self.shape[axis] + x;
        }
        Ok(idx)
    }

    pub fn manhattan_distance(&self, a: usize, b: usize) -> Result<usize> {
        let (ca, cb) = (self.coords(a)?, self.coords(b)?);
        Ok(ca
            .iter()
            .zip(&cb)
            .zip(&self.shape)
            .map(|((&x, &y), &side)| {
                let d = x.abs_diff(y);
                if self.periodic {
                    d.min(side - d)
                } else {
                    d
                }
            })
            .sum())
    }

    /// Max pairwise distance between nontrivial sites within one term.
    pub fn diameter(&self, o: &ObservableDecomposition) -> Result<usize> {
        let mut best = 0;
        for (_, p) in o.terms() {
            let s: Vec<usize> = p.support().into_iter().collect();
            for (i, &a) in s.iter().enumerate() {
                for &b in &s[i + 1..] {
                    best = best.max(self.manhattan_distance(a, b)?);
                }
            }
        }
        Ok(best)
    }

    /// Adjacent pairs along `axis` whose lower coordinate has the given parity.
    /// Open boundaries never wrap; periodic ones wrap when the side is even.
    pub fn axis_pairs(&self, axis: usize, parity: usize) -> Vec<(usize, usize)> {
        let side = self.shape[axis];
        let mut out = Vec::new();
        for site in 0..self.n_sites() {
            let c = self.coords(site).expect("site in range");
            if c[axis] % 2 != parity % 2 {
                continue;
            }
            let next = c[axis] + 1;
            let wraps = next == side;
            if wraps && !(self.periodic && side % 2 == 0 && side > 2) {
                continue;
            }
            let mut d = c.clone();
            d[axis] = next % side;
            out.push((site, self.site(&d).expect("neighbour in range")));
        }
        out
    }
}

fn exact_root(x: usize, d: usize) -> Option<usize> {
    let r = libm::round(libm::pow(x as f64, 1.0 / d as f64)) as usize;
    (r.checked_pow(d as u32) == Some(x)).then_some(r)
}

/// Positions of `k` equidistant marks on an axis of length `side`; larger gaps come last.
fn axis_positions(side: usize, k: usize) -> Vec<usize> {
    let base = side / k;
    let extra = side % k;
    let mut out = Vec::with_capacity(k);
    let mut pos = 0;
    for j in 0..k {
        out.push(pos);
        pos += if j < k - extra { base } else { base + 1 };
    }
    out
}

/// Equidistant placement of `n_r` reset sites on an open `d`-dimensional hypercube of `n` sites.
pub fn place_reset_sites(n: usize, n_r: usize, d: usize) -> Result<Lattice> {
    if d == 0 || n_r == 0 || n_r > n {
        return Err(Error::InfeasibleSpacing(format!(
            "need d >= 1 and 1 <= n_r <= n, got d={d}, n={n}, n_r={n_r}"
        )));
    }
    let side = exact_root(n, d)
        .ok_or_else(|| Error::InfeasibleSpacing(format!("n={n} is not a perfect power of d={d}")))?;
    let k = exact_root(n_r, d).ok_or_else(|| {
        Error::InfeasibleSpacing(format!("n_r={n_r} does not split evenly over {d} axes"))
    })?;
    let lat = Lattice::hypercube(d, side)?;
    let pos = axis_positions(side, k);
    let mut sites = BTreeSet::new();
    let mut idx = alloc::vec![0usize; d];
    loop {
        let coords: Vec<usize> = idx.iter().map(|&i| pos[i]).collect();
        sites.insert(lat.site(&coords)?);
        let mut axis = d;
        loop {
            if axis == 0 {
                return lat.with_reset_sites(sites);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < k {
                break;
            }
            idx[axis] = 0;
        }
    }
}
