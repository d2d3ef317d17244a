//! Pauli strings and observables.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, gates, kron_all, CMat, C64};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Index in the (I, X, Y, Z) ordering used by transfer matrices.
    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i & 3]
    }

    pub fn from_char(ch: char) -> Option<Pauli> {
        match ch {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn matrix(self) -> CMat {
        match self {
            Pauli::I => crate::linalg::identity(2),
            Pauli::X => gates::x(),
            Pauli::Y => gates::y(),
            Pauli::Z => gates::z(),
        }
    }

    /// Single-site product: self * other = i^k * result.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ch = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{ch}")
    }
}

/// A power of the imaginary unit, i^k with k in 0..4.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Phase(pub u8);

impl Phase {
    pub fn value(self) -> C64 {
        match self.0 & 3 {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        }
    }
}

/// Tensor product of single-site Paulis with a real sign.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    negative: bool,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        PauliString {
            letters,
            negative: false,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(alloc::vec![Pauli::I; n])
    }

    /// A single non-identity letter at `site`.
    pub fn single(n: usize, site: usize, p: Pauli) -> Result<Self> {
        if site >= n {
            return Err(Error::SiteOutOfRange { site, n });
        }
        let mut letters = alloc::vec![Pauli::I; n];
        letters[site] = p;
        Ok(Self::new(letters))
    }

    /// Same letter on each listed site.
    pub fn on_sites(n: usize, sites: &[usize], p: Pauli) -> Result<Self> {
        let mut letters = alloc::vec![Pauli::I; n];
        for &s in sites {
            if s >= n {
                return Err(Error::SiteOutOfRange { site: s, n });
            }
            letters[s] = p;
        }
        Ok(Self::new(letters))
    }

    /// Parse strings such as `"XIZ"` or `"-ZZ"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let letters = body
            .chars()
            .map(|ch| Pauli::from_char(ch).ok_or_else(|| invalid(format!("bad Pauli letter {ch:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(invalid("empty Pauli string"));
        }
        Ok(PauliString { letters, negative })
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn negated(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    pub fn unsigned(&self) -> Self {
        PauliString::new(self.letters.clone())
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|p| **p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    fn check_size(&self, other: &PauliString) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                actual: other.n(),
            });
        }
        Ok(())
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_size(other)?;
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| a.anticommutes(**b))
            .count();
        Ok(anti % 2 == 0)
    }

    /// self * other = phase * result, where `result` carries a positive sign.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        self.check_size(other)?;
        let mut k = 0u8;
        if self.negative {
            k += 2;
        }
        if other.negative {
            k += 2;
        }
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| {
                let (ph, p) = a.mul(*b);
                k += ph;
                p
            })
            .collect();
        Ok((Phase(k % 4), PauliString::new(letters)))
    }

    /// [self, other] is either zero or 2 * phase * result.
    pub fn commutator(&self, other: &PauliString) -> Result<Option<(Phase, PauliString)>> {
        if self.commutes(other)? {
            return Ok(None);
        }
        Ok(Some(self.multiply(other)?))
    }

    /// Bit masks in the computational basis: qubit q is bit n-1-q.
    /// Returns (x_mask, z_mask, number of Y letters).
    pub fn masks(&self) -> (usize, usize, usize) {
        let n = self.n();
        let (mut xm, mut zm, mut ny) = (0usize, 0usize, 0usize);
        for (q, p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => xm |= bit,
                Pauli::Z => zm |= bit,
                Pauli::Y => {
                    xm |= bit;
                    zm |= bit;
                    ny += 1;
                }
            }
        }
        (xm, zm, ny)
    }

    /// Position in the Pauli basis, base 4 with qubit 0 most significant.
    pub fn basis_index(&self) -> usize {
        self.letters.iter().fold(0, |acc, p| acc * 4 + p.index())
    }

    pub fn from_basis_index(n: usize, mut idx: usize) -> Self {
        let mut letters = alloc::vec![Pauli::I; n];
        for q in (0..n).rev() {
            letters[q] = Pauli::from_index(idx & 3);
            idx >>= 2;
        }
        PauliString::new(letters)
    }

    pub fn matrix(&self) -> CMat {
        let ms: Vec<CMat> = self.letters.iter().map(|p| p.matrix()).collect();
        kron_all(&ms) * c(self.sign(), 0.0)
    }

    /// Letters restricted to `sites`, in the given order.
    pub fn restrict(&self, sites: &[usize]) -> PauliString {
        PauliString {
            letters: sites.iter().map(|&s| self.letters[s]).collect(),
            negative: self.negative,
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        for p in &self.letters {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Real linear combination of distinct Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableDecomposition {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl ObservableDecomposition {
    /// Signs on the strings are folded into the coefficients.
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let n = terms
            .first()
            .map(|t| t.1.n())
            .ok_or_else(|| invalid("observable needs at least one term"))?;
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(terms.len());
        for (a, p) in terms {
            if p.n() != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: p.n(),
                });
            }
            if !a.is_finite() {
                return Err(invalid("non-finite coefficient"));
            }
            let key = p.unsigned();
            if !seen.insert(key.clone()) {
                return Err(invalid(format!("repeated Pauli string {key}")));
            }
            out.push((a * p.sign(), key));
        }
        Ok(ObservableDecomposition { n, terms: out })
    }

    pub fn single(p: PauliString) -> Self {
        Self::new(alloc::vec![(1.0, p)]).expect("one term is always valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// Σ a_P² over the non-identity terms.
    pub fn nontrivial_weight(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(_, p)| !p.is_identity())
            .map(|(a, _)| a * a)
            .sum()
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.terms.iter().flat_map(|(_, p)| p.support()).collect()
    }

    pub fn matrix(&self) -> CMat {
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        for (a, p) in &self.terms {
            m += p.matrix() * c(*a, 0.0);
        }
        m
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        for (i, (a, p)) in self.terms.iter().enumerate() {
            if i > 0 {
                s.push_str(" + ");
            }
            s.push_str(&format!("{a}*{p}"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        PauliString::parse(s).unwrap()
    }

    #[test]
    fn support_examples() {
        assert!(ps("III").support().is_empty());
        assert_eq!(ps("III").weight(), 0);
        assert_eq!(ps("XIZ").support().into_iter().collect::<Vec<_>>(), [0, 2]);
        assert_eq!(ps("ZZZZ").weight(), 4);
    }

    #[test]
    fn commutation_examples() {
        assert!(!ps("X").commutes(&ps("Z")).unwrap());
        assert!(ps("XX").commutes(&ps("ZZ")).unwrap());
        assert!(ps("X").commutes(&ps("ZZ")).is_err());
    }

    #[test]
    fn product_x_y_is_i_z() {
        let (ph, p) = ps("X").multiply(&ps("Y")).unwrap();
        assert_eq!(ph, Phase(1));
        assert_eq!(p, ps("Z"));
    }

    #[test]
    fn basis_index_round_trip() {
        for idx in 0..64 {
            assert_eq!(PauliString::from_basis_index(3, idx).basis_index(), idx);
        }
        assert_eq!(ps("ZI").basis_index(), 12);
    }

    #[test]
    fn observable_rejects_duplicates() {
        let r = ObservableDecomposition::new(alloc::vec![(1.0, ps("ZI")), (0.5, ps("-ZI"))]);
        assert!(r.is_err());
    }

    fn letter() -> impl Strategy<Value = Pauli> {
        (0usize..4).prop_map(Pauli::from_index)
    }

    proptest! {
        #[test]
        fn commutes_agrees_with_matrices(a in proptest::collection::vec(letter(), 1..=4),
                                         b_seed in proptest::collection::vec(letter(), 4)) {
            let n = a.len();
            let p = PauliString::new(a);
            let q = PauliString::new(b_seed[..n].to_vec());
            let (pm, qm) = (p.matrix(), q.matrix());
            let dense = max_abs_diff(&(&pm * &qm), &(&qm * &pm)) < 1e-12;
            prop_assert_eq!(p.commutes(&q).unwrap(), dense);
        }

        #[test]
        fn product_phase_agrees_with_matrices(a in proptest::collection::vec(letter(), 3),
                                              b in proptest::collection::vec(letter(), 3),
                                              neg in any::<bool>()) {
            let mut p = PauliString::new(a);
            if neg { p = p.negated(); }
            let q = PauliString::new(b);
            let (ph, r) = p.multiply(&q).unwrap();
            let lhs = p.matrix() * q.matrix();
            let rhs = r.matrix() * ph.value();
            prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        }

        #[test]
        fn empty_support_iff_identity(a in proptest::collection::vec(letter(), 1..6)) {
            let p = PauliString::new(a);
            prop_assert_eq!(p.support().is_empty(), p.letters().iter().all(|l| *l == Pauli::I));
        }
    }
}
