//! Pauli strings and real-coefficient Pauli sums.
//!
//! A [`PauliString`] stores its factors as a pair of bitmasks (bit `q` of
//! `x` set for X or Y on qubit `q`, bit `q` of `z` set for Z or Y), which
//! limits strings to 64 qubits. Computational basis states use the
//! "qubit 0 leftmost" convention: qubit `q` of an `n`-qubit register is bit
//! `n - 1 - q` of the basis index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum register size for dense matrix export.
pub const DENSE_QUBIT_CAP: usize = 16;

/// Magnitude below which coefficients are dropped after algebraic operations.
pub const PRUNE_TOLERANCE: f64 = 1e-12;

pub(crate) const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Bit of the basis index that holds qubit `q`.
#[inline]
pub fn basis_bit(n_qubits: usize, q: usize) -> usize {
    1usize << (n_qubits - 1 - q)
}

/// Tensor product of single-qubit Paulis; absent qubits carry the identity.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: usize, pauli: Pauli) -> Self {
        let mut s = Self::identity();
        s.set(qubit, Some(pauli));
        s
    }

    pub fn from_factors<I: IntoIterator<Item = (usize, Pauli)>>(factors: I) -> Self {
        let mut s = Self::identity();
        for (q, p) in factors {
            s.set(q, Some(p));
        }
        s
    }

    pub fn set(&mut self, qubit: usize, pauli: Option<Pauli>) {
        assert!(qubit < MAX_QUBITS, "qubit {qubit} exceeds the 64-qubit limit");
        let bit = 1u64 << qubit;
        self.x &= !bit;
        self.z &= !bit;
        match pauli {
            Some(Pauli::X) => self.x |= bit,
            Some(Pauli::Y) => {
                self.x |= bit;
                self.z |= bit;
            }
            Some(Pauli::Z) => self.z |= bit,
            None => {}
        }
    }

    pub fn get(&self, qubit: usize) -> Option<Pauli> {
        if qubit >= MAX_QUBITS {
            return None;
        }
        let bit = 1u64 << qubit;
        match (self.x & bit != 0, self.z & bit != 0) {
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
            (false, false) => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Highest qubit carrying a non-identity factor.
    pub fn max_qubit(&self) -> Option<usize> {
        let support = self.x | self.z;
        (support != 0).then(|| 63 - support.leading_zeros() as usize)
    }

    pub fn factors(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        (0..MAX_QUBITS).filter_map(move |q| self.get(q).map(|p| (q, p)))
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Flip and phase masks in basis-index coordinates, plus the number of Y
    /// factors: `P|b> = i^ny (-1)^popcount(b & z) |b ^ x>`.
    pub fn index_masks(&self, n_qubits: usize) -> (usize, usize, u32) {
        let mut xi = 0usize;
        let mut zi = 0usize;
        for q in 0..n_qubits {
            let bit = 1u64 << q;
            if self.x & bit != 0 {
                xi |= basis_bit(n_qubits, q);
            }
            if self.z & bit != 0 {
                zi |= basis_bit(n_qubits, q);
            }
        }
        (xi, zi, self.y_count())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, p) in self.factors() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let c = match p {
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}{q}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = String;

    /// Parses strings like `"X0 Z1 Y2"`; `"I"` or `""` is the identity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = PauliString::identity();
        for tok in s.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let (head, idx) = tok.split_at(1);
            let p = match head {
                "X" => Pauli::X,
                "Y" => Pauli::Y,
                "Z" => Pauli::Z,
                _ => return Err(format!("bad Pauli factor {tok:?}")),
            };
            let q: usize = idx.parse().map_err(|_| format!("bad qubit index in {tok:?}"))?;
            if q >= MAX_QUBITS {
                return Err(format!("qubit {q} exceeds the 64-qubit limit"));
            }
            if out.get(q).is_some() {
                return Err(format!("qubit {q} repeated"));
            }
            out.set(q, Some(p));
        }
        Ok(out)
    }
}

/// One of the four unit phases `{+1, -1, +i, -i}`, stored as a power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power_of_i(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn power_of_i(self) -> u32 {
        self.0 as u32
    }

    pub fn to_complex(self) -> Complex64 {
        i_pow(self.0 as u32)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

#[inline]
pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Operator product `a·b = phase · product`.
pub fn multiply(a: &PauliString, b: &PauliString) -> (Phase, PauliString) {
    let product = PauliString {
        x: a.x ^ b.x,
        z: a.z ^ b.z,
    };
    // a = i^ya X^xa Z^za, b likewise; moving Z^za past X^xb costs (-1)^|za & xb|.
    let sign = 2 * (a.z & b.x).count_ones();
    let k = a.y_count() + b.y_count() + sign + 4 * 64 - product.y_count();
    (Phase::from_power_of_i(k), product)
}

/// Hermitian operator `constant·I + Σ c_s·s` with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    constant: f64,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self::constant_only(n_qubits, 0.0)
    }

    pub fn constant_only(n_qubits: usize, constant: f64) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "register exceeds 64 qubits");
        Self {
            n_qubits,
            constant,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a sum from `(string, coefficient)` pairs, merging repeats and
    /// folding identity strings into the constant.
    pub fn from_terms<I>(n_qubits: usize, constant: f64, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut out = Self::constant_only(n_qubits, constant);
        for (s, c) in terms {
            if let Some(q) = s.max_qubit() {
                if q >= n_qubits {
                    return Err(Error::QubitOutOfRange { index: q, n_qubits });
                }
            }
            out.accumulate(s, c);
        }
        out.prune();
        Ok(out)
    }

    pub(crate) fn accumulate(&mut self, s: PauliString, c: f64) {
        if s.is_identity() {
            self.constant += c;
        } else {
            *self.terms.entry(s).or_insert(0.0) += c;
        }
    }

    /// Drops terms with `|c| <= PRUNE_TOLERANCE`.
    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() > PRUNE_TOLERANCE);
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the operator is the zero operator (within prune tolerance).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.abs() <= PRUNE_TOLERANCE
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.terms.iter().map(|(s, &c)| (s, c))
    }

    pub fn coefficient(&self, s: &PauliString) -> f64 {
        if s.is_identity() {
            self.constant
        } else {
            self.terms.get(s).copied().unwrap_or(0.0)
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::constant_only(self.n_qubits, self.constant * factor);
        out.terms = self.terms.iter().map(|(s, c)| (*s, c * factor)).collect();
        out.prune();
        out
    }

    /// Largest absolute difference between coefficients of `self` and
    /// `other`, constant included.
    pub fn max_coefficient_diff(&self, other: &PauliSum) -> f64 {
        let mut d = (self.constant - other.constant).abs();
        for (s, c) in &self.terms {
            d = d.max((c - other.coefficient(s)).abs());
        }
        for (s, c) in &other.terms {
            d = d.max((c - self.coefficient(s)).abs());
        }
        d
    }

    /// `H|v>` over the full `2^n` space; zero amplitudes are skipped.
    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(amps.len(), 1usize << self.n_qubits, "state dimension mismatch");
        let mut out: Vec<Complex64> = amps.iter().map(|a| a * self.constant).collect();
        let nonzero: Vec<usize> = (0..amps.len())
            .filter(|&j| amps[j] != Complex64::new(0.0, 0.0))
            .collect();
        for (s, &c) in &self.terms {
            let (xm, zm, ny) = s.index_masks(self.n_qubits);
            let base = i_pow(ny) * c;
            for &j in &nonzero {
                let sign = if (j & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                out[j ^ xm] += base * sign * amps[j];
            }
        }
        out
    }

    /// `<v|H|v>` (complex; the imaginary part is rounding residue for
    /// Hermitian sums).
    pub fn expectation(&self, amps: &[Complex64]) -> Complex64 {
        let hv = self.apply(amps);
        amps.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Dense `2^n × 2^n` matrix built term by term.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > DENSE_QUBIT_CAP {
            return Err(Error::DenseCapExceeded {
                n_qubits: self.n_qubits,
                cap: DENSE_QUBIT_CAP,
            });
        }
        let basis: Vec<usize> = (0..1usize << self.n_qubits).collect();
        Ok(self.to_dense_in(&basis))
    }

    /// Dense matrix restricted to the given basis states (rows and columns in
    /// the order given). Couplings leaving the subspace are dropped.
    pub fn to_dense_in(&self, basis: &[usize]) -> DMatrix<Complex64> {
        let dim = basis.len();
        let position: std::collections::HashMap<usize, usize> =
            basis.iter().enumerate().map(|(k, &b)| (b, k)).collect();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for k in 0..dim {
            m[(k, k)] += Complex64::new(self.constant, 0.0);
        }
        for (s, &c) in &self.terms {
            let (xm, zm, ny) = s.index_masks(self.n_qubits);
            let base = i_pow(ny) * c;
            for (col, &j) in basis.iter().enumerate() {
                if let Some(&row) = position.get(&(j ^ xm)) {
                    let sign = if (j & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                    m[(row, col)] += base * sign;
                }
            }
        }
        m
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.12} I", self.constant)?;
        for (s, c) in &self.terms {
            write!(f, " {c:+.12} {s}")?;
        }
        Ok(())
    }
}

/// `Σ w_k · H_k`, merged term by term and pruned.
pub fn linear_combine(parts: &[(f64, &PauliSum)]) -> Result<PauliSum> {
    let Some((_, first)) = parts.first() else {
        return Err(Error::Config("linear_combine needs at least one part".into()));
    };
    let n = first.n_qubits;
    let mut out = PauliSum::zero(n);
    for (w, h) in parts {
        if h.n_qubits != n {
            return Err(Error::QubitMismatch {
                expected: n,
                found: h.n_qubits,
            });
        }
        out.constant += w * h.constant;
        for (s, c) in &h.terms {
            *out.terms.entry(*s).or_insert(0.0) += w * c;
        }
    }
    out.prune();
    Ok(out)
}
