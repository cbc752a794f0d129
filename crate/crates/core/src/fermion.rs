//! Electronic integrals and their Jordan–Wigner image.
//!
//! Spin orbitals are interleaved: spatial orbital `i` maps spin-up to qubit
//! `2i` and spin-down to qubit `2i + 1`. Two-electron integrals are held in
//! chemist notation `(pq|rs)` and enter the Hamiltonian as
//!
//! `H = E_core + Σ h_pq a†_pσ a_qσ + ½ Σ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{multiply, Pauli, PauliString, PauliSum, MAX_QUBITS, PRUNE_TOLERANCE};

/// Symmetry tolerance for `h1` and `h2`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Largest imaginary coefficient accepted during assembly.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralSet {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    /// Twice the spin projection, as carried by FCIDUMP `MS2`.
    pub ms2: i32,
    pub core_energy: f64,
    /// Row-major `n × n`.
    pub h1: Vec<f64>,
    /// `(pq|rs)` at `((p·n + q)·n + r)·n + s`.
    pub h2: Vec<f64>,
}

impl IntegralSet {
    pub fn zeros(n_orbitals: usize, n_electrons: usize) -> Self {
        let n = n_orbitals;
        Self {
            n_orbitals,
            n_electrons,
            ms2: 0,
            core_energy: 0.0,
            h1: vec![0.0; n * n],
            h2: vec![0.0; n * n * n * n],
        }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orbitals
    }

    #[inline]
    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.h1[p * self.n_orbitals + q]
    }

    #[inline]
    pub fn h2(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orbitals;
        self.h2[((p * n + q) * n + r) * n + s]
    }

    /// Sets `h1[p][q]` and `h1[q][p]`.
    pub fn set_h1(&mut self, p: usize, q: usize, v: f64) {
        let n = self.n_orbitals;
        self.h1[p * n + q] = v;
        self.h1[q * n + p] = v;
    }

    /// Sets all eight permutations of `(pq|rs)`.
    pub fn set_h2(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in eightfold(p, q, r, s) {
            let n = self.n_orbitals;
            self.h2[((a * n + b) * n + c) * n + d] = v;
        }
    }

    /// Checks dimensions and the permutational symmetries.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_orbitals;
        if self.h1.len() != n * n || self.h2.len() != n.pow(4) {
            return Err(Error::Dimension(format!("integral arrays do not match {n} orbitals")));
        }
        if 2 * n > MAX_QUBITS {
            return Err(Error::Config(format!("{n} orbitals exceed the 64-qubit limit")));
        }
        if self.n_electrons > 2 * n {
            return Err(Error::ElectronCount {
                n_electrons: self.n_electrons,
                n_orbitals: n,
            });
        }
        for p in 0..n {
            for q in 0..p {
                let d = (self.h1(p, q) - self.h1(q, p)).abs();
                if d > SYMMETRY_TOLERANCE {
                    return Err(Error::Symmetry(format!(
                        "h1[{p}][{q}] differs from h1[{q}][{p}] by {d:e}"
                    )));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.h2(p, q, r, s);
                        for (a, b, c, d) in eightfold(p, q, r, s) {
                            let dv = (self.h2(a, b, c, d) - v).abs();
                            if dv > SYMMETRY_TOLERANCE {
                                return Err(Error::Symmetry(format!(
                                    "({p}{q}|{r}{s}) differs from ({a}{b}|{c}{d}) by {dv:e}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `Σ w_k · I_k` over all coefficient arrays and the core energy. Orbital
    /// and electron counts come from the first part.
    pub fn linear_combine(parts: &[(f64, &IntegralSet)]) -> Result<IntegralSet> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::Config("linear_combine needs at least one part".into()));
        };
        let mut out = IntegralSet::zeros(first.n_orbitals, first.n_electrons);
        out.ms2 = first.ms2;
        for (w, s) in parts {
            if s.n_orbitals != first.n_orbitals {
                return Err(Error::Dimension(format!(
                    "orbital counts {} and {} differ",
                    first.n_orbitals, s.n_orbitals
                )));
            }
            out.core_energy += w * s.core_energy;
            for (o, v) in out.h1.iter_mut().zip(&s.h1) {
                *o += w * v;
            }
            for (o, v) in out.h2.iter_mut().zip(&s.h2) {
                *o += w * v;
            }
        }
        Ok(out)
    }

    /// Largest absolute coefficient difference, core energy included.
    pub fn max_abs_diff(&self, other: &IntegralSet) -> f64 {
        let mut d = (self.core_energy - other.core_energy).abs();
        for (a, b) in self.h1.iter().zip(&other.h1) {
            d = d.max((a - b).abs());
        }
        for (a, b) in self.h2.iter().zip(&other.h2) {
            d = d.max((a - b).abs());
        }
        d
    }

    /// Hartree–Fock reference occupations: the lowest `n_electrons` qubits
    /// with spin-up and spin-down filled per `ms2`.
    pub fn reference_occupations(&self) -> Result<Vec<usize>> {
        let ne = self.n_electrons as i64;
        let ms2 = self.ms2 as i64;
        if (ne + ms2) % 2 != 0 || ms2.abs() > ne {
            return Err(Error::ElectronCount {
                n_electrons: self.n_electrons,
                n_orbitals: self.n_orbitals,
            });
        }
        let n_up = ((ne + ms2) / 2) as usize;
        let n_down = ((ne - ms2) / 2) as usize;
        if n_up > self.n_orbitals || n_down > self.n_orbitals {
            return Err(Error::ElectronCount {
                n_electrons: self.n_electrons,
                n_orbitals: self.n_orbitals,
            });
        }
        let mut occ: Vec<usize> = (0..n_up).map(|i| 2 * i).collect();
        occ.extend((0..n_down).map(|i| 2 * i + 1));
        occ.sort_unstable();
        Ok(occ)
    }
}

/// The eight index permutations under which real `(pq|rs)` is invariant.
pub fn eightfold(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

/// Fermionic ladder operator on spin-orbital `mode`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

type Expansion = Vec<(PauliString, Complex64)>;

fn ladder_image(op: Ladder) -> Expansion {
    let (mode, y_sign) = match op {
        Ladder::Create(m) => (m, -1.0),
        Ladder::Annihilate(m) => (m, 1.0),
    };
    let mut chain = PauliString::identity();
    for q in 0..mode {
        chain.set(q, Some(Pauli::Z));
    }
    let mut x = chain;
    x.set(mode, Some(Pauli::X));
    let mut y = chain;
    y.set(mode, Some(Pauli::Y));
    vec![(x, Complex64::new(0.5, 0.0)), (y, Complex64::new(0.0, 0.5 * y_sign))]
}

fn expand_product(ops: &[Ladder]) -> Expansion {
    let mut acc: Expansion = vec![(PauliString::identity(), Complex64::new(1.0, 0.0))];
    for &op in ops {
        let img = ladder_image(op);
        let mut next = HashMap::with_capacity(acc.len() * 2);
        for (sa, ca) in &acc {
            for (sb, cb) in &img {
                let (ph, s) = multiply(sa, sb);
                *next.entry(s).or_insert(Complex64::new(0.0, 0.0)) += ca * cb * ph.to_complex();
            }
        }
        acc = next.into_iter().collect();
        acc.sort_by_key(|(s, _)| *s);
    }
    acc
}

/// Accumulates complex Pauli coefficients and checks they come out real.
pub(crate) struct ComplexAccumulator {
    n_qubits: usize,
    terms: HashMap<PauliString, Complex64>,
}

impl ComplexAccumulator {
    pub(crate) fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: HashMap::new(),
        }
    }

    fn add_expansion(&mut self, exp: &Expansion, coeff: f64) {
        for (s, c) in exp {
            *self.terms.entry(*s).or_insert(Complex64::new(0.0, 0.0)) += c * coeff;
        }
    }

    pub(crate) fn add_product(&mut self, ops: &[Ladder], coeff: f64) {
        let exp = expand_product(ops);
        self.add_expansion(&exp, coeff);
    }

    pub(crate) fn finish(self, constant: f64, context: &str) -> Result<PauliSum> {
        let mut entries: Vec<(PauliString, Complex64)> = self.terms.into_iter().collect();
        entries.sort_by_key(|(s, _)| *s);
        let mut real = Vec::with_capacity(entries.len());
        for (s, c) in entries {
            if c.im.abs() > IMAGINARY_TOLERANCE {
                return Err(Error::ImaginaryResidue {
                    residue: c.im.abs(),
                    context: format!("{context}, term {s}"),
                });
            }
            if c.re.abs() > PRUNE_TOLERANCE || s.is_identity() {
                real.push((s, c.re));
            }
        }
        PauliSum::from_terms(self.n_qubits, constant, real)
    }
}

/// Jordan–Wigner image of a product of ladder operators times `coeff`. The
/// result must be Hermitian; otherwise an imaginary-residue error is raised.
pub fn jordan_wigner_product(n_qubits: usize, ops: &[Ladder], coeff: f64) -> Result<PauliSum> {
    for op in ops {
        let (Ladder::Create(m) | Ladder::Annihilate(m)) = *op;
        if m >= n_qubits {
            return Err(Error::QubitOutOfRange { index: m, n_qubits });
        }
    }
    let mut acc = ComplexAccumulator::new(n_qubits);
    acc.add_product(ops, coeff);
    acc.finish(0.0, "ladder product")
}

/// `coeff·(c†_p c_q + c†_q c_p)` for `p ≠ q`, or `coeff·c†_p c_p`.
pub fn jordan_wigner_one_body(n_qubits: usize, p: usize, q: usize, coeff: f64) -> Result<PauliSum> {
    for &m in &[p, q] {
        if m >= n_qubits {
            return Err(Error::QubitOutOfRange { index: m, n_qubits });
        }
    }
    let mut acc = ComplexAccumulator::new(n_qubits);
    acc.add_product(&[Ladder::Create(p), Ladder::Annihilate(q)], coeff);
    if p != q {
        acc.add_product(&[Ladder::Create(q), Ladder::Annihilate(p)], coeff);
    }
    acc.finish(0.0, "one-body term")
}

/// Qubit Hamiltonian on `2·n_orbitals` qubits. Validates the integral
/// symmetries first.
pub fn assemble_hamiltonian(ints: &IntegralSet) -> Result<PauliSum> {
    ints.validate()?;
    assemble_unchecked(ints)
}

/// Assembly without the symmetry check, for derivative integral sets that
/// inherit symmetry from their (validated) stencil points.
pub(crate) fn assemble_unchecked(ints: &IntegralSet) -> Result<PauliSum> {
    let n = ints.n_orbitals;
    let nq = 2 * n;
    let mut acc = ComplexAccumulator::new(nq);
    for p in 0..n {
        for q in 0..n {
            let h = ints.h1(p, q);
            if h == 0.0 {
                continue;
            }
            for sigma in 0..2 {
                acc.add_product(&[Ladder::Create(2 * p + sigma), Ladder::Annihilate(2 * q + sigma)], h);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.h2(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let (pp, qq) = (2 * p + sigma, 2 * q + sigma);
                            let (rr, ss) = (2 * r + tau, 2 * s + tau);
                            if pp == rr || qq == ss {
                                continue;
                            }
                            acc.add_product(
                                &[
                                    Ladder::Create(pp),
                                    Ladder::Create(rr),
                                    Ladder::Annihilate(ss),
                                    Ladder::Annihilate(qq),
                                ],
                                0.5 * v,
                            );
                        }
                    }
                }
            }
        }
    }
    acc.finish(ints.core_energy, "Hamiltonian assembly")
}
