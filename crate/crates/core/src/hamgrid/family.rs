use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DisplacementLabel, HamiltonianGrid, Stencil};
use crate::error::{Error, Result};
use crate::pauli::{linear_combine, Pauli, PauliString, PauliSum};
use crate::sector::Sector;

/// Anything that yields `H(R)` at integer displacements `R₀ + h·label`.
pub trait HamiltonianFamily: Sync {
    fn n_qubits(&self) -> usize;
    fn n_coords(&self) -> usize;
    fn step(&self) -> f64;
    /// Particle sector for exact diagonalization, if the family conserves one.
    fn sector(&self) -> Option<Sector>;
    fn hamiltonian(&self, label: &DisplacementLabel) -> Result<PauliSum>;

    fn has_point(&self, _label: &DisplacementLabel) -> bool {
        true
    }

    /// Digest identifying the underlying data, when there is any.
    fn content_hash(&self) -> Option<String> {
        None
    }

    /// `∂^|coords| H / ∂R_coords` at `R₀`; defaults to the central stencil
    /// over [`HamiltonianFamily::hamiltonian`].
    fn derivative(&self, coords: &[usize]) -> Result<PauliSum> {
        let stencil = Stencil::new(coords, self.step(), 1)?;
        let mut ops = Vec::with_capacity(stencil.points.len());
        for (label, w) in &stencil.points {
            ops.push((*w, self.hamiltonian(label)?));
        }
        let parts: Vec<(f64, &PauliSum)> = ops.iter().map(|(w, h)| (*w, h)).collect();
        linear_combine(&parts)
    }
}

impl HamiltonianFamily for HamiltonianGrid {
    fn n_qubits(&self) -> usize {
        HamiltonianGrid::n_qubits(self)
    }

    fn n_coords(&self) -> usize {
        HamiltonianGrid::n_coords(self)
    }

    fn step(&self) -> f64 {
        HamiltonianGrid::step(self)
    }

    fn sector(&self) -> Option<Sector> {
        Some(HamiltonianGrid::sector(self))
    }

    fn hamiltonian(&self, label: &DisplacementLabel) -> Result<PauliSum> {
        self.hamiltonian_at(label)
    }

    fn has_point(&self, label: &DisplacementLabel) -> bool {
        self.contains(label)
    }

    fn content_hash(&self) -> Option<String> {
        Some(HamiltonianGrid::content_hash(self))
    }

    fn derivative(&self, coords: &[usize]) -> Result<PauliSum> {
        self.hamiltonian_derivative(coords)
    }
}

/// Sorted multisets of `coords` with sizes `0..=order`.
fn multisets(coords: &[usize], order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..order {
        let mut next = Vec::new();
        for m in &frontier {
            let start = m
                .last()
                .map_or(0, |last| coords.iter().position(|c| c == last).unwrap());
            for &c in &coords[start..] {
                let mut e: Vec<usize> = m.clone();
                e.push(c);
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// `Π d_c^{m_c} / m_c!` for a sorted multiset of coordinates.
fn taylor_weight(multiset: &[usize], d: &[f64]) -> f64 {
    let mut w = 1.0;
    let mut k = 0;
    while k < multiset.len() {
        let c = multiset[k];
        let m = multiset[k..].iter().take_while(|&&x| x == c).count();
        let fact: f64 = (1..=m).map(|i| i as f64).product();
        w *= d[c].powi(m as i32) / fact;
        k += m;
    }
    w
}

/// Truncated Taylor expansion `H_n(R)` about `R₀` over a subset of
/// coordinates.
#[derive(Clone, Debug)]
pub struct TaylorFamily {
    n_qubits: usize,
    n_coords: usize,
    step: f64,
    sector: Option<Sector>,
    order: usize,
    coords: Vec<usize>,
    terms: Vec<(Vec<usize>, PauliSum)>,
}

impl TaylorFamily {
    /// Expands `family` to `order` in the listed coordinates, taking the
    /// expansion coefficients from [`HamiltonianFamily::derivative`].
    pub fn new<F: HamiltonianFamily + ?Sized>(family: &F, order: usize, coords: &[usize]) -> Result<Self> {
        let mut cs = coords.to_vec();
        cs.sort_unstable();
        cs.dedup();
        if let Some(&c) = cs.iter().find(|&&c| c >= family.n_coords()) {
            return Err(Error::Config(format!("coordinate {c} out of range")));
        }
        let mut terms = Vec::new();
        for m in multisets(&cs, order) {
            let d = family.derivative(&m)?;
            terms.push((m, d));
        }
        Ok(Self {
            n_qubits: family.n_qubits(),
            n_coords: family.n_coords(),
            step: family.step(),
            sector: family.sector(),
            order,
            coords: cs,
            terms,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `H_n` at an arbitrary displacement (Bohr) from `R₀`.
    pub fn at_displacement(&self, d: &[f64]) -> Result<PauliSum> {
        if d.len() != self.n_coords {
            return Err(Error::Dimension(format!(
                "displacement has {} entries, family has {} coordinates",
                d.len(),
                self.n_coords
            )));
        }
        if let Some(c) = (0..self.n_coords).find(|c| d[*c] != 0.0 && !self.coords.contains(c)) {
            return Err(Error::Config(format!(
                "Taylor family was not expanded along coordinate {c}"
            )));
        }
        let parts: Vec<(f64, &PauliSum)> = self.terms.iter().map(|(m, h)| (taylor_weight(m, d), h)).collect();
        linear_combine(&parts)
    }
}

impl HamiltonianFamily for TaylorFamily {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn n_coords(&self) -> usize {
        self.n_coords
    }

    fn step(&self) -> f64 {
        self.step
    }

    fn sector(&self) -> Option<Sector> {
        self.sector
    }

    fn hamiltonian(&self, label: &DisplacementLabel) -> Result<PauliSum> {
        self.at_displacement(&label.displacement(self.n_coords, self.step))
    }

    fn has_point(&self, label: &DisplacementLabel) -> bool {
        label.iter().all(|(c, _)| self.coords.contains(&c))
    }
}

/// Polynomial family `H(d) = Σ_k (Π_{c ∈ m_k} d_c) · P_k` with explicit
/// monomials `m_k` (sorted coordinate multisets).
#[derive(Clone, Debug)]
pub struct SyntheticFamily {
    n_qubits: usize,
    n_coords: usize,
    step: f64,
    sector: Option<Sector>,
    terms: Vec<(Vec<usize>, PauliSum)>,
}

impl SyntheticFamily {
    pub fn new(n_coords: usize, step: f64, sector: Option<Sector>, terms: Vec<(Vec<usize>, PauliSum)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::Config("synthetic family needs at least one term".into()));
        };
        let n_qubits = first.n_qubits();
        let mut sorted = Vec::with_capacity(terms.len());
        for (mut m, h) in terms {
            if h.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch {
                    expected: n_qubits,
                    found: h.n_qubits(),
                });
            }
            if m.iter().any(|&c| c >= n_coords) {
                return Err(Error::Config("monomial coordinate out of range".into()));
            }
            m.sort_unstable();
            sorted.push((m, h));
        }
        Ok(Self {
            n_qubits,
            n_coords,
            step,
            sector,
            terms: sorted,
        })
    }

    /// Random Hermitian polynomial family: every monomial of degree
    /// `0..=degree` carries a random sum of `n_strings` Pauli strings with
    /// coefficients uniform in `[-1, 1]` (halved for nonconstant monomials).
    pub fn random(n_qubits: usize, n_coords: usize, degree: usize, n_strings: usize, step: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords: Vec<usize> = (0..n_coords).collect();
        let mut terms = Vec::new();
        for m in multisets(&coords, degree) {
            let scale = if m.is_empty() { 1.0 } else { 0.5 };
            terms.push((m, random_pauli_sum(&mut rng, n_qubits, n_strings, scale)));
        }
        Self::new(n_coords, step, None, terms).expect("random family is well formed")
    }

    pub fn at_displacement(&self, d: &[f64]) -> Result<PauliSum> {
        if d.len() != self.n_coords {
            return Err(Error::Dimension(format!(
                "displacement has {} entries, family has {} coordinates",
                d.len(),
                self.n_coords
            )));
        }
        let parts: Vec<(f64, &PauliSum)> = self
            .terms
            .iter()
            .map(|(m, h)| (m.iter().map(|&c| d[c]).product::<f64>(), h))
            .collect();
        linear_combine(&parts)
    }
}

/// Random real-coefficient Pauli sum (identity strings fold into the
/// constant).
pub(crate) fn random_pauli_sum<R: Rng>(rng: &mut R, n_qubits: usize, n_strings: usize, scale: f64) -> PauliSum {
    let mut terms = Vec::with_capacity(n_strings);
    for _ in 0..n_strings {
        let mut s = PauliString::identity();
        for q in 0..n_qubits {
            let p = match rng.gen_range(0..4) {
                0 => None,
                1 => Some(Pauli::X),
                2 => Some(Pauli::Y),
                _ => Some(Pauli::Z),
            };
            s.set(q, p);
        }
        terms.push((s, scale * rng.gen_range(-1.0..1.0)));
    }
    PauliSum::from_terms(n_qubits, 0.0, terms).expect("strings fit the register")
}

impl HamiltonianFamily for SyntheticFamily {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn n_coords(&self) -> usize {
        self.n_coords
    }

    fn step(&self) -> f64 {
        self.step
    }

    fn sector(&self) -> Option<Sector> {
        self.sector
    }

    fn hamiltonian(&self, label: &DisplacementLabel) -> Result<PauliSum> {
        self.at_displacement(&label.displacement(self.n_coords, self.step))
    }

    /// Exact: only monomials equal to `coords` as multisets survive at `R₀`.
    fn derivative(&self, coords: &[usize]) -> Result<PauliSum> {
        let mut target = coords.to_vec();
        target.sort_unstable();
        let mut parts = Vec::new();
        for (m, h) in &self.terms {
            if *m == target {
                parts.push((taylor_weight(m, &vec![1.0; self.n_coords]).recip(), h));
            }
        }
        if parts.is_empty() {
            return Ok(PauliSum::zero(self.n_qubits));
        }
        linear_combine(&parts)
    }
}
