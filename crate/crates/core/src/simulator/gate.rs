use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::basis_bit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    Single,
    Double,
}

/// Parameter-free gate template: a Givens rotation between the
/// configuration with 1s on the first half of `wires` (and 0s on the second
/// half) and its complement.
///
/// For pool gates the first half holds the occupied orbitals and the second
/// half the virtual ones, each half sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Excitation {
    pub kind: GateKind,
    pub wires: Vec<usize>,
}

impl Excitation {
    pub fn single(a: usize, b: usize) -> Result<Self> {
        Self::new(GateKind::Single, vec![a, b])
    }

    pub fn double(a: usize, b: usize, c: usize, d: usize) -> Result<Self> {
        Self::new(GateKind::Double, vec![a, b, c, d])
    }

    pub fn new(kind: GateKind, wires: Vec<usize>) -> Result<Self> {
        let expected = match kind {
            GateKind::Single => 2,
            GateKind::Double => 4,
        };
        if wires.len() != expected {
            return Err(Error::InvalidGate(format!(
                "{kind:?} gate needs {expected} wires, got {}",
                wires.len()
            )));
        }
        for (i, w) in wires.iter().enumerate() {
            if wires[..i].contains(w) {
                return Err(Error::InvalidGate(format!("repeated wire {w} in {wires:?}")));
            }
        }
        if kind == GateKind::Double && (wires[0] > wires[1] || wires[2] > wires[3]) {
            return Err(Error::InvalidGate(format!(
                "double-excitation wire pairs must be sorted: {wires:?}"
            )));
        }
        Ok(Self { kind, wires })
    }

    pub fn check_register(&self, n_qubits: usize) -> Result<()> {
        match self.wires.iter().find(|&&w| w >= n_qubits) {
            Some(&w) => Err(Error::QubitOutOfRange { index: w, n_qubits }),
            None => Ok(()),
        }
    }

    /// Basis-index masks: all wires, the "ones first" configuration, and the
    /// bits flipped between the two configurations.
    pub(crate) fn masks(&self, n_qubits: usize) -> (usize, usize) {
        let half = self.wires.len() / 2;
        let mut all = 0;
        let mut ones = 0;
        for (i, &w) in self.wires.iter().enumerate() {
            let b = basis_bit(n_qubits, w);
            all |= b;
            if i < half {
                ones |= b;
            }
        }
        (all, ones)
    }

    /// Partner of basis index `idx` under this gate, or `None` when the gate
    /// acts as the identity on it.
    pub(crate) fn partner(&self, n_qubits: usize, idx: usize) -> Option<usize> {
        let (all, ones) = self.masks(n_qubits);
        let pat = idx & all;
        (pat == ones || pat == all ^ ones).then_some(idx ^ all)
    }

    pub fn is_sz_conserving(&self) -> bool {
        let half = self.wires.len() / 2;
        let spin = |ws: &[usize]| {
            let mut v: Vec<usize> = ws.iter().map(|w| w % 2).collect();
            v.sort_unstable();
            v
        };
        spin(&self.wires[..half]) == spin(&self.wires[half..])
    }
}

impl fmt::Display for Excitation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            GateKind::Single => "Single",
            GateKind::Double => "Double",
        };
        write!(f, "{name}{:?}", self.wires)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub excitation: Excitation,
    /// Radians.
    pub theta: f64,
}

impl Gate {
    pub fn new(excitation: Excitation, theta: f64) -> Self {
        Self { excitation, theta }
    }
}

/// Amplitude pairs `(s1, s0)` rotated by one gate within a support, as
/// positions into the compact amplitude vector.
#[derive(Clone, Debug, Default)]
pub struct GatePlan {
    pub(crate) pairs: Vec<(u32, u32)>,
}

/// Which map a plan applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum GateMap {
    Forward,
    Adjoint,
    /// `dG/dθ`; zero outside the rotated pairs.
    First,
    /// `d²G/dθ²`; zero outside the rotated pairs.
    Second,
}

impl GatePlan {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub(crate) fn apply_in_place(&self, theta: f64, amps: &mut [Complex64], map: GateMap) {
        let (s, c) = (0.5 * theta).sin_cos();
        match map {
            GateMap::Forward | GateMap::Adjoint => {
                let s = if map == GateMap::Adjoint { -s } else { s };
                for &(p1, p0) in &self.pairs {
                    let (a1, a0) = (amps[p1 as usize], amps[p0 as usize]);
                    amps[p1 as usize] = a1 * c + a0 * s;
                    amps[p0 as usize] = a0 * c - a1 * s;
                }
            }
            GateMap::First | GateMap::Second => {
                let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
                self.derivative_into(theta, amps, &mut out, map);
                amps.copy_from_slice(&out);
            }
        }
    }

    /// Writes `dG·amps` or `d²G·amps` into `out` (entries outside the
    /// rotated pairs are left untouched, so `out` should start zeroed).
    pub(crate) fn derivative_into(&self, theta: f64, amps: &[Complex64], out: &mut [Complex64], map: GateMap) {
        let (s, c) = (0.5 * theta).sin_cos();
        match map {
            GateMap::First => {
                for &(p1, p0) in &self.pairs {
                    let (a1, a0) = (amps[p1 as usize], amps[p0 as usize]);
                    out[p1 as usize] = (a0 * c - a1 * s) * 0.5;
                    out[p0 as usize] = -(a1 * c + a0 * s) * 0.5;
                }
            }
            GateMap::Second => {
                for &(p1, p0) in &self.pairs {
                    let (a1, a0) = (amps[p1 as usize], amps[p0 as usize]);
                    out[p1 as usize] = -(a1 * c + a0 * s) * 0.25;
                    out[p0 as usize] = -(a0 * c - a1 * s) * 0.25;
                }
            }
            _ => unreachable!("derivative_into handles derivative maps only"),
        }
    }

    /// Gradient of `⟨ψ|G(θ)† D G(θ)|ψ⟩` at `θ = 0` given `λ = Dψ`.
    pub(crate) fn zero_angle_gradient(&self, lambda: &[Complex64], psi: &[Complex64]) -> f64 {
        let mut g = 0.0;
        for &(p1, p0) in &self.pairs {
            let (p1, p0) = (p1 as usize, p0 as usize);
            g += (lambda[p1].conj() * psi[p0] - lambda[p0].conj() * psi[p1]).re;
        }
        g
    }
}
