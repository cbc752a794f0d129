use std::collections::VecDeque;

use super::gate::{Excitation, GatePlan};
use crate::error::{Error, Result};
use crate::sector::Sector;

/// Largest register for which a position table over all `2^n` basis states
/// is kept.
pub const SUPPORT_QUBIT_CAP: usize = 24;

const ABSENT: u32 = u32::MAX;

/// Ordered set of basis indices that states are confined to, with a reverse
/// lookup table.
#[derive(Clone, Debug)]
pub struct Support {
    n_qubits: usize,
    basis: Vec<usize>,
    position: Vec<u32>,
}

impl Support {
    pub fn from_basis(n_qubits: usize, mut basis: Vec<usize>) -> Result<Self> {
        if n_qubits > SUPPORT_QUBIT_CAP {
            return Err(Error::DenseCapExceeded {
                n_qubits,
                cap: SUPPORT_QUBIT_CAP,
            });
        }
        basis.sort_unstable();
        basis.dedup();
        let mut position = vec![ABSENT; 1usize << n_qubits];
        for (k, &b) in basis.iter().enumerate() {
            if b >= position.len() {
                return Err(Error::Dimension(format!("basis index {b} outside register")));
            }
            position[b] = k as u32;
        }
        Ok(Self {
            n_qubits,
            basis,
            position,
        })
    }

    pub fn full(n_qubits: usize) -> Result<Self> {
        if n_qubits > SUPPORT_QUBIT_CAP {
            return Err(Error::DenseCapExceeded {
                n_qubits,
                cap: SUPPORT_QUBIT_CAP,
            });
        }
        Self::from_basis(n_qubits, (0..1usize << n_qubits).collect())
    }

    pub fn sector(sector: &Sector) -> Result<Self> {
        Self::from_basis(sector.n_qubits, sector.basis())
    }

    /// Smallest set containing `seeds` and closed under every gate in
    /// `gates` (any angle).
    pub fn closure(n_qubits: usize, seeds: &[usize], gates: &[Excitation]) -> Result<Self> {
        if n_qubits > SUPPORT_QUBIT_CAP {
            return Err(Error::DenseCapExceeded {
                n_qubits,
                cap: SUPPORT_QUBIT_CAP,
            });
        }
        for g in gates {
            g.check_register(n_qubits)?;
        }
        let mut seen = vec![false; 1usize << n_qubits];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        let mut basis = Vec::new();
        while let Some(b) = queue.pop_front() {
            basis.push(b);
            for g in gates {
                if let Some(p) = g.partner(n_qubits, b) {
                    if !seen[p] {
                        seen[p] = true;
                        queue.push_back(p);
                    }
                }
            }
        }
        Self::from_basis(n_qubits, basis)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn position(&self, index: usize) -> Option<usize> {
        match self.position.get(index) {
            Some(&p) if p != ABSENT => Some(p as usize),
            _ => None,
        }
    }

    /// Rotated pairs of `gate` within the support. Errors if the support is
    /// not closed under the gate.
    pub fn plan(&self, gate: &Excitation) -> Result<GatePlan> {
        gate.check_register(self.n_qubits)?;
        let (all, ones) = gate.masks(self.n_qubits);
        let mut pairs = Vec::new();
        for (k, &b) in self.basis.iter().enumerate() {
            let pat = b & all;
            if pat == ones {
                match self.position(b ^ all) {
                    Some(p0) => pairs.push((k as u32, p0 as u32)),
                    None => return Err(Error::Dimension(format!("support not closed under {gate}"))),
                }
            } else if pat == all ^ ones && self.position(b ^ all).is_none() {
                return Err(Error::Dimension(format!("support not closed under {gate}")));
            }
        }
        Ok(GatePlan { pairs })
    }
}
