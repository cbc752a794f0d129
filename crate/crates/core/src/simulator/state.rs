use num_complex::Complex64;

use super::observable::inner;
use crate::error::{Error, Result};

/// Largest register for full `2^n` statevectors.
pub const SIMULATION_QUBIT_CAP: usize = 16;

/// Full statevector, qubit 0 leftmost (most significant index bit).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > SIMULATION_QUBIT_CAP {
            return Err(Error::DenseCapExceeded {
                n_qubits,
                cap: SIMULATION_QUBIT_CAP,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        if index >= amps.len() {
            return Err(Error::Dimension(format!("basis index {index} outside register")));
        }
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes without renormalizing.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_qubits > SIMULATION_QUBIT_CAP {
            return Err(Error::DenseCapExceeded {
                n_qubits,
                cap: SIMULATION_QUBIT_CAP,
            });
        }
        if amps.len() != 1usize << n_qubits {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(inner(&self.amps, &other.amps))
    }

    /// Multiplies by a global phase so that the largest-magnitude amplitude
    /// (lowest index on ties) is real and positive.
    pub fn align_phase(&mut self) {
        align_largest(&mut self.amps);
    }

    /// Multiplies by a global phase so that `⟨reference|self⟩` is real and
    /// nonnegative.
    pub fn align_to(&mut self, reference: &StateVector) -> Result<()> {
        let ov = reference.inner(self)?;
        if ov.norm() > 0.0 {
            let ph = ov.conj() / ov.norm();
            for a in &mut self.amps {
                *a *= ph;
            }
        }
        Ok(())
    }
}

pub(crate) fn align_largest(amps: &mut [Complex64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (k, a) in amps.iter().enumerate() {
        // tolerate rounding so near-ties resolve to the lowest index
        if a.norm() > best_mag * (1.0 + 1e-12) {
            best = k;
            best_mag = a.norm();
        }
    }
    if best_mag > 0.0 {
        let ph = amps[best].conj() / best_mag;
        for a in amps.iter_mut() {
            *a *= ph;
        }
    }
}
