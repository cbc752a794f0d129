//! Statevector simulation of particle-conserving excitation circuits.
//!
//! Gates are Givens rotations `G(θ)` on the pair `{|s1⟩, |s0⟩}`, where `s1`
//! has 1s on the first half of the wires and `s0` on the second half:
//!
//! `G|s1⟩ = cos(θ/2)|s1⟩ − sin(θ/2)|s0⟩`, `G|s0⟩ = sin(θ/2)|s1⟩ + cos(θ/2)|s0⟩`,
//!
//! and the identity on every other basis state. Internally states are stored
//! only on the set of basis states reachable from the reference, so a
//! 14-qubit molecular sector costs a few thousand amplitudes instead of
//! `2^14`.

mod evaluator;
mod gate;
mod observable;
mod state;
mod support;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use evaluator::{Evaluator, EXPVAL_IMAG_TOLERANCE};
pub use gate::{Excitation, Gate, GateKind, GatePlan};
pub use observable::{inner, SparseObservable};
pub use state::{StateVector, SIMULATION_QUBIT_CAP};
pub use support::{Support, SUPPORT_QUBIT_CAP};

pub(crate) use evaluator::real_part;
pub(crate) use state::align_largest;

use crate::error::{Error, Result};
use crate::pauli::{basis_bit, PauliSum};

/// Reference preparation followed by an ordered gate sequence; parameters
/// are supplied separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    /// Qubits prepared in `|1⟩`, sorted.
    pub reference: Vec<usize>,
    pub gates: Vec<Excitation>,
}

impl Circuit {
    pub fn new(n_qubits: usize, reference: Vec<usize>, gates: Vec<Excitation>) -> Result<Self> {
        if n_qubits > SUPPORT_QUBIT_CAP {
            return Err(Error::DenseCapExceeded {
                n_qubits,
                cap: SUPPORT_QUBIT_CAP,
            });
        }
        let mut reference = reference;
        reference.sort_unstable();
        reference.dedup();
        if let Some(&q) = reference.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
        for g in &gates {
            g.check_register(n_qubits)?;
        }
        Ok(Self {
            n_qubits,
            reference,
            gates,
        })
    }

    pub fn n_params(&self) -> usize {
        self.gates.len()
    }

    pub fn reference_index(&self) -> usize {
        self.reference
            .iter()
            .fold(0, |acc, &q| acc | basis_bit(self.n_qubits, q))
    }

    pub fn with_gates(&self, gates: Vec<Excitation>) -> Self {
        Self {
            n_qubits: self.n_qubits,
            reference: self.reference.clone(),
            gates,
        }
    }
}

pub fn prepare_reference(n_qubits: usize, occupations: &[usize]) -> Result<StateVector> {
    if let Some(&q) = occupations.iter().find(|&&q| q >= n_qubits) {
        return Err(Error::QubitOutOfRange { index: q, n_qubits });
    }
    let idx = occupations.iter().fold(0, |acc, &q| acc | basis_bit(n_qubits, q));
    StateVector::basis_state(n_qubits, idx)
}

/// Applies one gate to a full statevector.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let n = state.n_qubits();
    gate.excitation.check_register(n)?;
    let (all, ones) = gate.excitation.masks(n);
    let (s, c) = (0.5 * gate.theta).sin_cos();
    let mut amps = state.amplitudes().to_vec();
    for i1 in 0..amps.len() {
        if i1 & all == ones {
            let i0 = i1 ^ all;
            let (a1, a0) = (amps[i1], amps[i0]);
            amps[i1] = a1 * c + a0 * s;
            amps[i0] = a0 * c - a1 * s;
        }
    }
    StateVector::from_amplitudes(n, amps)
}

/// Output state of `circuit` at parameters `theta`.
pub fn circuit_state(circuit: &Circuit, theta: &[f64]) -> Result<StateVector> {
    let ev = Evaluator::new(circuit)?;
    ev.expand(&ev.state(theta)?)
}

/// Exact `⟨ψ|H|ψ⟩`; errors when the imaginary residue exceeds `1e-10`.
pub fn expval(state: &StateVector, h: &PauliSum) -> Result<f64> {
    if state.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            found: state.n_qubits(),
        });
    }
    real_part(h.expectation(state.amplitudes()), "expectation value")
}

pub fn gradient(circuit: &Circuit, theta: &[f64], h: &PauliSum) -> Result<Vec<f64>> {
    check_register(circuit, h)?;
    let ev = Evaluator::new(circuit)?;
    ev.gradient(theta, &ev.observable(h))
}

pub fn param_hessian(circuit: &Circuit, theta: &[f64], h: &PauliSum) -> Result<DMatrix<f64>> {
    check_register(circuit, h)?;
    let ev = Evaluator::new(circuit)?;
    ev.param_hessian(theta, &ev.observable(h))
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

fn check_register(circuit: &Circuit, h: &PauliSum) -> Result<()> {
    if circuit.n_qubits != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: circuit.n_qubits,
            found: h.n_qubits(),
        });
    }
    Ok(())
}
