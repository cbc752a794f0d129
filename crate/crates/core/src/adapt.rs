//! Adaptive ansatz construction and gradient-descent VQE.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::pauli::PauliSum;
use crate::simulator::{Circuit, Evaluator, Excitation, GatePlan, SparseObservable, StateVector, Support};

/// Particle- and Sz-conserving excitations out of a reference determinant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatePool {
    pub n_qubits: usize,
    /// Occupied spin orbitals of the reference, sorted.
    pub reference: Vec<usize>,
    pub gates: Vec<Excitation>,
}

impl GatePool {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn index_of(&self, gate: &Excitation) -> Option<usize> {
        self.gates.iter().position(|g| g == gate)
    }

    /// Empty circuit on the pool's reference.
    pub fn reference_circuit(&self) -> Result<Circuit> {
        Circuit::new(self.n_qubits, self.reference.clone(), Vec::new())
    }

    /// Closure of the reference under every pool gate.
    pub fn support(&self) -> Result<Support> {
        let c = self.reference_circuit()?;
        Support::closure(self.n_qubits, &[c.reference_index()], &self.gates)
    }
}

/// Closed-shell pool: the `n_electrons / 2` lowest spatial orbitals doubly
/// occupied, interleaved spin ordering.
pub fn build_pool(n_orbitals: usize, n_electrons: usize) -> Result<GatePool> {
    if n_electrons % 2 != 0 || n_electrons > 2 * n_orbitals {
        return Err(Error::ElectronCount {
            n_electrons,
            n_orbitals,
        });
    }
    build_pool_from_reference(2 * n_orbitals, &(0..n_electrons).collect::<Vec<_>>())
}

/// Pool over an arbitrary reference determinant. Singles come first, then
/// doubles, each in lexicographic order of (occupied, virtual) wires.
pub fn build_pool_from_reference(n_qubits: usize, occupied: &[usize]) -> Result<GatePool> {
    let mut occ = occupied.to_vec();
    occ.sort_unstable();
    occ.dedup();
    if occ.len() != occupied.len() || occ.iter().any(|&q| q >= n_qubits) {
        return Err(Error::ElectronCount {
            n_electrons: occupied.len(),
            n_orbitals: n_qubits / 2,
        });
    }
    let virt: Vec<usize> = (0..n_qubits).filter(|q| !occ.contains(q)).collect();
    let mut gates = Vec::new();
    for &i in &occ {
        for &a in &virt {
            if i % 2 == a % 2 {
                gates.push(Excitation::single(i, a)?);
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in virt.iter().enumerate() {
                for &b in &virt[y + 1..] {
                    if i % 2 + j % 2 == a % 2 + b % 2 {
                        gates.push(Excitation::double(i, j, a, b)?);
                    }
                }
            }
        }
    }
    Ok(GatePool {
        n_qubits,
        reference: occ,
        gates,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptConfig {
    /// Stop adding gates once the largest pool gradient falls below this.
    pub selection_threshold: f64,
    pub max_gates: usize,
    pub vqe_learning_rate: f64,
    /// Convergence on the gradient max-norm.
    pub vqe_grad_tol: f64,
    /// Energy evaluations allowed per optimization.
    pub vqe_max_iters: usize,
    /// Factor applied to the step after an accepted step (1 disables growth).
    pub vqe_step_growth: f64,
    /// Ceiling on the grown step.
    pub vqe_max_step: f64,
    /// Tighter tolerance for one last optimization of all parameters after
    /// selection stops.
    #[serde(default)]
    pub polish_grad_tol: Option<f64>,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            selection_threshold: 1e-5,
            max_gates: 200,
            vqe_learning_rate: 0.05,
            vqe_grad_tol: 1e-5,
            vqe_max_iters: 100_000,
            vqe_step_growth: 1.0,
            vqe_max_step: 0.05,
            polish_grad_tol: None,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("selection_threshold", self.selection_threshold),
            ("vqe_learning_rate", self.vqe_learning_rate),
            ("vqe_grad_tol", self.vqe_grad_tol),
            ("vqe_max_step", self.vqe_max_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_gates == 0 || self.vqe_max_iters == 0 {
            return Err(Error::Config("max_gates and vqe_max_iters must be positive".into()));
        }
        if !(self.vqe_step_growth >= 1.0) {
            return Err(Error::Config("vqe_step_growth must be at least 1".into()));
        }
        if let Some(t) = self.polish_grad_tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Config(format!("polish_grad_tol must be positive, got {t}")));
            }
        }
        if self.vqe_max_step < self.vqe_learning_rate {
            return Err(Error::Config("vqe_max_step below vqe_learning_rate".into()));
        }
        Ok(())
    }
}

/// Screening gradients `∂/∂θ ⟨ψ|G(θ)†hG(θ)|ψ⟩|₀` for every pool gate.
pub fn pool_gradients(state: &StateVector, pool: &GatePool, h: &PauliSum) -> Result<Vec<f64>> {
    if state.n_qubits() != pool.n_qubits || h.n_qubits() != pool.n_qubits {
        return Err(Error::QubitMismatch {
            expected: pool.n_qubits,
            found: if state.n_qubits() != pool.n_qubits {
                state.n_qubits()
            } else {
                h.n_qubits()
            },
        });
    }
    // support: nonzero amplitudes plus their pool partners
    let seeds: Vec<usize> = (0..state.amplitudes().len())
        .filter(|&i| state.amplitudes()[i].norm() > 0.0)
        .collect();
    let mut basis = seeds.clone();
    for &s in &seeds {
        basis.extend(pool.gates.iter().filter_map(|g| g.partner(pool.n_qubits, s)));
    }
    let support = Support::from_basis(pool.n_qubits, basis)?;
    let psi: Vec<Complex64> = support.basis().iter().map(|&b| state.amplitudes()[b]).collect();
    let lambda = SparseObservable::new(h, &support).apply(&psi);
    let plans = pool.gates.iter().map(|g| support.plan(g)).collect::<Result<Vec<_>>>()?;
    Ok(plans.iter().map(|p| p.zero_angle_gradient(&lambda, &psi)).collect())
}

/// Largest-magnitude screening gradient; ties go to the lowest pool index.
pub fn select_next(state: &StateVector, pool: &GatePool, h: &PauliSum) -> Result<(usize, f64)> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    Ok(argmax_abs(&pool_gradients(state, pool, h)?))
}

fn argmax_abs(g: &[f64]) -> (usize, f64) {
    let mut best = (0, g[0].abs());
    for (k, v) in g.iter().enumerate().skip(1) {
        if v.abs() > best.1 {
            best = (k, v.abs());
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub theta: Vec<f64>,
    pub energy: f64,
    /// Gradient max-norm at `theta`.
    pub grad_norm: f64,
    /// Energy evaluations spent, rejected trial steps included.
    pub iterations: usize,
    pub converged: bool,
}

pub fn vqe_optimize(circuit: &Circuit, theta0: &[f64], h: &PauliSum, config: &AdaptConfig) -> Result<VqeResult> {
    let ev = Evaluator::new(circuit)?;
    let obs = ev.observable(h);
    vqe_with(&ev, &obs, theta0, config)
}

/// Gradient descent with step halving: a trial step that raises the energy is
/// rejected and retried at half the step length.
pub fn vqe_with(ev: &Evaluator, obs: &SparseObservable, theta0: &[f64], config: &AdaptConfig) -> Result<VqeResult> {
    config.validate()?;
    let mut theta = theta0.to_vec();
    let (mut energy, mut grad) = ev.energy_and_gradient(&theta, obs)?;
    let mut lr = config.vqe_learning_rate;
    let mut iterations = 1;
    let max_norm = |g: &[f64]| g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    loop {
        let gn = max_norm(&grad);
        if gn < config.vqe_grad_tol {
            return Ok(VqeResult {
                theta,
                energy,
                grad_norm: gn,
                iterations,
                converged: true,
            });
        }
        if iterations >= config.vqe_max_iters || lr < 1e-14 {
            return Ok(VqeResult {
                theta,
                energy,
                grad_norm: gn,
                iterations,
                converged: false,
            });
        }
        let trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - lr * g).collect();
        let (e, g) = ev.energy_and_gradient(&trial, obs)?;
        iterations += 1;
        if e <= energy {
            theta = trial;
            energy = e;
            grad = g;
            lr = (lr * config.vqe_step_growth).min(config.vqe_max_step);
        } else {
            lr *= 0.5;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    BelowThreshold,
    MaxGates,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptStep {
    pub pool_index: usize,
    pub gate: Excitation,
    pub selection_gradient: f64,
    pub energy: f64,
    pub vqe_iterations: usize,
    pub vqe_converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptResult {
    pub circuit: Circuit,
    pub theta: Vec<f64>,
    pub energy: f64,
    pub reference_energy: f64,
    pub grad_norm: f64,
    pub history: Vec<AdaptStep>,
    pub stop: StopReason,
    /// Largest pool gradient at the final state.
    pub final_max_gradient: f64,
    /// True when every optimization met the gradient tolerance.
    pub converged: bool,
}

pub fn adapt_build(h: &PauliSum, pool: &GatePool, config: &AdaptConfig) -> Result<AdaptResult> {
    adapt_build_with(h, pool, config, Exec::default())
}

/// One gate per iteration (largest screening gradient), followed by a full
/// re-optimization of all parameters warm-started from the previous optimum.
pub fn adapt_build_with(h: &PauliSum, pool: &GatePool, config: &AdaptConfig, exec: Exec) -> Result<AdaptResult> {
    config.validate()?;
    if h.n_qubits() != pool.n_qubits {
        return Err(Error::QubitMismatch {
            expected: pool.n_qubits,
            found: h.n_qubits(),
        });
    }
    let support = Arc::new(pool.support()?);
    let mut circuit = pool.reference_circuit()?;
    let mut ev = Evaluator::with_support(&circuit, support.clone())?.with_exec(exec);
    let obs = ev.observable(h);
    let plans: Vec<GatePlan> = pool.gates.iter().map(|g| support.plan(g)).collect::<Result<_>>()?;
    let mut theta: Vec<f64> = Vec::new();
    let (reference_energy, _) = ev.energy_and_gradient(&theta, &obs)?;
    let mut energy = reference_energy;
    let mut grad_norm = 0.0;
    let mut history = Vec::new();
    let mut converged = true;
    loop {
        let psi = ev.state(&theta)?;
        let lambda = obs.apply(&psi);
        let grads = exec.map(&plans, |p| p.zero_angle_gradient(&lambda, &psi));
        let (best, mag) = if grads.is_empty() { (0, 0.0) } else { argmax_abs(&grads) };
        let stop = if mag < config.selection_threshold {
            Some(StopReason::BelowThreshold)
        } else if circuit.gates.len() >= config.max_gates {
            Some(StopReason::MaxGates)
        } else {
            None
        };
        if let Some(stop) = stop {
            let mut final_max_gradient = mag;
            if let (Some(tol), false) = (config.polish_grad_tol, theta.is_empty()) {
                let polish = AdaptConfig {
                    vqe_grad_tol: tol,
                    ..*config
                };
                let res = vqe_with(&ev, &obs, &theta, &polish)?;
                converged &= res.converged;
                theta = res.theta;
                energy = res.energy;
                grad_norm = res.grad_norm;
                let psi = ev.state(&theta)?;
                let lambda = obs.apply(&psi);
                let grads = exec.map(&plans, |p| p.zero_angle_gradient(&lambda, &psi));
                final_max_gradient = argmax_abs(&grads).1;
            }
            return Ok(AdaptResult {
                circuit,
                theta,
                energy,
                reference_energy,
                grad_norm,
                history,
                stop,
                final_max_gradient,
                converged,
            });
        }
        circuit.gates.push(pool.gates[best].clone());
        theta.push(0.0);
        ev = Evaluator::with_support(&circuit, support.clone())?.with_exec(exec);
        let res = vqe_with(&ev, &obs, &theta, config)?;
        converged &= res.converged;
        theta = res.theta;
        energy = res.energy;
        grad_norm = res.grad_norm;
        history.push(AdaptStep {
            pool_index: best,
            gate: pool.gates[best].clone(),
            selection_gradient: mag,
            energy,
            vqe_iterations: res.iterations,
            vqe_converged: res.converged,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use crate::simulator::prepare_reference;

    #[test]
    fn pool_sizes() {
        assert_eq!(build_pool(2, 2).unwrap().len(), 3);
        assert_eq!(build_pool(3, 2).unwrap().len(), 8);
        assert_eq!(build_pool(7, 6).unwrap().len(), 204);
        assert_eq!(build_pool(7, 10).unwrap().len(), 140);
        assert!(build_pool(4, 0).unwrap().is_empty());
        assert!(build_pool(2, 3).is_err());
        assert!(build_pool(2, 6).is_err());
    }

    #[test]
    fn pool_gates_conserve_spin() {
        let pool = build_pool(5, 4).unwrap();
        assert!(pool.gates.iter().all(Excitation::is_sz_conserving));
        let mut sorted = pool.gates.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), pool.len());
    }

    #[test]
    fn zero_hamiltonian_selects_first() {
        let pool = build_pool(2, 2).unwrap();
        let s = prepare_reference(4, &[0, 1]).unwrap();
        assert_eq!(select_next(&s, &pool, &PauliSum::zero(4)).unwrap(), (0, 0.0));
        let empty = build_pool(2, 0).unwrap();
        assert!(matches!(
            select_next(&s, &empty, &PauliSum::zero(4)),
            Err(Error::EmptyPool)
        ));
    }

    #[test]
    fn reference_ground_state_adds_nothing() {
        // number operators on the occupied qubits: reference is optimal
        let z: PauliString = "Z0".parse().unwrap();
        let z1: PauliString = "Z1".parse().unwrap();
        let h = PauliSum::from_terms(4, 0.0, [(z, 1.0), (z1, 1.0)]).unwrap();
        let pool = build_pool(2, 2).unwrap();
        let r = adapt_build(&h, &pool, &AdaptConfig::default()).unwrap();
        assert!(r.circuit.gates.is_empty());
        assert_eq!(r.stop, StopReason::BelowThreshold);
        assert!((r.energy + 2.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut c = AdaptConfig::default();
        assert!(c.validate().is_ok());
        c.vqe_learning_rate = 0.0;
        assert!(c.validate().is_err());
    }
}
