use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use super::eigen::exact_ground_state;
use crate::adapt::{vqe_with, AdaptConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamgrid::{DisplacementLabel, HamiltonianFamily, TaylorFamily};
use crate::pauli::PauliSum;
use crate::sector::Sector;
use crate::simulator::{inner, Circuit, Evaluator, Support};

/// A one-parameter line of Hamiltonians `H(R₀ + δ·e)`.
pub trait ScanLine: Sync {
    fn n_qubits(&self) -> usize;
    fn sector(&self) -> Option<Sector>;
    fn hamiltonian(&self, delta: f64) -> Result<PauliSum>;
}

/// Grid points along an integer direction label; `δ` must be a multiple
/// of the grid step and moves each displaced coordinate by `δ` per unit
/// step in the label.
pub struct GridLine<'a, F: HamiltonianFamily + ?Sized> {
    pub family: &'a F,
    pub direction: DisplacementLabel,
}

impl<F: HamiltonianFamily + ?Sized> ScanLine for GridLine<'_, F> {
    fn n_qubits(&self) -> usize {
        self.family.n_qubits()
    }

    fn sector(&self) -> Option<Sector> {
        self.family.sector()
    }

    fn hamiltonian(&self, delta: f64) -> Result<PauliSum> {
        let k = (delta / self.family.step()).round();
        if (k * self.family.step() - delta).abs() > 1e-9 {
            return Err(Error::MissingPoint(format!(
                "δ = {delta} is not a multiple of the grid step {}",
                self.family.step()
            )));
        }
        let label = self.direction.scaled(k as i32);
        if !self.family.has_point(&label) {
            return Err(Error::MissingPoint(label.to_string()));
        }
        self.family.hamiltonian(&label)
    }
}

/// Truncated Taylor Hamiltonians at arbitrary `δ` along a real direction.
pub struct TaylorLine<'a> {
    pub family: &'a TaylorFamily,
    pub direction: Vec<f64>,
}

impl ScanLine for TaylorLine<'_> {
    fn n_qubits(&self) -> usize {
        HamiltonianFamily::n_qubits(self.family)
    }

    fn sector(&self) -> Option<Sector> {
        HamiltonianFamily::sector(self.family)
    }

    fn hamiltonian(&self, delta: f64) -> Result<PauliSum> {
        let d: Vec<f64> = self.direction.iter().map(|x| x * delta).collect();
        self.family.at_displacement(&d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub delta: f64,
    pub fidelity: f64,
    /// Central difference over neighbouring samples (one-sided at the ends).
    pub dfidelity: f64,
    pub energy: f64,
    pub exact_energy: f64,
    pub vqe_converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityCurve {
    pub points: Vec<ScanPoint>,
}

impl FidelityCurve {
    pub fn max_abs_derivative(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.dfidelity.abs()))
    }

    pub fn endpoint_derivatives(&self) -> (f64, f64) {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => (a.dfidelity, b.dfidelity),
            _ => (0.0, 0.0),
        }
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.vqe_converged)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,fidelity,dfidelity_ddelta,energy,exact_energy,vqe_converged\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{:.12},{:.10e},{:.12},{:.12},{}",
                p.delta, p.fidelity, p.dfidelity, p.energy, p.exact_energy, p.vqe_converged
            );
        }
        s
    }
}

/// Circuit with starting parameters, re-optimized at every sample or held
/// fixed.
#[derive(Clone, Debug)]
pub struct ScanCircuit {
    pub circuit: Circuit,
    pub theta: Vec<f64>,
    pub reoptimize: bool,
}

/// `|⟨ψ(δ)|ψ₀(δ)⟩|²` along a line, with `ψ(δ)` the circuit state
/// (re-optimized by VQE from `theta` when requested) and `ψ₀(δ)` the exact
/// ground state.
pub fn fidelity_scan<L: ScanLine + ?Sized>(
    circuit: &ScanCircuit,
    line: &L,
    deltas: &[f64],
    config: &AdaptConfig,
    exec: Exec,
) -> Result<FidelityCurve> {
    if circuit.circuit.n_qubits != line.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: line.n_qubits(),
            found: circuit.circuit.n_qubits,
        });
    }
    let mut order: Vec<usize> = (0..deltas.len()).collect();
    order.sort_by(|&a, &b| deltas[a].total_cmp(&deltas[b]));
    let sorted: Vec<f64> = order.iter().map(|&k| deltas[k]).collect();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("repeated δ sample".into()));
    }
    let c = &circuit.circuit;
    let support = Arc::new(Support::closure(c.n_qubits, &[c.reference_index()], &c.gates)?);
    let ev = Evaluator::with_support(c, support)?.with_exec(Exec::Sequential);
    let sector = line.sector();
    let samples = exec.try_map(&sorted, |&delta| -> Result<(f64, f64, f64, bool)> {
        let h = line.hamiltonian(delta)?;
        let exact = exact_ground_state(&h, sector.as_ref())?;
        let obs = ev.observable(&h);
        let (theta, energy, converged) = if circuit.reoptimize {
            let r = vqe_with(&ev, &obs, &circuit.theta, config)?;
            (r.theta, r.energy, r.converged)
        } else {
            (circuit.theta.clone(), ev.energy(&circuit.theta, &obs)?, true)
        };
        let psi = ev.state(&theta)?;
        let fid = inner(&ev.compress(&exact.state), &psi).norm_sqr();
        Ok((fid, energy, exact.energy, converged))
    })?;
    let n = sorted.len();
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let (lo, hi) = (k.saturating_sub(1), (k + 1).min(n - 1));
        let dfidelity = if hi > lo {
            (samples[hi].0 - samples[lo].0) / (sorted[hi] - sorted[lo])
        } else {
            0.0
        };
        let (fidelity, energy, exact_energy, vqe_converged) = samples[k];
        points.push(ScanPoint {
            delta: sorted[k],
            fidelity,
            dfidelity,
            energy,
            exact_energy,
            vqe_converged,
        });
    }
    Ok(FidelityCurve { points })
}

/// `n` evenly spaced samples from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-0.3, 0.3, 25);
        assert_eq!(v.len(), 25);
        assert!((v[0] + 0.3).abs() < 1e-15 && (v[24] - 0.3).abs() < 1e-15);
        assert!(v[12].abs() < 1e-15);
        assert_eq!(linspace(0.0, 1.0, 1), vec![0.0]);
    }
}
