use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::gate::{Excitation, GateMap, GatePlan};
use super::observable::{inner, SparseObservable};
use super::state::StateVector;
use super::support::Support;
use super::Circuit;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::pauli::PauliSum;

/// Imaginary residue tolerated in expectation values.
pub const EXPVAL_IMAG_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Evaluates a fixed gate sequence on states confined to a [`Support`].
#[derive(Clone, Debug)]
pub struct Evaluator {
    support: Arc<Support>,
    reference_pos: usize,
    plans: Vec<GatePlan>,
    exec: Exec,
}

impl Evaluator {
    /// Support is the closure of the reference under the circuit's gates.
    pub fn new(circuit: &Circuit) -> Result<Self> {
        let support = Support::closure(circuit.n_qubits, &[circuit.reference_index()], &circuit.gates)?;
        Self::with_support(circuit, Arc::new(support))
    }

    pub fn with_support(circuit: &Circuit, support: Arc<Support>) -> Result<Self> {
        if support.n_qubits() != circuit.n_qubits {
            return Err(Error::QubitMismatch {
                expected: circuit.n_qubits,
                found: support.n_qubits(),
            });
        }
        let reference_pos = support
            .position(circuit.reference_index())
            .ok_or_else(|| Error::Dimension("reference state outside support".into()))?;
        let plans = circuit
            .gates
            .iter()
            .map(|g| support.plan(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            support,
            reference_pos,
            plans,
            exec: Exec::default(),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn n_params(&self) -> usize {
        self.plans.len()
    }

    pub fn observable(&self, h: &PauliSum) -> SparseObservable {
        SparseObservable::with_exec(h, &self.support, self.exec)
    }

    /// Plan for a gate outside the circuit (e.g. a pool candidate).
    pub fn plan(&self, gate: &Excitation) -> Result<GatePlan> {
        self.support.plan(gate)
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.plans.len() {
            return Err(Error::ParameterLength {
                expected: self.plans.len(),
                found: theta.len(),
            });
        }
        Ok(())
    }

    fn reference(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.support.dim()];
        v[self.reference_pos] = Complex64::new(1.0, 0.0);
        v
    }

    /// Output state as amplitudes over the support.
    pub fn state(&self, theta: &[f64]) -> Result<Vec<Complex64>> {
        self.check(theta)?;
        let mut v = self.reference();
        for (plan, &t) in self.plans.iter().zip(theta) {
            plan.apply_in_place(t, &mut v, GateMap::Forward);
        }
        Ok(v)
    }

    pub fn expand(&self, compact: &[Complex64]) -> Result<StateVector> {
        let mut amps = vec![ZERO; 1usize << self.support.n_qubits()];
        for (k, &b) in self.support.basis().iter().enumerate() {
            amps[b] = compact[k];
        }
        StateVector::from_amplitudes(self.support.n_qubits(), amps)
    }

    /// Amplitudes of `state` on the support (components outside are dropped).
    pub fn compress(&self, state: &StateVector) -> Vec<Complex64> {
        self.support.basis().iter().map(|&b| state.amplitudes()[b]).collect()
    }

    pub fn energy(&self, theta: &[f64], obs: &SparseObservable) -> Result<f64> {
        let v = self.state(theta)?;
        real_part(obs.expectation(&v), "expectation value")
    }

    pub fn gradient(&self, theta: &[f64], obs: &SparseObservable) -> Result<Vec<f64>> {
        Ok(self.gradients(theta, &[obs])?.remove(0))
    }

    /// Energy and gradient from one forward state and one backward sweep.
    pub fn energy_and_gradient(&self, theta: &[f64], obs: &SparseObservable) -> Result<(f64, Vec<f64>)> {
        let (mut e, g) = self.sweep(theta, &[obs])?;
        Ok((e.remove(0), g.into_iter().next().unwrap()))
    }

    /// Adjoint-mode gradients of several observables sharing one backward
    /// sweep over the state.
    pub fn gradients(&self, theta: &[f64], obs: &[&SparseObservable]) -> Result<Vec<Vec<f64>>> {
        Ok(self.sweep(theta, obs)?.1)
    }

    fn sweep(&self, theta: &[f64], obs: &[&SparseObservable]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        self.check(theta)?;
        let m = self.plans.len();
        let mut phi = self.state(theta)?;
        let mut lambdas: Vec<Vec<Complex64>> = obs.iter().map(|o| o.apply(&phi)).collect();
        let energies = lambdas
            .iter()
            .map(|l| real_part(inner(&phi, l), "expectation value"))
            .collect::<Result<Vec<f64>>>()?;
        let mut out = vec![vec![0.0; m]; obs.len()];
        let mut mu = vec![ZERO; phi.len()];
        for k in (0..m).rev() {
            let plan = &self.plans[k];
            plan.apply_in_place(theta[k], &mut phi, GateMap::Adjoint);
            plan.derivative_into(theta[k], &phi, &mut mu, GateMap::First);
            for (o, lambda) in lambdas.iter_mut().enumerate() {
                let mut g = ZERO;
                for &(p1, p0) in &plan.pairs {
                    let (p1, p0) = (p1 as usize, p0 as usize);
                    g += lambda[p1].conj() * mu[p1] + lambda[p0].conj() * mu[p0];
                }
                out[o][k] = 2.0 * g.re;
                plan.apply_in_place(theta[k], lambda, GateMap::Adjoint);
            }
        }
        Ok((energies, out))
    }

    /// Analytic `∂²⟨H⟩/∂θ_a∂θ_b`.
    pub fn param_hessian(&self, theta: &[f64], obs: &SparseObservable) -> Result<DMatrix<f64>> {
        self.check(theta)?;
        let m = self.plans.len();
        if m == 0 {
            return Ok(DMatrix::zeros(0, 0));
        }
        // forward states φ_a before gate a
        let mut phis = Vec::with_capacity(m);
        let mut v = self.reference();
        for (plan, &t) in self.plans.iter().zip(theta) {
            phis.push(v.clone());
            plan.apply_in_place(t, &mut v, GateMap::Forward);
        }
        let psi = v;
        // χ_b = U_{>b}† H ψ
        let mut chis = vec![Vec::new(); m];
        let mut lam = obs.apply(&psi);
        for b in (0..m).rev() {
            chis[b] = lam.clone();
            self.plans[b].apply_in_place(theta[b], &mut lam, GateMap::Adjoint);
        }

        // per a: ∂_a ψ and the row S[a][b] = ⟨χ_b| dG_b U_(a,b) dG_a φ_a⟩, b ≥ a
        let rows: Vec<(Vec<Complex64>, Vec<Complex64>)> = self.exec.map_range(m, |a| {
            let plan_a = &self.plans[a];
            let mut s_row = vec![ZERO; m];
            let mut tmp = vec![ZERO; psi.len()];
            plan_a.derivative_into(theta[a], &phis[a], &mut tmp, GateMap::Second);
            s_row[a] = inner(&chis[a], &tmp);
            let mut w = vec![ZERO; psi.len()];
            plan_a.derivative_into(theta[a], &phis[a], &mut w, GateMap::First);
            for b in a + 1..m {
                let plan_b = &self.plans[b];
                tmp.iter_mut().for_each(|x| *x = ZERO);
                plan_b.derivative_into(theta[b], &w, &mut tmp, GateMap::First);
                let mut acc = ZERO;
                for &(p1, p0) in &plan_b.pairs {
                    let (p1, p0) = (p1 as usize, p0 as usize);
                    acc += chis[b][p1].conj() * tmp[p1] + chis[b][p0].conj() * tmp[p0];
                }
                s_row[b] = acc;
                plan_b.apply_in_place(theta[b], &mut w, GateMap::Forward);
            }
            (w, s_row)
        });
        let dpsi: Vec<&Vec<Complex64>> = rows.iter().map(|r| &r.0).collect();
        let hdpsi: Vec<Vec<Complex64>> = self.exec.map(&dpsi, |d| obs.apply(d));
        let mut out = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let val = 2.0 * (inner(dpsi[a], &hdpsi[b]) + rows[a].1[b]).re;
                out[(a, b)] = val;
                out[(b, a)] = val;
            }
        }
        Ok(out)
    }

    /// Screening gradients `∂/∂θ ⟨ψ|G(θ)† D G(θ)|ψ⟩` at `θ = 0` for each
    /// appended candidate, given `λ = Dψ`.
    pub fn appended_gradients(&self, psi: &[Complex64], lambda: &[Complex64], candidates: &[GatePlan]) -> Vec<f64> {
        candidates.iter().map(|p| p.zero_angle_gradient(lambda, psi)).collect()
    }
}

pub(crate) fn real_part(z: Complex64, context: &str) -> Result<f64> {
    if z.im.abs() > EXPVAL_IMAG_TOLERANCE {
        return Err(Error::ImaginaryResidue {
            residue: z.im.abs(),
            context: context.into(),
        });
    }
    Ok(z.re)
}
