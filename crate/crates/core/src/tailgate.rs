//! Gate screening against Hamiltonian derivatives and zero-angle tails.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adapt::GatePool;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamgrid::{DisplacementLabel, HamiltonianFamily};
use crate::pauli::PauliSum;
use crate::simulator::{Circuit, Evaluator, Excitation, Support};

#[derive(Clone, Debug)]
pub struct DerivativeMember {
    /// Sorted multiset of differentiated coordinates; empty for `H(R₀)`.
    pub coords: Vec<usize>,
    pub operator: PauliSum,
}

/// `H(R₀)` and every partial derivative of `H` at `R₀` up to `order`.
#[derive(Clone, Debug)]
pub struct DerivativeSet {
    pub order: usize,
    pub members: Vec<DerivativeMember>,
}

impl DerivativeSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn from_members(order: usize, members: Vec<DerivativeMember>) -> Self {
        Self { order, members }
    }
}

/// Sorted multisets over `0..n_coords` of sizes `0..=order`, by size then
/// lexicographically.
pub fn multi_indices(n_coords: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..order {
        let mut next = Vec::new();
        for m in &frontier {
            for c in m.last().copied().unwrap_or(0)..n_coords {
                let mut e = m.clone();
                e.push(c);
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Derivative set for target energy-derivative order `n`: Hamiltonian
/// derivatives up to order `n − 1`.
pub fn build_derivative_set<F: HamiltonianFamily + ?Sized>(
    family: &F,
    target_order: usize,
    exec: Exec,
) -> Result<DerivativeSet> {
    if target_order == 0 {
        return Err(Error::Order(0));
    }
    let order = target_order - 1;
    let indices = multi_indices(family.n_coords(), order);
    let ops = exec.try_map(&indices, |m| {
        if m.is_empty() {
            family.hamiltonian(&DisplacementLabel::base())
        } else {
            family.derivative(m)
        }
    })?;
    let members = indices
        .into_iter()
        .zip(ops)
        .map(|(coords, operator)| DerivativeMember { coords, operator })
        .collect();
    Ok(DerivativeSet { order, members })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenEntry {
    pub pool_index: usize,
    pub gate: Excitation,
    /// Largest `|gradient|` over the derivative set.
    pub max_gradient: f64,
    /// Multi-index of the derivative attaining it.
    pub trigger: Vec<usize>,
    pub selected: bool,
    /// Signed gradient per derivative-set member, in member order.
    pub gradients: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub epsilon: f64,
    pub entries: Vec<ScreenEntry>,
}

impl ScreeningReport {
    /// Pool indices of selected gates, in pool order.
    pub fn selected(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| e.selected)
            .map(|e| e.pool_index)
            .collect()
    }

    /// Same gradients, reselected at a different threshold.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let mut r = self.clone();
        r.epsilon = epsilon;
        for e in &mut r.entries {
            e.selected = e.max_gradient > epsilon;
        }
        r
    }
}

fn screening_support(head: &Circuit, extra: &[Excitation]) -> Result<Support> {
    let mut gates = head.gates.clone();
    gates.extend_from_slice(extra);
    Support::closure(head.n_qubits, &[head.reference_index()], &gates)
}

/// Gradients `∂/∂θ ⟨ψ|G_a(θ)† D G_a(θ)|ψ⟩|₀` with `ψ = U(θ*)|ref⟩`, for
/// every pool gate and derivative-set member. A gate is selected when any
/// magnitude exceeds `epsilon`.
pub fn screen_gates(
    head: &Circuit,
    theta: &[f64],
    pool: &GatePool,
    derivs: &DerivativeSet,
    epsilon: f64,
    exec: Exec,
) -> Result<ScreeningReport> {
    if pool.n_qubits != head.n_qubits {
        return Err(Error::QubitMismatch {
            expected: head.n_qubits,
            found: pool.n_qubits,
        });
    }
    if let Some(m) = derivs.members.iter().find(|m| m.operator.n_qubits() != head.n_qubits) {
        return Err(Error::QubitMismatch {
            expected: head.n_qubits,
            found: m.operator.n_qubits(),
        });
    }
    let support = Arc::new(screening_support(head, &pool.gates)?);
    let ev = Evaluator::with_support(head, support.clone())?.with_exec(exec);
    let psi = ev.state(theta)?;
    let lambdas = exec.map(&derivs.members, |m| ev.observable(&m.operator).apply(&psi));
    let plans = pool.gates.iter().map(|g| support.plan(g)).collect::<Result<Vec<_>>>()?;
    let entries = exec.map_range(plans.len(), |a| {
        let gradients: Vec<f64> = lambdas.iter().map(|l| plans[a].zero_angle_gradient(l, &psi)).collect();
        let mut best = (0.0, Vec::new());
        for (g, m) in gradients.iter().zip(&derivs.members) {
            if g.abs() > best.0 {
                best = (g.abs(), m.coords.clone());
            }
        }
        ScreenEntry {
            pool_index: a,
            gate: pool.gates[a].clone(),
            max_gradient: best.0,
            trigger: best.1,
            selected: best.0 > epsilon,
            gradients,
        }
    });
    Ok(ScreeningReport { epsilon, entries })
}

/// Optimized head followed by tail gates held at zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailgatedCircuit {
    pub head: Circuit,
    pub head_theta: Vec<f64>,
    pub tail: Vec<Excitation>,
    pub report: Option<ScreeningReport>,
}

impl TailgatedCircuit {
    pub fn n_head(&self) -> usize {
        self.head.gates.len()
    }

    /// Head and tail as one circuit.
    pub fn circuit(&self) -> Circuit {
        let mut gates = self.head.gates.clone();
        gates.extend(self.tail.iter().cloned());
        self.head.with_gates(gates)
    }

    /// `(θ*, 0, …, 0)`.
    pub fn theta(&self) -> Vec<f64> {
        let mut t = self.head_theta.clone();
        t.resize(self.head_theta.len() + self.tail.len(), 0.0);
        t
    }

    /// Same circuit with the tail reordered by `order` (a permutation of
    /// tail positions).
    pub fn with_tail_order(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.tail.len()];
        if order.len() != self.tail.len()
            || order
                .iter()
                .any(|&k| k >= seen.len() || std::mem::replace(&mut seen[k], true))
        {
            return Err(Error::Config("tail order is not a permutation".into()));
        }
        let mut out = self.clone();
        out.tail = order.iter().map(|&k| self.tail[k].clone()).collect();
        Ok(out)
    }
}

/// Appends the selected pool gates (pool order) at zero angle.
pub fn tailgate(
    head: &Circuit,
    head_theta: &[f64],
    pool: &GatePool,
    report: &ScreeningReport,
) -> Result<TailgatedCircuit> {
    if head_theta.len() != head.gates.len() {
        return Err(Error::ParameterLength {
            expected: head.gates.len(),
            found: head_theta.len(),
        });
    }
    let tail = report
        .selected()
        .into_iter()
        .map(|k| {
            pool.gates
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Config(format!("selected gate {k} outside the pool")))
        })
        .collect::<Result<Vec<_>>>()?;
    for g in &tail {
        g.check_register(head.n_qubits)?;
    }
    Ok(TailgatedCircuit {
        head: head.clone(),
        head_theta: head_theta.to_vec(),
        tail,
        report: Some(report.clone()),
    })
}

/// `Δ_a(R₀)` and `∂Δ_a/∂R_j`: the zero-angle gradient of `gate` appended
/// to the optimized head, against `H(R₀)` and against `∂H/∂R_j`.
pub fn delta_curve<F: HamiltonianFamily + ?Sized>(
    head: &Circuit,
    theta: &[f64],
    gate: &Excitation,
    family: &F,
    coord: usize,
) -> Result<(f64, f64)> {
    if coord >= family.n_coords() {
        return Err(Error::Config(format!("coordinate {coord} out of range")));
    }
    let support = screening_support(head, std::slice::from_ref(gate))?;
    let ev = Evaluator::with_support(head, Arc::new(support))?;
    let psi = ev.state(theta)?;
    let plan = ev.plan(gate)?;
    let h0 = family.hamiltonian(&DisplacementLabel::base())?;
    let dh = family.derivative(&[coord])?;
    let g0 = plan.zero_angle_gradient(&ev.observable(&h0).apply(&psi), &psi);
    let g1 = plan.zero_angle_gradient(&ev.observable(&dh).apply(&psi), &psi);
    Ok((g0, g1))
}
