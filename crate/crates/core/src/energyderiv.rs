//! Analytic nuclear energy derivatives of a variational circuit: the
//! Feynman–Hellmann gradient and the response-based Hessian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamgrid::{hex, DisplacementLabel, HamiltonianFamily};
use crate::pauli::PauliSum;
use crate::simulator::{Circuit, Evaluator, SparseObservable};
use crate::tailgate::TailgatedCircuit;

/// Relative singular-value cutoff for the response solve.
pub const RESPONSE_CUTOFF: f64 = 1e-10;
/// Pre-symmetrization asymmetry above which a Hessian is flagged.
pub const ASYMMETRY_WARNING: f64 = 1e-4;

/// `⟨ψ(θ)|∂H/∂R_i|ψ(θ)⟩` for every coordinate (Hartree/Bohr).
pub fn energy_gradient<F: HamiltonianFamily + ?Sized>(
    circuit: &Circuit,
    theta: &[f64],
    family: &F,
    exec: Exec,
) -> Result<Vec<f64>> {
    let ev = Evaluator::new(circuit)?.with_exec(exec);
    let ops = first_derivatives(family, exec)?;
    let psi = ev.state(theta)?;
    exec.try_map(&ops, |op| {
        crate::simulator::real_part(ev.observable(op).expectation(&psi), "energy gradient")
    })
}

/// `∂/∂θ_b ⟨ψ(θ)|∂H/∂R_coord|ψ(θ)⟩` for every parameter.
pub fn mixed_gradient<F: HamiltonianFamily + ?Sized>(
    circuit: &Circuit,
    theta: &[f64],
    family: &F,
    coord: usize,
) -> Result<Vec<f64>> {
    if coord >= family.n_coords() {
        return Err(Error::Config(format!("coordinate {coord} out of range")));
    }
    let ev = Evaluator::new(circuit)?;
    ev.gradient(theta, &ev.observable(&family.derivative(&[coord])?))
}

fn first_derivatives<F: HamiltonianFamily + ?Sized>(family: &F, exec: Exec) -> Result<Vec<PauliSum>> {
    let coords: Vec<usize> = (0..family.n_coords()).collect();
    exec.try_map(&coords, |&c| family.derivative(&[c]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResponseSolution {
    /// `∂θ*_a/∂R_i`, M×N (radian/Bohr).
    pub dtheta_dr: DMatrix<f64>,
    /// `‖A x_i + r_i‖` per coordinate.
    pub residuals: Vec<f64>,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Minimum-norm least-squares solution of `A x_i = −r_i` for every column
/// `r_i` of `rhs` (M×N), discarding singular values below
/// `σ_max · rel_cutoff`.
pub fn solve_response(param_hessian: &DMatrix<f64>, rhs: &DMatrix<f64>, rel_cutoff: f64) -> Result<ResponseSolution> {
    let m = param_hessian.nrows();
    if param_hessian.ncols() != m || rhs.nrows() != m {
        return Err(Error::Dimension(format!(
            "response system {}×{} with right-hand side {}×{}",
            m,
            param_hessian.ncols(),
            rhs.nrows(),
            rhs.ncols()
        )));
    }
    let n = rhs.ncols();
    if m == 0 {
        return Ok(ResponseSolution {
            dtheta_dr: DMatrix::zeros(0, n),
            residuals: vec![0.0; n],
            rank: 0,
            singular_values: Vec::new(),
        });
    }
    let svd = param_hessian.clone().svd(true, true);
    let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let sigma = &svd.singular_values;
    let smax = sigma.max();
    let keep: Vec<usize> = (0..sigma.len())
        .filter(|&k| sigma[k] > smax * rel_cutoff && sigma[k] > 0.0)
        .collect();
    let mut x = DMatrix::zeros(m, n);
    for i in 0..n {
        let r = rhs.column(i);
        let mut xi = DVector::zeros(m);
        for &k in &keep {
            let coef = -u.column(k).dot(&r) / sigma[k];
            xi += vt.row(k).transpose() * coef;
        }
        x.set_column(i, &xi);
    }
    let residuals = (0..n)
        .map(|i| (param_hessian * x.column(i) + rhs.column(i)).norm())
        .collect();
    let mut singular_values: Vec<f64> = sigma.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(ResponseSolution {
        dtheta_dr: x,
        residuals,
        rank: keep.len(),
        singular_values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianMeta {
    /// SHA-256 of the circuit structure and parameters.
    pub circuit_hash: String,
    pub grid_hash: Option<String>,
    /// Screening threshold used to build the tail, if known.
    pub epsilon: Option<f64>,
    /// Finite-difference step of the Hamiltonian derivatives (Bohr).
    pub step: f64,
    pub n_head: usize,
    pub n_tail: usize,
    pub response_rank: usize,
    pub max_response_residual: f64,
    /// Max-norm of `∂E/∂θ` at the evaluation point.
    pub parameter_gradient_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HessianResult {
    /// Symmetrized Hessian (Hartree/Bohr²).
    pub matrix: DMatrix<f64>,
    /// `max |H_ij − H_ji|` before symmetrization.
    pub asymmetry: f64,
    /// Feynman–Hellmann gradient (Hartree/Bohr).
    pub gradient: Vec<f64>,
    pub energy: f64,
    pub meta: HessianMeta,
}

impl HessianResult {
    pub fn warning(&self) -> bool {
        self.asymmetry > ASYMMETRY_WARNING
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HessianOptions {
    pub rel_cutoff: f64,
    pub exec: Exec,
}

impl Default for HessianOptions {
    fn default() -> Self {
        Self {
            rel_cutoff: RESPONSE_CUTOFF,
            exec: Exec::default(),
        }
    }
}

pub fn circuit_hash(circuit: &Circuit, theta: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(circuit).expect("circuit serializes"));
    for t in theta {
        h.update(t.to_le_bytes());
    }
    hex(&h.finalize())
}

/// `H_ij = Σ_a (∂θ*_a/∂R_i) ∂/∂θ_a⟨∂H/∂R_j⟩ + ⟨∂²H/∂R_i∂R_j⟩` with head
/// and tail parameters treated alike.
pub fn hessian<F: HamiltonianFamily + ?Sized>(tailgated: &TailgatedCircuit, family: &F) -> Result<HessianResult> {
    hessian_with(tailgated, family, &HessianOptions::default())
}

pub fn hessian_with<F: HamiltonianFamily + ?Sized>(
    tailgated: &TailgatedCircuit,
    family: &F,
    opts: &HessianOptions,
) -> Result<HessianResult> {
    let circuit = tailgated.circuit();
    let theta = tailgated.theta();
    if circuit.n_qubits != family.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: family.n_qubits(),
            found: circuit.n_qubits,
        });
    }
    let exec = opts.exec;
    let n = family.n_coords();
    let ev = Evaluator::new(&circuit)?.with_exec(exec);

    let h0 = family.hamiltonian(&DisplacementLabel::base())?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let first = first_derivatives(family, exec)?;
    let second = exec.try_map(&pairs, |&(i, j)| family.derivative(&[i, j]))?;

    let obs0 = ev.observable(&h0);
    let first_obs: Vec<SparseObservable> = exec.map(&first, |op| ev.observable(op));
    let second_obs: Vec<SparseObservable> = exec.map(&second, |op| ev.observable(op));

    let (energy, grad_theta) = ev.energy_and_gradient(&theta, &obs0)?;
    let a = ev.param_hessian(&theta, &obs0)?;
    let refs: Vec<&SparseObservable> = first_obs.iter().collect();
    let mixed = ev.gradients(&theta, &refs)?;
    let m = theta.len();
    let rhs = DMatrix::from_fn(m, n, |b, i| mixed[i][b]);
    let resp = solve_response(&a, &rhs, opts.rel_cutoff)?;

    let psi = ev.state(&theta)?;
    let expect = |o: &SparseObservable| crate::simulator::real_part(o.expectation(&psi), "Hessian expectation");
    let gradient = first_obs.iter().map(expect).collect::<Result<Vec<_>>>()?;
    let second_vals = second_obs.iter().map(expect).collect::<Result<Vec<_>>>()?;

    let mut raw = DMatrix::zeros(n, n);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let resp_ij = resp.dtheta_dr.column(i).dot(&rhs.column(j));
        let resp_ji = resp.dtheta_dr.column(j).dot(&rhs.column(i));
        raw[(i, j)] = resp_ij + second_vals[k];
        raw[(j, i)] = resp_ji + second_vals[k];
    }
    let asymmetry = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(0.0f64, |mx, (i, j)| mx.max((raw[(i, j)] - raw[(j, i)]).abs()));
    let matrix = (&raw + raw.transpose()) * 0.5;
    let meta = HessianMeta {
        circuit_hash: circuit_hash(&circuit, &theta),
        grid_hash: family.content_hash(),
        epsilon: tailgated.report.as_ref().map(|r| r.epsilon),
        step: family.step(),
        n_head: tailgated.n_head(),
        n_tail: tailgated.tail.len(),
        response_rank: resp.rank,
        max_response_residual: resp.residuals.iter().fold(0.0, |mx, r| mx.max(*r)),
        parameter_gradient_norm: grad_theta.iter().fold(0.0, |mx, g| mx.max(g.abs())),
    };
    Ok(HessianResult {
        matrix,
        asymmetry,
        gradient,
        energy,
        meta,
    })
}
