use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::sector::Sector;
use crate::simulator::{align_largest, inner, SparseObservable, StateVector, Support};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenConfig {
    /// Smallest accepted gap to the next eigenvalue (Hartree).
    pub degeneracy_tol: f64,
    /// Required `‖Hv − Ev‖`.
    pub residual_tol: f64,
    /// Subspace dimensions up to this size are diagonalized densely.
    pub dense_limit: usize,
    /// Krylov basis size before a restart.
    pub max_krylov: usize,
    pub max_restarts: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            degeneracy_tol: 1e-8,
            residual_tol: 1e-9,
            dense_limit: 400,
            max_krylov: 160,
            max_restarts: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactEigenpair {
    pub energy: f64,
    pub state: StateVector,
    /// Distance to the next eigenvalue in the searched subspace.
    pub gap: f64,
    pub residual: f64,
}

fn subspace(h: &PauliSum, sector: Option<&Sector>) -> Result<Support> {
    match sector {
        Some(s) => {
            if s.n_qubits != h.n_qubits() {
                return Err(Error::QubitMismatch {
                    expected: h.n_qubits(),
                    found: s.n_qubits,
                });
            }
            Support::sector(s)
        }
        None => Support::full(h.n_qubits()),
    }
}

pub fn exact_ground_state(h: &PauliSum, sector: Option<&Sector>) -> Result<ExactEigenpair> {
    exact_ground_state_with(h, sector, &EigenConfig::default())
}

/// Lowest eigenpair of `h`, restricted to `sector` when given. The state's
/// largest-magnitude amplitude is made real and positive.
pub fn exact_ground_state_with(h: &PauliSum, sector: Option<&Sector>, cfg: &EigenConfig) -> Result<ExactEigenpair> {
    let support = subspace(h, sector)?;
    let op = SparseObservable::new(h, &support);
    let (energy, gap, mut vec) = if support.dim() <= cfg.dense_limit {
        let (vals, vecs) = dense_eigh(&op.to_dense());
        let gap = if vals.len() > 1 {
            vals[1] - vals[0]
        } else {
            f64::INFINITY
        };
        (vals[0], gap, vecs.column(0).iter().copied().collect::<Vec<_>>())
    } else {
        lanczos(&op, cfg)?
    };
    align_largest(&mut vec);
    let hv = op.apply(&vec);
    let residual = hv
        .iter()
        .zip(&vec)
        .map(|(a, b)| (a - b * energy).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > cfg.residual_tol {
        return Err(Error::NoConvergence(format!("ground-state residual {residual:e}")));
    }
    if gap < cfg.degeneracy_tol {
        return Err(Error::Degenerate {
            gap,
            tolerance: cfg.degeneracy_tol,
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << h.n_qubits()];
    for (k, &b) in support.basis().iter().enumerate() {
        amps[b] = vec[k];
    }
    Ok(ExactEigenpair {
        energy,
        state: StateVector::from_amplitudes(h.n_qubits(), amps)?,
        gap,
        residual,
    })
}

/// Full spectrum on a dense subspace: ascending eigenvalues and the
/// corresponding eigenvectors as full statevectors (largest amplitude real
/// positive).
pub fn full_spectrum(h: &PauliSum, sector: Option<&Sector>, cfg: &EigenConfig) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let support = subspace(h, sector)?;
    if support.dim() > cfg.dense_limit.max(4096) {
        return Err(Error::Dimension(format!(
            "subspace of dimension {} is too large for a full spectrum",
            support.dim()
        )));
    }
    let op = SparseObservable::new(h, &support);
    let (vals, vecs) = dense_eigh(&op.to_dense());
    let mut states = Vec::with_capacity(vals.len());
    for k in 0..vals.len() {
        let mut col: Vec<Complex64> = vecs.column(k).iter().copied().collect();
        align_largest(&mut col);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << h.n_qubits()];
        for (i, &b) in support.basis().iter().enumerate() {
            amps[b] = col[i];
        }
        states.push(StateVector::from_amplitudes(h.n_qubits(), amps)?);
    }
    Ok((vals, states))
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub(crate) fn dense_eigh(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Restarted Lanczos with full reorthogonalization. Returns the lowest Ritz
/// value, its gap to the second Ritz value, and the Ritz vector.
fn lanczos(op: &SparseObservable, cfg: &EigenConfig) -> Result<(f64, f64, Vec<Complex64>)> {
    let dim = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut start: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
        .collect();
    normalize(&mut start);
    let m_max = cfg.max_krylov.min(dim);
    let mut last = (f64::NAN, f64::NAN);
    for _ in 0..=cfg.max_restarts {
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz = None;
        for j in 0..m_max {
            let mut w = op.apply(&basis[j]);
            let a = inner(&basis[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                for v in &basis {
                    let c = inner(v, &w);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= y * c);
                }
            }
            let b = normalize(&mut w);
            let exhausted = b < 1e-12 * a.abs().max(1.0) || j + 1 == m_max;
            if (j + 1) % 10 == 0 || exhausted {
                let (vals, vecs) = tridiag_eigh(&alpha, &beta);
                let resid = (b * vecs[(j, 0)]).abs();
                let gap = if vals.len() > 1 {
                    vals[1] - vals[0]
                } else {
                    f64::INFINITY
                };
                ritz = Some((vals[0], gap, vecs.column(0).into_owned()));
                if resid < 0.1 * cfg.residual_tol || exhausted {
                    break;
                }
            }
            beta.push(b);
            basis.push(w);
        }
        let (val, gap, y) = ritz.expect("at least one Ritz evaluation");
        let mut x = vec![Complex64::new(0.0, 0.0); dim];
        for (k, v) in basis.iter().enumerate().take(y.len()) {
            x.iter_mut().zip(v).for_each(|(a, b)| *a += b * y[k]);
        }
        normalize(&mut x);
        let hx = op.apply(&x);
        let e = inner(&x, &hx).re;
        let res = hx
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b * e).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if res < cfg.residual_tol {
            debug_assert!((val - e).abs() < 1e-6);
            return Ok((e, gap, x));
        }
        last = (e, res);
        start = x;
    }
    Err(Error::NoConvergence(format!(
        "Lanczos stalled at energy {} with residual {:e}",
        last.0, last.1
    )))
}

fn tridiag_eigh(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let n = alpha.len();
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = alpha[i];
        if i + 1 < n {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}
