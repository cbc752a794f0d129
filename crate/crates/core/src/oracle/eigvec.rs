use nalgebra::DMatrix;
use num_complex::Complex64;

use super::eigen::{dense_eigh, EigenConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamgrid::HamiltonianFamily;
use crate::pauli::PauliSum;
use crate::sector::Sector;
use crate::simulator::{align_largest, inner, real_part, SparseObservable, StateVector, Support};

/// Eigenpair `index` of `h` and the first-order change of its eigenvector
/// along `dh`:
///
/// `∂v_i = Σ_{j≠i} ⟨v_j|dh|v_i⟩ / (λ_i − λ_j) · v_j`,
///
/// which is orthogonal to `v_i`. Eigenvectors carry the largest-amplitude
/// phase convention.
pub fn eigvec_derivative_dense(
    h: &DMatrix<Complex64>,
    dh: &DMatrix<Complex64>,
    index: usize,
    degeneracy_tol: f64,
) -> Result<(f64, Vec<Complex64>, Vec<Complex64>)> {
    let n = h.nrows();
    if h.ncols() != n || dh.shape() != h.shape() {
        return Err(Error::Dimension(
            "eigenvector derivative needs square matrices of equal size".into(),
        ));
    }
    if index >= n {
        return Err(Error::Dimension(format!(
            "eigenpair {index} of a {n}-dimensional matrix"
        )));
    }
    let (vals, vecs) = dense_eigh(h);
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|k| vecs.column(k).iter().copied().collect()).collect();
    for c in &mut cols {
        align_largest(c);
    }
    let li = vals[index];
    for (j, &lj) in vals.iter().enumerate() {
        if j != index && (li - lj).abs() < degeneracy_tol {
            return Err(Error::Degenerate {
                gap: (li - lj).abs(),
                tolerance: degeneracy_tol,
            });
        }
    }
    let vi = &cols[index];
    let dvi: Vec<Complex64> = (0..n).map(|r| (0..n).map(|c| dh[(r, c)] * vi[c]).sum()).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, vj) in cols.iter().enumerate() {
        if j == index {
            continue;
        }
        let coef = inner(vj, &dvi) / (li - vals[j]);
        out.iter_mut().zip(vj).for_each(|(o, x)| *o += x * coef);
    }
    Ok((li, cols[index].clone(), out))
}

fn subspace(n_qubits: usize, sector: Option<&Sector>) -> Result<Support> {
    match sector {
        Some(s) => Support::sector(s),
        None => Support::full(n_qubits),
    }
}

/// [`eigvec_derivative_dense`] for Pauli operators, optionally restricted to
/// a particle sector. Returns the eigenvector derivative as a full
/// statevector.
pub fn eigvec_derivative(h: &PauliSum, dh: &PauliSum, index: usize, sector: Option<&Sector>) -> Result<StateVector> {
    Ok(eigvec_derivative_full(h, dh, index, sector)?.2)
}

/// Eigenvalue, eigenvector and eigenvector derivative as full statevectors.
pub fn eigvec_derivative_full(
    h: &PauliSum,
    dh: &PauliSum,
    index: usize,
    sector: Option<&Sector>,
) -> Result<(f64, StateVector, StateVector)> {
    if dh.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            found: dh.n_qubits(),
        });
    }
    let support = subspace(h.n_qubits(), sector)?;
    let cfg = EigenConfig::default();
    if support.dim() > cfg.dense_limit.max(4096) {
        return Err(Error::Dimension(format!(
            "subspace of dimension {} is too large for a full spectrum",
            support.dim()
        )));
    }
    let hm = SparseObservable::with_exec(h, &support, Exec::Sequential).to_dense();
    let dm = SparseObservable::with_exec(dh, &support, Exec::Sequential).to_dense();
    let (e, v, dv) = eigvec_derivative_dense(&hm, &dm, index, cfg.degeneracy_tol)?;
    let expand = |c: &[Complex64]| {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << h.n_qubits()];
        for (k, &b) in support.basis().iter().enumerate() {
            amps[b] = c[k];
        }
        StateVector::from_amplitudes(h.n_qubits(), amps)
    };
    Ok((e, expand(&v)?, expand(&dv)?))
}

/// `⟨ψ|∂²H/∂R_i∂R_j|ψ⟩ + 2 Re⟨ψ|∂H/∂R_i|∂ψ/∂R_j⟩` on the exact ground state
/// at `R₀`.
pub fn second_derivative_via_states<F: HamiltonianFamily + ?Sized>(family: &F, i: usize, j: usize) -> Result<f64> {
    let n = family.n_coords();
    if i >= n || j >= n {
        return Err(Error::Config(format!("coordinate pair ({i}, {j}) out of range")));
    }
    let h = family.hamiltonian(&crate::hamgrid::DisplacementLabel::base())?;
    let di = family.derivative(&[i])?;
    let dj = family.derivative(&[j])?;
    let dij = family.derivative(&[i, j])?;
    let sector = family.sector();
    let (_, psi, dpsi) = eigvec_derivative_full(&h, &dj, 0, sector.as_ref())?;
    let amps = psi.amplitudes();
    let second = real_part(dij.expectation(amps), "second-derivative expectation")?;
    let cross = inner(&di.apply(amps), dpsi.amplitudes());
    Ok(second + 2.0 * cross.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn zero_perturbation_gives_zero() {
        let h = PauliSum::from_terms(2, 0.0, [(ps("Z0"), 1.0), (ps("X0 X1"), 0.3), (ps("Z1"), 0.4)]).unwrap();
        let d = eigvec_derivative(&h, &PauliSum::zero(2), 0, None).unwrap();
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn two_level_closed_form() {
        // H = Z + t X: ground state (−sin(φ/2), cos(φ/2)) with tan φ = t;
        // d/dt at t = 0 has magnitude 1/2 on |0⟩
        let h = PauliSum::from_terms(1, 0.0, [(ps("Z0"), 1.0)]).unwrap();
        let dh = PauliSum::from_terms(1, 0.0, [(ps("X0"), 1.0)]).unwrap();
        let (e, v, dv) = eigvec_derivative_full(&h, &dh, 0, None).unwrap();
        assert!((e + 1.0).abs() < 1e-15);
        assert!((v.amplitudes()[1].re - 1.0).abs() < 1e-15);
        assert!((dv.amplitudes()[0].norm() - 0.5).abs() < 1e-14);
        assert!(v.inner(&dv).unwrap().norm() < 1e-15);
    }

    #[test]
    fn degenerate_pair_rejected() {
        let h = PauliSum::from_terms(2, 0.0, [(ps("Z0"), 1.0)]).unwrap();
        let dh = PauliSum::from_terms(2, 0.0, [(ps("X1"), 1.0)]).unwrap();
        assert!(matches!(
            eigvec_derivative(&h, &dh, 0, None),
            Err(Error::Degenerate { .. })
        ));
    }
}
