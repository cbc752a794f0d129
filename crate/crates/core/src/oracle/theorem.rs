use serde::Serialize;

use super::eigen::exact_ground_state;
use super::fd::{fd_scalar, FdDerivative};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamgrid::{DisplacementLabel, HamiltonianFamily, TaylorFamily};
use crate::simulator::real_part;

/// Multiple of the combined error bounds allowed between the two sides.
pub const THEOREM_TOLERANCE_FACTOR: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremEntry {
    pub coords: Vec<usize>,
    pub order: usize,
    /// Derivative of the exact ground energy `E(R)` of `H(R)`.
    pub exact: FdDerivative,
    /// Derivative of `C(R) = ⟨φ(R)|H(R)|φ(R)⟩`, `φ(R)` the ground state of
    /// the truncated expansion `H_{n−1}(R)`. For `n = 1`, `p = 1` this is
    /// the Feynman–Hellmann value `⟨ψ₀|∂H|ψ₀⟩` (no finite difference).
    pub truncated_state: FdDerivative,
    /// Derivative of the ground energy of `H_{n−1}(R)` itself (reported
    /// only; it omits the `⟨∂ᵖH⟩` contributions of the dropped terms).
    pub truncated_energy: FdDerivative,
    pub difference: f64,
    pub tolerance: f64,
    pub within: bool,
    /// True for `p ≤ n`, where agreement is predicted.
    pub predicted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub n: usize,
    pub step: f64,
    pub entries: Vec<TheoremEntry>,
}

impl TheoremReport {
    /// All entries with `p ≤ n` agree within tolerance.
    pub fn holds(&self) -> bool {
        self.entries.iter().filter(|e| e.predicted).all(|e| e.within)
    }
}

/// Compares derivatives at `R₀` of the exact energy with those of the energy
/// of `H(R)` in the ground state of its `(n−1)`-th order Taylor expansion,
/// for every coordinate tuple in `coord_sets` (orders up to `n + 1`).
pub fn theorem1_check<F: HamiltonianFamily + ?Sized>(
    family: &F,
    n: usize,
    coord_sets: &[Vec<usize>],
    exec: Exec,
) -> Result<TheoremReport> {
    if n == 0 {
        return Err(Error::Config("expansion order n must be at least 1".into()));
    }
    let mut all: Vec<usize> = coord_sets.iter().flatten().copied().collect();
    all.sort_unstable();
    all.dedup();
    let taylor = TaylorFamily::new(family, n - 1, &all)?;
    let sector = family.sector();
    let step = family.step();
    let available = |l: &DisplacementLabel| family.has_point(l);

    let exact_energy = |l: &DisplacementLabel| -> Result<f64> {
        Ok(exact_ground_state(&family.hamiltonian(l)?, sector.as_ref())?.energy)
    };
    let truncated_energy = |l: &DisplacementLabel| -> Result<f64> {
        Ok(exact_ground_state(&taylor.hamiltonian(l)?, sector.as_ref())?.energy)
    };
    let cross = |l: &DisplacementLabel| -> Result<f64> {
        let phi = exact_ground_state(&taylor.hamiltonian(l)?, sector.as_ref())?.state;
        real_part(
            family.hamiltonian(l)?.expectation(phi.amplitudes()),
            "truncated-state energy",
        )
    };

    let mut entries = Vec::with_capacity(coord_sets.len());
    for coords in coord_sets {
        let p = coords.len();
        if p == 0 || p > n + 1 {
            return Err(Error::Order(p));
        }
        let exact = fd_scalar(coords, step, exec, available, exact_energy)?;
        let truncated_energy = fd_scalar(coords, step, exec, available, truncated_energy)?;
        let truncated_state = if n == 1 && p == 1 {
            let psi = exact_ground_state(&family.hamiltonian(&DisplacementLabel::base())?, sector.as_ref())?.state;
            let fh = real_part(
                family.derivative(coords)?.expectation(psi.amplitudes()),
                "Feynman–Hellmann",
            )?;
            FdDerivative {
                coords: coords.clone(),
                value: fh,
                step,
                error_estimate: Some(0.0),
                roundoff: 0.0,
                n_points: 1,
            }
        } else {
            fd_scalar(coords, step, exec, available, cross)?
        };
        for d in [&exact, &truncated_state] {
            if d.error_estimate.is_none() {
                return Err(Error::MissingPoint(format!(
                    "doubled stencil for {:?} (needed for the error estimate)",
                    d.coords
                )));
            }
        }
        let difference = (exact.value - truncated_state.value).abs();
        let tolerance = THEOREM_TOLERANCE_FACTOR * (exact.error_bound() + truncated_state.error_bound());
        entries.push(TheoremEntry {
            coords: exact.coords.clone(),
            order: p,
            within: difference <= tolerance,
            predicted: p <= n,
            exact,
            truncated_state,
            truncated_energy,
            difference,
            tolerance,
        });
    }
    Ok(TheoremReport { n, step, entries })
}
