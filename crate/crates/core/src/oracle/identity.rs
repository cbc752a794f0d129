use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::eigen::exact_ground_state;
use crate::error::{Error, Result};
use crate::hamgrid::{DisplacementLabel, HamiltonianFamily};
use crate::simulator::StateVector;

/// How the states at displaced points are phased before differencing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseMode {
    /// `⟨ψ(R₀)|ψ(R)⟩` made real and nonnegative.
    Aligned,
    /// Random global phases, no alignment (negative control).
    Scrambled(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub order: usize,
    pub coord: usize,
    /// `2Re⟨∂ψ|ψ⟩` for order 1, `2Re⟨∂²ψ|ψ⟩ + 2⟨∂ψ|∂ψ⟩` for order 2.
    pub residual: f64,
}

/// Finite-difference check of the derivatives of `⟨ψ|ψ⟩ = 1` along one
/// coordinate, using exact ground states at `R₀` and `R₀ ± h`.
pub fn normalization_identity_check<F: HamiltonianFamily + ?Sized>(
    family: &F,
    coord: usize,
    order: usize,
    mode: PhaseMode,
) -> Result<IdentityReport> {
    if !(1..=2).contains(&order) {
        return Err(Error::Order(order));
    }
    if coord >= family.n_coords() {
        return Err(Error::Config(format!("coordinate {coord} out of range")));
    }
    let sector = family.sector();
    let state = |l: &DisplacementLabel| -> Result<StateVector> {
        if !family.has_point(l) {
            return Err(Error::MissingPoint(l.to_string()));
        }
        Ok(exact_ground_state(&family.hamiltonian(l)?, sector.as_ref())?.state)
    };
    let base = DisplacementLabel::base();
    let psi0 = state(&base)?;
    let mut plus = state(&base.shifted(coord, 1))?;
    let mut minus = state(&base.shifted(coord, -1))?;
    match mode {
        PhaseMode::Aligned => {
            plus.align_to(&psi0)?;
            minus.align_to(&psi0)?;
        }
        PhaseMode::Scrambled(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for s in [&mut plus, &mut minus] {
                let ph = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
                *s = StateVector::from_amplitudes(s.n_qubits(), s.amplitudes().iter().map(|a| a * ph).collect())?;
            }
        }
    }
    let h = family.step();
    let (a0, ap, am) = (psi0.amplitudes(), plus.amplitudes(), minus.amplitudes());
    let d1: Vec<Complex64> = ap.iter().zip(am).map(|(p, m)| (p - m) / (2.0 * h)).collect();
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let residual = if order == 1 {
        2.0 * inner(&d1, a0).re
    } else {
        let d2: Vec<Complex64> = ap
            .iter()
            .zip(am)
            .zip(a0)
            .map(|((p, m), z)| (p - z * 2.0 + m) / (h * h))
            .collect();
        2.0 * inner(&d2, a0).re + 2.0 * inner(&d1, &d1).re
    };
    Ok(IdentityReport { order, coord, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamgrid::SyntheticFamily;

    #[test]
    fn aligned_passes_scrambled_fails() {
        let f = SyntheticFamily::random(3, 2, 2, 12, 1e-3, 11);
        let ok = normalization_identity_check(&f, 0, 1, PhaseMode::Aligned).unwrap();
        assert!(ok.residual.abs() < 1e-6, "{ok:?}");
        let ok2 = normalization_identity_check(&f, 1, 2, PhaseMode::Aligned).unwrap();
        assert!(ok2.residual.abs() < 1e-5, "{ok2:?}");
        let bad = normalization_identity_check(&f, 0, 1, PhaseMode::Scrambled(1)).unwrap();
        assert!(bad.residual.abs() > 1.0, "{bad:?}");
    }
}
