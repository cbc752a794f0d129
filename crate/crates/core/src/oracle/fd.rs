use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::Serialize;

use super::eigen::exact_ground_state;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamgrid::{DisplacementLabel, HamiltonianFamily, Stencil};

/// Assumed absolute accuracy of one exact ground energy (Hartree).
pub const ENERGY_ROUNDOFF: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdDerivative {
    /// Differentiated coordinates (0-based), sorted.
    pub coords: Vec<usize>,
    pub value: f64,
    pub step: f64,
    /// Richardson estimate `(D_2h − D_h)/3` of the truncation error, when
    /// the doubled stencil is available.
    pub error_estimate: Option<f64>,
    /// `Σ|w| · ENERGY_ROUNDOFF`.
    pub roundoff: f64,
    pub n_points: usize,
}

impl FdDerivative {
    pub fn order(&self) -> usize {
        self.coords.len()
    }

    /// `|truncation estimate| + roundoff`.
    pub fn error_bound(&self) -> f64 {
        self.error_estimate.map_or(0.0, f64::abs) + self.roundoff
    }
}

/// Central finite difference of a scalar function of grid labels. Values
/// are computed once per distinct label; the doubled stencil is included
/// when `available` accepts all of its points.
pub fn fd_scalar<A, V>(coords: &[usize], step: f64, exec: Exec, available: A, value: V) -> Result<FdDerivative>
where
    A: Fn(&DisplacementLabel) -> bool,
    V: Fn(&DisplacementLabel) -> Result<f64> + Sync + Send,
{
    let s1 = Stencil::new(coords, step, 1)?;
    if let Some((l, _)) = s1.points.iter().find(|(l, _)| !available(l)) {
        return Err(Error::MissingPoint(l.to_string()));
    }
    let s2 = Stencil::new(coords, step, 2)?;
    let use2 = coords.is_empty() || s2.points.iter().all(|(l, _)| available(l));
    let mut labels: BTreeSet<DisplacementLabel> = s1.points.iter().map(|p| p.0.clone()).collect();
    if use2 {
        labels.extend(s2.points.iter().map(|p| p.0.clone()));
    }
    let labels: Vec<DisplacementLabel> = labels.into_iter().collect();
    let vals = exec.try_map(&labels, |l| value(l))?;
    let table: BTreeMap<&DisplacementLabel, f64> = labels.iter().zip(vals).collect();
    let d1 = s1.apply::<_, Error>(|l| Ok(table[l]))?;
    let error_estimate = if use2 && !coords.is_empty() {
        let d2 = s2.apply::<_, Error>(|l| Ok(table[l]))?;
        Some((d2 - d1) / 3.0)
    } else {
        None
    };
    Ok(FdDerivative {
        coords: s1.coords.clone(),
        value: d1,
        step,
        error_estimate,
        roundoff: s1.weight_norm() * ENERGY_ROUNDOFF,
        n_points: table.len(),
    })
}

fn ground_energy<F: HamiltonianFamily + ?Sized>(family: &F, label: &DisplacementLabel) -> Result<f64> {
    let h = family.hamiltonian(label)?;
    Ok(exact_ground_state(&h, family.sector().as_ref())?.energy)
}

/// `∂^|coords| E / ∂R_coords` at `R₀` from exact ground energies on the
/// family's stencil points.
pub fn fd_energy_derivative<F: HamiltonianFamily + ?Sized>(
    family: &F,
    coords: &[usize],
    exec: Exec,
) -> Result<FdDerivative> {
    if coords.len() > crate::hamgrid::MAX_ORDER {
        return Err(Error::Order(coords.len()));
    }
    if let Some(&c) = coords.iter().find(|&&c| c >= family.n_coords()) {
        return Err(Error::Config(format!("coordinate {c} out of range")));
    }
    fd_scalar(
        coords,
        family.step(),
        exec,
        |l| family.has_point(l),
        |l| ground_energy(family, l),
    )
}

/// Exact ground energies at the given labels, computed in parallel.
pub fn ground_energies<F: HamiltonianFamily + ?Sized>(
    family: &F,
    labels: &[DisplacementLabel],
    exec: Exec,
) -> Result<Vec<f64>> {
    exec.try_map(labels, |l| ground_energy(family, l))
}

/// Full FD Hessian of the exact ground energy (Hartree/Bohr²), sharing
/// eigensolves between entries.
pub fn fd_energy_hessian<F: HamiltonianFamily + ?Sized>(family: &F, exec: Exec) -> Result<DMatrix<f64>> {
    let n = family.n_coords();
    let mut stencils = Vec::new();
    let mut labels = BTreeSet::new();
    for i in 0..n {
        for j in i..n {
            let s = Stencil::new(&[i, j], family.step(), 1)?;
            for (l, _) in &s.points {
                if !family.has_point(l) {
                    return Err(Error::MissingPoint(l.to_string()));
                }
                labels.insert(l.clone());
            }
            stencils.push((i, j, s));
        }
    }
    let labels: Vec<DisplacementLabel> = labels.into_iter().collect();
    let energies = ground_energies(family, &labels, exec)?;
    let table: BTreeMap<&DisplacementLabel, f64> = labels.iter().zip(energies).collect();
    let mut out = DMatrix::zeros(n, n);
    for (i, j, s) in stencils {
        let v = s.apply::<_, Error>(|l| Ok(table[l]))?;
        out[(i, j)] = v;
        out[(j, i)] = v;
    }
    Ok(out)
}
