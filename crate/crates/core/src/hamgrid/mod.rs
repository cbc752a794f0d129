//! Geometry-indexed integral grids and Hamiltonian coordinate derivatives.
//!
//! A grid holds one [`IntegralSet`] per displaced geometry. Derivatives of
//! the Hamiltonian are central finite differences of the integral
//! coefficients; assembly is linear, so differencing integrals and then
//! assembling equals differencing the assembled operators.

mod family;
mod fcidump;
mod label;
mod manifest;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use family::{HamiltonianFamily, SyntheticFamily, TaylorFamily};
pub use fcidump::{fcidump_string, parse_fcidump, parse_fcidump_str, write_fcidump};
pub use label::{central_weights, DisplacementLabel, Stencil};
pub use manifest::{load_grid, load_grid_with, write_grid, Manifest, ManifestAtom, ManifestPoint};

use crate::error::{Error, Result};
use crate::fermion::{assemble_hamiltonian, assemble_unchecked, IntegralSet};
use crate::pauli::PauliSum;
use crate::sector::Sector;

/// Default continuity bound for [`HamiltonianGrid::validate_grid`], in
/// Hartree/Bohr.
pub const DEFAULT_CONTINUITY_BOUND: f64 = 10.0;

/// Default finite-difference step in Bohr.
pub const DEFAULT_STEP: f64 = 5e-3;

/// Highest derivative order the stencils support.
pub const MAX_ORDER: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub symbol: String,
    pub mass_amu: f64,
    /// Bohr.
    pub position: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub atoms: Vec<Atom>,
}

impl Geometry {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Config("geometry has no atoms".into()));
        }
        for (k, a) in atoms.iter().enumerate() {
            if !(a.mass_amu > 0.0) {
                return Err(Error::Mass {
                    atom: k,
                    mass: a.mass_amu,
                });
            }
        }
        Ok(Self { atoms })
    }

    pub fn n_coords(&self) -> usize {
        3 * self.atoms.len()
    }

    /// Mass for each Cartesian coordinate (each atom's mass repeated three
    /// times).
    pub fn coordinate_masses(&self) -> Vec<f64> {
        self.atoms.iter().flat_map(|a| [a.mass_amu; 3]).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.atoms.iter().flat_map(|a| a.position).collect()
    }
}

static ATOMIC_WEIGHTS: &str = include_str!("../data/atomic_weights.json");

/// Conventional standard atomic weight in amu, from the shipped table.
pub fn standard_atomic_weight(symbol: &str) -> Option<f64> {
    let table: BTreeMap<String, f64> = serde_json::from_str(ATOMIC_WEIGHTS).expect("atomic weight table is valid JSON");
    table.get(symbol).copied()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeViolation {
    pub from: Vec<i64>,
    pub to: Vec<i64>,
    pub max_abs_diff: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pairs_checked: usize,
    /// Largest observed `max |Δc| / (h·|Δlabel|)` over adjacent pairs.
    pub max_rate: f64,
    pub continuity_bound: f64,
    pub violations: Vec<GaugeViolation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct HamiltonianGrid {
    molecule: String,
    geometry: Geometry,
    step: f64,
    points: BTreeMap<DisplacementLabel, IntegralSet>,
    gauge: ValidationReport,
    gauge_override: bool,
}

impl HamiltonianGrid {
    /// Builds a grid, checking its invariants and running gauge validation
    /// with the default continuity bound.
    pub fn new(
        molecule: impl Into<String>,
        geometry: Geometry,
        step: f64,
        points: BTreeMap<DisplacementLabel, IntegralSet>,
    ) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::Config(format!("step {step} must be positive")));
        }
        if geometry.n_coords() < 3 {
            return Err(Error::Config("geometry needs at least one atom".into()));
        }
        let base = points
            .get(&DisplacementLabel::base())
            .ok_or(Error::BaseGeometryAbsent)?;
        for (label, ints) in &points {
            if let Some(c) = label.max_coord() {
                if c >= geometry.n_coords() {
                    return Err(Error::InconsistentGrid(format!(
                        "label {label} exceeds {} coordinates",
                        geometry.n_coords()
                    )));
                }
            }
            if ints.n_orbitals != base.n_orbitals || ints.n_electrons != base.n_electrons || ints.ms2 != base.ms2 {
                return Err(Error::InconsistentGrid(format!(
                    "point {label} has NORB={} NELEC={} MS2={}, base has NORB={} NELEC={} MS2={}",
                    ints.n_orbitals, ints.n_electrons, ints.ms2, base.n_orbitals, base.n_electrons, base.ms2
                )));
            }
            ints.validate()?;
        }
        base.reference_occupations()?;
        let mut grid = Self {
            molecule: molecule.into(),
            geometry,
            step,
            points,
            gauge: ValidationReport::default(),
            gauge_override: false,
        };
        grid.gauge = grid.validate_grid(DEFAULT_CONTINUITY_BOUND);
        Ok(grid)
    }

    pub fn molecule(&self) -> &str {
        &self.molecule
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Reinterprets the grid spacing. Only meaningful when the files were
    /// generated at this spacing.
    pub fn set_step(&mut self, step: f64) -> Result<()> {
        if !(step > 0.0) {
            return Err(Error::Config(format!("step {step} must be positive")));
        }
        self.step = step;
        self.gauge = self.validate_grid(self.gauge.continuity_bound);
        Ok(())
    }

    pub fn n_coords(&self) -> usize {
        self.geometry.n_coords()
    }

    pub fn base(&self) -> &IntegralSet {
        &self.points[&DisplacementLabel::base()]
    }

    pub fn n_qubits(&self) -> usize {
        self.base().n_qubits()
    }

    pub fn sector(&self) -> Sector {
        let occ = self.base().reference_occupations().expect("checked at construction");
        let n_up = occ.iter().filter(|&&q| q % 2 == 0).count();
        Sector::new(self.n_qubits(), n_up, occ.len() - n_up)
    }

    pub fn labels(&self) -> impl Iterator<Item = &DisplacementLabel> {
        self.points.keys()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, label: &DisplacementLabel) -> bool {
        self.points.contains_key(label)
    }

    pub fn integrals(&self, label: &DisplacementLabel) -> Result<&IntegralSet> {
        self.points
            .get(label)
            .ok_or_else(|| Error::MissingPoint(label.to_string()))
    }

    pub fn hamiltonian_at(&self, label: &DisplacementLabel) -> Result<PauliSum> {
        assemble_hamiltonian(self.integrals(label)?)
    }

    /// Report from the most recent validation.
    pub fn gauge_report(&self) -> &ValidationReport {
        &self.gauge
    }

    /// Re-runs validation with a custom bound and stores the result.
    pub fn revalidate(&mut self, continuity_bound: f64) -> &ValidationReport {
        self.gauge = self.validate_grid(continuity_bound);
        &self.gauge
    }

    /// Allows derivative operations despite gauge violations.
    pub fn set_gauge_override(&mut self, allow: bool) {
        self.gauge_override = allow;
    }

    fn derivatives_allowed(&self) -> Result<()> {
        if self.gauge.is_clean() || self.gauge_override {
            Ok(())
        } else {
            Err(Error::GaugeInconsistent(self.gauge.violations.len()))
        }
    }

    /// Checks every pair of points whose labels differ by at most one step
    /// per coordinate: `max |Δc| ≤ bound · h · |Δlabel|₂`.
    pub fn validate_grid(&self, continuity_bound: f64) -> ValidationReport {
        let entries: Vec<(&DisplacementLabel, &IntegralSet)> = self.points.iter().collect();
        let mut report = ValidationReport {
            continuity_bound,
            ..Default::default()
        };
        for (a, (la, ia)) in entries.iter().enumerate() {
            for (lb, ib) in entries.iter().skip(a + 1) {
                let diff = lb.sub(la);
                if diff.linf() != 1 {
                    continue;
                }
                report.pairs_checked += 1;
                let dist = diff.l2() * self.step;
                let d = ia.max_abs_diff(ib);
                report.max_rate = report.max_rate.max(d / dist);
                let bound = continuity_bound * dist;
                if d > bound {
                    report.violations.push(GaugeViolation {
                        from: la.to_signed(),
                        to: lb.to_signed(),
                        max_abs_diff: d,
                        bound,
                    });
                }
            }
        }
        report
    }

    /// Central-difference derivative of all integral coefficients with
    /// respect to the coordinates in `coords` (0-based; repeats allowed; the
    /// empty slice returns the base point).
    pub fn coeff_derivative(&self, coords: &[usize]) -> Result<IntegralSet> {
        if coords.is_empty() {
            return Ok(self.base().clone());
        }
        self.derivatives_allowed()?;
        if let Some(&c) = coords.iter().find(|&&c| c >= self.n_coords()) {
            return Err(Error::Config(format!(
                "coordinate {c} out of range for {} coordinates",
                self.n_coords()
            )));
        }
        let stencil = Stencil::new(coords, self.step, 1)?;
        let mut parts = Vec::with_capacity(stencil.points.len());
        for (label, w) in &stencil.points {
            parts.push((*w, self.integrals(label)?));
        }
        IntegralSet::linear_combine(&parts)
    }

    /// Qubit operator of [`HamiltonianGrid::coeff_derivative`].
    pub fn hamiltonian_derivative(&self, coords: &[usize]) -> Result<PauliSum> {
        if coords.is_empty() {
            return assemble_hamiltonian(self.base());
        }
        assemble_unchecked(&self.coeff_derivative(coords)?)
    }

    /// SHA-256 over step, geometry and every coefficient, in label order.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.molecule.as_bytes());
        h.update(self.step.to_le_bytes());
        for a in &self.geometry.atoms {
            h.update(a.symbol.as_bytes());
            h.update(a.mass_amu.to_le_bytes());
            for x in a.position {
                h.update(x.to_le_bytes());
            }
        }
        for (label, ints) in &self.points {
            for e in label.to_signed() {
                h.update(e.to_le_bytes());
            }
            h.update((ints.n_orbitals as u64).to_le_bytes());
            h.update((ints.n_electrons as u64).to_le_bytes());
            h.update(ints.core_energy.to_le_bytes());
            for v in ints.h1.iter().chain(&ints.h2) {
                h.update(v.to_le_bytes());
            }
        }
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
