//! Harmonic vibrational analysis of an energy Hessian.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamgrid::Geometry;

const HARTREE_J: f64 = 4.359_744_722_207_1e-18;
const BOHR_M: f64 = 5.291_772_109_03e-11;
const AMU_KG: f64 = 1.660_539_066_60e-27;
const LIGHT_CM_S: f64 = 2.997_924_58e10;

/// Default cutoff below which modes count as translations or rotations.
pub const DEFAULT_DROP_THRESHOLD: f64 = 50.0;

/// cm⁻¹ per `sqrt(Hartree / (amu · Bohr²))`, from CODATA 2018 values
/// (5140.49 to six significant figures).
pub fn wavenumber_conversion() -> f64 {
    (HARTREE_J / (AMU_KG * BOHR_M * BOHR_M)).sqrt() / (2.0 * PI * LIGHT_CM_S)
}

/// `H_ij / sqrt(m_i m_j)`.
pub fn mass_weight(hessian: &DMatrix<f64>, geometry: &Geometry) -> Result<DMatrix<f64>> {
    let n = geometry.n_coords();
    if hessian.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "Hessian is {}×{}, geometry has {n} coordinates",
            hessian.nrows(),
            hessian.ncols()
        )));
    }
    for (k, a) in geometry.atoms.iter().enumerate() {
        if !(a.mass_amu > 0.0) {
            return Err(Error::Mass {
                atom: k,
                mass: a.mass_amu,
            });
        }
    }
    let s: Vec<f64> = geometry.coordinate_masses().iter().map(|m| m.sqrt()).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| hessian[(i, j)] / (s[i] * s[j])))
}

/// Orthonormal mass-weighted translation and rotation vectors (five for a
/// linear molecule, six otherwise, fewer for a single atom).
pub fn rigid_body_basis(geometry: &Geometry) -> Vec<DVector<f64>> {
    let n = geometry.n_coords();
    let masses: Vec<f64> = geometry.atoms.iter().map(|a| a.mass_amu).collect();
    let total: f64 = masses.iter().sum();
    let mut com = Vector3::zeros();
    for a in &geometry.atoms {
        com += Vector3::from(a.position) * a.mass_amu;
    }
    com /= total;
    let mut raw = Vec::with_capacity(6);
    for k in 0..3 {
        let mut v = DVector::zeros(n);
        for (i, m) in masses.iter().enumerate() {
            v[3 * i + k] = m.sqrt();
        }
        raw.push(v);
    }
    for k in 0..3 {
        let axis = Vector3::ith(k, 1.0);
        let mut v = DVector::zeros(n);
        for (i, a) in geometry.atoms.iter().enumerate() {
            let r = axis.cross(&(Vector3::from(a.position) - com)) * masses[i].sqrt();
            for c in 0..3 {
                v[3 * i + c] = r[c];
            }
        }
        raw.push(v);
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for mut v in raw {
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > 1e-6 * total.sqrt() {
            basis.push(v / norm);
        }
    }
    basis
}

/// `P M P` with `P` the projector off the rigid-body vectors.
pub fn project_rigid_body(mw: &DMatrix<f64>, geometry: &Geometry) -> Result<DMatrix<f64>> {
    let n = geometry.n_coords();
    if mw.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "matrix is {}×{}, expected {n}×{n}",
            mw.nrows(),
            mw.ncols()
        )));
    }
    let mut p = DMatrix::identity(n, n);
    for v in rigid_body_basis(geometry) {
        p -= &v * v.transpose();
    }
    Ok(&p * mw * &p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    /// cm⁻¹, descending; negative entries stand for imaginary frequencies.
    pub frequencies: Vec<f64>,
    pub imaginary: Vec<bool>,
    pub dropped_modes: usize,
    /// Mass-weighted displacement vectors, one per kept mode.
    pub eigenvectors: Vec<Vec<f64>>,
}

/// Frequencies from a mass-weighted Hessian (Hartree/(amu·Bohr²)).
pub fn frequencies(mw: &DMatrix<f64>, drop_threshold: f64) -> Result<ModeResult> {
    let n = mw.nrows();
    if mw.ncols() != n {
        return Err(Error::Dimension("mass-weighted Hessian is not square".into()));
    }
    let scale = mw.amax().max(1e-300);
    let asym = (mw - mw.transpose()).amax();
    if asym > 1e-8 * scale {
        return Err(Error::Asymmetric(asym));
    }
    let eig = mw.clone().symmetric_eigen();
    let c = wavenumber_conversion();
    let mut modes: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    let mut dropped = 0;
    for k in 0..n {
        let l = eig.eigenvalues[k];
        let nu = l.signum() * c * l.abs().sqrt();
        if nu.abs() < drop_threshold {
            dropped += 1;
        } else {
            modes.push((nu, eig.eigenvectors.column(k).iter().copied().collect()));
        }
    }
    modes.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(ModeResult {
        imaginary: modes.iter().map(|m| m.0 < 0.0).collect(),
        frequencies: modes.iter().map(|m| m.0).collect(),
        eigenvectors: modes.into_iter().map(|m| m.1).collect(),
        dropped_modes: dropped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeOptions {
    pub drop_threshold: f64,
    /// Project translations and rotations out before diagonalizing.
    pub project_rigid_body: bool,
}

impl Default for ModeOptions {
    fn default() -> Self {
        Self {
            drop_threshold: DEFAULT_DROP_THRESHOLD,
            project_rigid_body: true,
        }
    }
}

/// Mass weighting, optional rigid-body projection and diagonalization.
pub fn normal_modes(hessian: &DMatrix<f64>, geometry: &Geometry, opts: &ModeOptions) -> Result<ModeResult> {
    let mut mw = mass_weight(hessian, geometry)?;
    if opts.project_rigid_body {
        mw = project_rigid_body(&mw, geometry)?;
    }
    mw = (&mw + mw.transpose()) * 0.5;
    frequencies(&mw, opts.drop_threshold)
}

impl ModeResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("mode,frequency_cm1,imaginary\n");
        for (k, (f, i)) in self.frequencies.iter().zip(&self.imaginary).enumerate() {
            s.push_str(&format!("{},{:.6},{}\n", k + 1, f, i));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamgrid::Atom;

    fn atom(symbol: &str, mass: f64, x: [f64; 3]) -> Atom {
        Atom {
            symbol: symbol.into(),
            mass_amu: mass,
            position: x,
        }
    }

    #[test]
    fn conversion_constant() {
        assert!((wavenumber_conversion() - 5140.49).abs() < 0.01);
    }

    #[test]
    fn unit_and_diagonal_weighting() {
        let g = Geometry::new(vec![atom("X", 1.0, [0.0; 3])]).unwrap();
        let h = DMatrix::from_fn(3, 3, |i, j| (i + 2 * j) as f64);
        assert_eq!(mass_weight(&h, &g).unwrap(), h);
        let g2 = Geometry::new(vec![atom("X", 4.0, [0.0; 3])]).unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 4.0, 8.0]));
        let mw = mass_weight(&d, &g2).unwrap();
        assert_eq!(mw[(2, 2)], 2.0);
        assert_eq!(mw[(0, 1)], 0.0);
    }

    #[test]
    fn one_dimensional_oscillator() {
        let m = DMatrix::from_element(1, 1, 1.0);
        let r = frequencies(&m, 50.0).unwrap();
        assert!((r.frequencies[0] - wavenumber_conversion()).abs() < 1e-9);
        let z = frequencies(&DMatrix::zeros(3, 3), 50.0).unwrap();
        assert!(z.frequencies.is_empty());
        assert_eq!(z.dropped_modes, 3);
        let neg = frequencies(&DMatrix::from_element(1, 1, -1.0), 50.0).unwrap();
        assert!(neg.imaginary[0] && neg.frequencies[0] < 0.0);
    }

    #[test]
    fn rigid_body_counts() {
        let lin = Geometry::new(vec![
            atom("H", 1.0, [0.0, 0.0, -1.4]),
            atom("Be", 9.0, [0.0, 0.0, 0.0]),
            atom("H", 1.0, [0.0, 0.0, 1.4]),
        ])
        .unwrap();
        assert_eq!(rigid_body_basis(&lin).len(), 5);
        let bent = Geometry::new(vec![
            atom("O", 16.0, [0.0, 0.0, 0.0]),
            atom("H", 1.0, [1.4, 1.1, 0.0]),
            atom("H", 1.0, [-1.4, 1.1, 0.0]),
        ])
        .unwrap();
        assert_eq!(rigid_body_basis(&bent).len(), 6);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(frequencies(&m, 50.0), Err(Error::Asymmetric(_))));
    }
}
